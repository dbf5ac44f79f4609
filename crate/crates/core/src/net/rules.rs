use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use super::{Endpoint, Net};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub const TOKEN: SymbolId = SymbolId(0);
    pub const APP: SymbolId = SymbolId(1);
    pub const CAPP: SymbolId = SymbolId(2);
    pub const LAM: SymbolId = SymbolId(3);
    pub const TRUE: SymbolId = SymbolId(4);
    pub const FALSE: SymbolId = SymbolId(5);
    pub const ZERO: SymbolId = SymbolId(6);
    pub const SUC: SymbolId = SymbolId(7);
    pub const NIL: SymbolId = SymbolId(8);
    pub const CONS: SymbolId = SymbolId(9);
    pub const COPY: SymbolId = SymbolId(10);
    pub const DUP: SymbolId = SymbolId(11);
    pub const ERASE: SymbolId = SymbolId(12);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Token,
    SyntacticApp,
    ComputationApp,
    Lambda,
    Constructor,
    Copy,
    Duplicator,
    Eraser,
    IteratorSyntactic,
    IteratorComputation,
}

impl SymbolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SymbolKind::Token => "token",
            SymbolKind::SyntacticApp => "syntactic-app",
            SymbolKind::ComputationApp => "computation-app",
            SymbolKind::Lambda => "lambda",
            SymbolKind::Constructor => "constructor",
            SymbolKind::Copy => "copy",
            SymbolKind::Duplicator => "duplicator",
            SymbolKind::Eraser => "eraser",
            SymbolKind::IteratorSyntactic => "iterator-syntactic",
            SymbolKind::IteratorComputation => "iterator-computation",
        }
    }

    /// Symbols that drive evaluation, as opposed to copying and erasing.
    pub fn is_evaluation(&self) -> bool {
        matches!(
            self,
            SymbolKind::Token | SymbolKind::ComputationApp | SymbolKind::IteratorComputation
        )
    }

    /// Symbols that may appear in a net that reads back as a term.
    pub fn is_syntactic(&self) -> bool {
        matches!(
            self,
            SymbolKind::SyntacticApp
                | SymbolKind::Lambda
                | SymbolKind::Constructor
                | SymbolKind::Copy
                | SymbolKind::Eraser
                | SymbolKind::IteratorSyntactic
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub id: SymbolId,
    /// Stable ASCII token used in JSON and traces.
    pub name: String,
    pub display: String,
    pub arity: usize,
    pub kind: SymbolKind,
}

/// Right-hand side of an interaction rule. The replacement's interface
/// positions are the holes: position `i` stands for the wire that was on
/// auxiliary port `i + 1` of `left.0`, continuing with the auxiliary ports
/// of `left.1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTemplate {
    pub left: (SymbolId, SymbolId),
    pub label: String,
    pub replacement: Net,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("a rule for {0} ⋈ {1} already exists")]
    DuplicateRule(String, String),
    #[error("rule {label}: {message}")]
    BadTemplate { label: String, message: String },
}

#[derive(Clone, Debug, Default)]
pub struct InteractionSystem {
    symbols: Vec<SymbolDecl>,
    rules: Vec<RuleTemplate>,
    index: HashMap<(SymbolId, SymbolId), usize>,
}

fn key(a: SymbolId, b: SymbolId) -> (SymbolId, SymbolId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl InteractionSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_symbol(
        &mut self,
        name: &str,
        display: &str,
        arity: usize,
        kind: SymbolKind,
    ) -> SymbolId {
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(SymbolDecl {
            id,
            name: name.to_string(),
            display: display.to_string(),
            arity,
            kind,
        });
        id
    }

    /// Adds a rule after checking its template against the declared arities.
    pub fn add_rule(&mut self, rule: RuleTemplate) -> Result<(), SystemError> {
        let (a, b) = rule.left;
        if self.index.contains_key(&key(a, b)) {
            return Err(SystemError::DuplicateRule(
                self.symbol(a).name.clone(),
                self.symbol(b).name.clone(),
            ));
        }
        let holes = self.symbol(a).arity + self.symbol(b).arity;
        let bad = |message: String| SystemError::BadTemplate {
            label: rule.label.clone(),
            message,
        };
        if rule.replacement.interface_len() != holes {
            return Err(bad(format!(
                "{} holes, expected {holes}",
                rule.replacement.interface_len()
            )));
        }
        if let Some(d) = rule.replacement.validate(self).first() {
            return Err(bad(d.to_string()));
        }
        self.index.insert(key(a, b), self.rules.len());
        self.rules.push(rule);
        Ok(())
    }

    pub fn rule(&self, a: SymbolId, b: SymbolId) -> Option<&RuleTemplate> {
        self.index.get(&key(a, b)).map(|&i| &self.rules[i])
    }

    pub fn rules(&self) -> &[RuleTemplate] {
        &self.rules
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &SymbolDecl {
        &self.symbols[id.0 as usize]
    }

    pub fn try_symbol(&self, id: SymbolId) -> Option<&SymbolDecl> {
        self.symbols.get(id.0 as usize)
    }

    pub fn by_name(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.id)
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.symbol(id).arity
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.symbol(id).kind
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbol(id).name
    }

    /// Text listing of symbols and rules. With `nets`, every replacement is
    /// followed by its Net JSON.
    pub fn dump(&self, nets: bool) -> String {
        let mut out = String::new();
        for s in &self.symbols {
            let _ = writeln!(out, "symbol {}/{}/{}", s.name, s.arity, s.kind.as_str());
        }
        for r in &self.rules {
            let _ = writeln!(
                out,
                "rule {} >< {} -> {}, {}",
                self.name(r.left.0),
                self.name(r.left.1),
                r.replacement.agent_count(),
                r.replacement.interface_len()
            );
            if nets {
                let _ = writeln!(out, "  {}", r.replacement.to_json(self));
            }
        }
        out
    }

    /// Starts a template for `a ⋈ b` with its holes allocated.
    pub fn template(&self, a: SymbolId, b: SymbolId) -> (Net, Vec<Endpoint>) {
        let mut net = Net::new();
        let holes = (0..self.arity(a) + self.arity(b))
            .map(|_| net.add_free())
            .collect();
        (net, holes)
    }
}
