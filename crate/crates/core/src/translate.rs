//! T⟦·⟧: terms to syntactic nets, token attachment, and readback.
//!
//! A variable is a bare wire. Each binder collects the occurrences of its
//! variable in preorder and joins them with a right-leaning tree of `c`
//! agents (an eraser if there are none, a plain wire if there is one).
//! An iterator becomes its syntactic agent over the scrutinee; its
//! parameters live in the rules, and its fv ports count as occurrences.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::lang::{
    elaborate, free_vars, iterator_count, param_free_vars, subst, Term, Type, TypeError,
};
use crate::net::{AgentId, Endpoint, InteractionSystem, Net, SymbolId, SymbolKind};
use crate::system::{blind, IterKind, IteratorDescriptor, SymbolTable};

/// Pseudo-variables used while building iterator rules: the recursive
/// call, the constructor's head and its tail (or predecessor).
pub(crate) const REC: &str = "#rec";
pub(crate) const HEAD: &str = "#head";
pub(crate) const TAIL: &str = "#tail";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("iterator occurrence `{0}` is not registered in the symbol table")]
    Unregistered(String),
    #[error("iterator occurrence `{term}` has {found} free variables, its symbol has {expected}")]
    FvMismatch {
        term: String,
        expected: usize,
        found: usize,
    },
    #[error("a token needs a closed term, found free variables {0:?}")]
    Open(Vec<String>),
}

/// A translated term. Interface position 0 is the root; position `1 + i`
/// is the single port of `free[i]`.
#[derive(Clone, Debug)]
pub struct Translation {
    pub net: Net,
    pub free: Vec<String>,
}

/// How iterator occurrences find their symbols.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Resolve {
    /// By preorder position, the first occurrence being number `.0`.
    Preorder(usize),
    /// By α-equality of the parameters.
    ByParams,
}

/// The symbol and fv names a recursive call is rebuilt with.
#[derive(Clone, Debug)]
pub(crate) struct RecSpec {
    pub symbol: SymbolId,
    pub fv: Vec<String>,
}

pub(crate) struct Builder<'a> {
    pub net: Net,
    table: &'a SymbolTable,
    resolve: Resolve,
    /// Pending variable occurrences in preorder: name and the port that
    /// waits for the variable's wire.
    occ: Vec<(String, Endpoint)>,
    rec: Option<RecSpec>,
}

impl<'a> Builder<'a> {
    pub fn new(table: &'a SymbolTable, resolve: Resolve) -> Self {
        Builder {
            net: Net::new(),
            table,
            resolve,
            occ: Vec::new(),
            rec: None,
        }
    }

    pub fn with_rec(mut self, rec: RecSpec) -> Self {
        self.rec = Some(rec);
        self
    }

    fn agent(&mut self, sym: SymbolId, arity: usize, dest: Endpoint) -> AgentId {
        let id = self.net.add_agent(sym, arity);
        self.net.link(Endpoint::principal(id), dest);
        id
    }

    fn occurrence(&mut self, name: &str, dest: Endpoint) {
        match &self.rec {
            Some(spec) if name == REC => {
                let spec = spec.clone();
                let it = self.agent(spec.symbol, 1 + spec.fv.len(), dest);
                for (k, v) in spec.fv.iter().enumerate() {
                    self.occ
                        .push((format!("#fv:{v}"), Endpoint::aux(it, 2 + k)));
                }
                self.occ.push((TAIL.to_string(), Endpoint::aux(it, 1)));
            }
            _ => self.occ.push((name.to_string(), dest)),
        }
    }

    /// Translates `t` so that its root is wired to `dest`.
    pub fn term(&mut self, t: &Term, dest: Endpoint) -> Result<(), TranslateError> {
        let mut counter = match self.resolve {
            Resolve::Preorder(n) => n,
            Resolve::ByParams => 0,
        };
        self.go(t, dest, &mut counter)
    }

    fn go(&mut self, t: &Term, dest: Endpoint, next: &mut usize) -> Result<(), TranslateError> {
        let constant = |s: &mut Self, sym| {
            s.agent(sym, 0, dest);
            Ok(())
        };
        match t {
            Term::Var(x) => {
                self.occurrence(x, dest);
                Ok(())
            }
            Term::Abs(x, _, body) => {
                let lam = self.agent(SymbolId::LAM, 2, dest);
                let mark = self.occ.len();
                self.go(body, Endpoint::aux(lam, 2), next)?;
                self.bind(&[x], mark, Endpoint::aux(lam, 1));
                Ok(())
            }
            Term::App(f, a) => {
                let app = self.agent(SymbolId::APP, 2, dest);
                self.go(f, Endpoint::aux(app, 1), next)?;
                self.go(a, Endpoint::aux(app, 2), next)
            }
            Term::True => constant(self, SymbolId::TRUE),
            Term::False => constant(self, SymbolId::FALSE),
            Term::Zero => constant(self, SymbolId::ZERO),
            Term::Nil => constant(self, SymbolId::NIL),
            Term::Suc(p) => {
                let s = self.agent(SymbolId::SUC, 1, dest);
                self.go(p, Endpoint::aux(s, 1), next)
            }
            Term::Cons(h, tl) => {
                let c = self.agent(SymbolId::CONS, 2, dest);
                self.go(h, Endpoint::aux(c, 1), next)?;
                self.go(tl, Endpoint::aux(c, 2), next)
            }
            Term::IterBool { scrutinee, .. }
            | Term::IterNat { scrutinee, .. }
            | Term::IterList { scrutinee, .. } => {
                let index = *next;
                *next += iterator_count(t) - iterator_count(scrutinee);
                let d = self.lookup(index, t)?;
                let (sym, expected) = (d.syntactic, d.fv.len());
                let fv = param_free_vars(t);
                if fv.len() != expected {
                    return Err(TranslateError::FvMismatch {
                        term: t.to_string(),
                        expected,
                        found: fv.len(),
                    });
                }
                let it = self.agent(sym, 1 + fv.len(), dest);
                for (k, v) in fv.iter().enumerate() {
                    self.occurrence(v, Endpoint::aux(it, 2 + k));
                }
                self.go(scrutinee, Endpoint::aux(it, 1), next)
            }
        }
    }

    fn lookup(&self, index: usize, t: &Term) -> Result<&'a IteratorDescriptor, TranslateError> {
        let table = self.table;
        let found = match self.resolve {
            Resolve::Preorder(_) => table
                .get(index)
                .filter(|d| IterKind::of(&d.term) == IterKind::of(t)),
            Resolve::ByParams => table.by_params(t),
        };
        found.ok_or_else(|| TranslateError::Unregistered(blind(t).to_string()))
    }

    /// Joins the pending occurrences of `names` recorded since `mark` to
    /// `port`, in preorder.
    pub fn bind(&mut self, names: &[&str], mark: usize, port: Endpoint) {
        let mut uses = Vec::new();
        let mut i = mark;
        while i < self.occ.len() {
            if names.contains(&self.occ[i].0.as_str()) {
                uses.push(self.occ.remove(i).1);
            } else {
                i += 1;
            }
        }
        match uses.as_slice() {
            [] => {
                let e = self.net.add_agent(SymbolId::ERASE, 0);
                self.net.link(Endpoint::principal(e), port);
            }
            [only] => self.net.link(port, *only),
            [init @ .., last] => {
                let mut cur = port;
                for &u in init {
                    let c = self.net.add_agent(SymbolId::COPY, 2);
                    self.net.link(Endpoint::principal(c), cur);
                    self.net.link(Endpoint::aux(c, 1), u);
                    cur = Endpoint::aux(c, 2);
                }
                self.net.link(cur, *last);
            }
        }
    }

    /// The finished net; every occurrence must have been bound.
    pub fn finish(self) -> Result<Net, TranslateError> {
        if self.occ.is_empty() {
            Ok(self.net)
        } else {
            let mut names: Vec<String> = self.occ.into_iter().map(|(n, _)| n).collect();
            names.dedup();
            Err(TranslateError::Open(names))
        }
    }
}

/// T⟦t⟧, numbering iterator occurrences from 0.
pub fn translate(t: &Term, table: &SymbolTable) -> Result<Translation, TranslateError> {
    translate_at(t, table, 0)
}

/// T⟦t⟧ for a subterm whose first iterator occurrence has number `offset`
/// in the program the table was generated for.
pub fn translate_at(
    t: &Term,
    table: &SymbolTable,
    offset: usize,
) -> Result<Translation, TranslateError> {
    build(t, Builder::new(table, Resolve::Preorder(offset)))
}

/// T⟦t⟧ where each iterator takes the symbols of the registered occurrence
/// with α-equal parameters. Useful for terms produced by evaluation.
pub fn translate_by_params(t: &Term, table: &SymbolTable) -> Result<Translation, TranslateError> {
    build(t, Builder::new(table, Resolve::ByParams))
}

/// As `translate_by_params` with the interface listing `free` in the given
/// order. Names in `free` that do not occur get an eraser.
pub fn translate_by_params_in(
    t: &Term,
    table: &SymbolTable,
    free: &[String],
) -> Result<Translation, TranslateError> {
    build_in(t, Builder::new(table, Resolve::ByParams), free.to_vec())
}

fn build(t: &Term, b: Builder<'_>) -> Result<Translation, TranslateError> {
    build_in(t, b, free_vars(t))
}

fn build_in(
    t: &Term,
    mut b: Builder<'_>,
    free: Vec<String>,
) -> Result<Translation, TranslateError> {
    let root = b.net.add_free();
    b.term(t, root)?;
    for v in &free {
        let port = b.net.add_free();
        b.bind(&[v], 0, port);
    }
    Ok(Translation {
        net: b.finish()?,
        free,
    })
}

/// ⇓N: a token between the root and the observer.
pub fn attach_token(tr: Translation) -> Result<Net, TranslateError> {
    if !tr.free.is_empty() {
        return Err(TranslateError::Open(tr.free));
    }
    Ok(token_on_root(tr.net))
}

/// Puts a token on interface position 0 whatever else the interface holds.
pub fn token_on_root(mut net: Net) -> Net {
    let root = net.partner(Endpoint::Free(0)).expect("root is wired");
    let tok = net.add_agent(SymbolId::TOKEN, 1);
    net.link(Endpoint::principal(tok), root);
    net.link(Endpoint::aux(tok, 1), Endpoint::Free(0));
    net
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReadbackError {
    #[error("net not in syntactic form: {}", .0.join(", "))]
    NotSyntactic(Vec<String>),
    #[error("garbage component: agents {0:?} are unreachable from the root")]
    Garbage(Vec<u32>),
    #[error("malformed net at agent {agent} port {port}")]
    Malformed { agent: u32, port: u8 },
    #[error("read back term does not typecheck: {0}")]
    Type(#[from] TypeError),
}

/// Reads a closed syntactic net back as a term. Binder annotations are
/// recovered by type inference.
pub fn readback(
    net: &Net,
    system: &InteractionSystem,
    table: &SymbolTable,
) -> Result<Term, ReadbackError> {
    readback_typed(net, system, table, None)
}

/// As `readback`, with the expected type of the whole term, which fixes
/// annotations inference alone leaves open.
pub fn readback_typed(
    net: &Net,
    system: &InteractionSystem,
    table: &SymbolTable,
    expected: Option<&Type>,
) -> Result<Term, ReadbackError> {
    let (term, generated) = read_raw(net, system, table, &[])?;
    let (term, _) = elaborate(&term, &|x| generated.contains(x), expected)?;
    Ok(term)
}

/// Readback without annotation recovery: every binder the net introduces
/// is annotated `nat`. Interface positions `1..` read as `free`.
pub fn readback_untyped(
    net: &Net,
    system: &InteractionSystem,
    table: &SymbolTable,
    free: &[String],
) -> Result<Term, ReadbackError> {
    read_raw(net, system, table, free).map(|(t, _)| t)
}

fn read_raw(
    net: &Net,
    system: &InteractionSystem,
    table: &SymbolTable,
    free: &[String],
) -> Result<(Term, HashSet<String>), ReadbackError> {
    let mut bad: Vec<String> = net
        .agents()
        .filter(|(_, a)| !system.kind(a.symbol).is_syntactic())
        .map(|(id, a)| format!("{}#{}", system.symbol(a.symbol).display, id))
        .collect();
    if !bad.is_empty() {
        bad.truncate(16);
        return Err(ReadbackError::NotSyntactic(bad));
    }
    let mut avoid: HashSet<String> = free.iter().cloned().collect();
    for d in table.descriptors() {
        names_in(&d.term, &mut avoid);
    }
    let mut r = Reader {
        net,
        system,
        table,
        free,
        visited: HashSet::new(),
        names: HashMap::new(),
        avoid,
        generated: HashSet::new(),
        fresh: 0,
    };
    for k in 1..net.interface_len() {
        r.claim(Endpoint::Free(k as u32));
    }
    let term = r.read(Endpoint::Free(0))?;
    let mut garbage: Vec<u32> = net
        .agents()
        .map(|(id, _)| id)
        .filter(|id| !r.visited.contains(id))
        .map(|id| id.0)
        .collect();
    if !garbage.is_empty() {
        garbage.sort_unstable();
        return Err(ReadbackError::Garbage(garbage));
    }
    Ok((term, r.generated))
}

fn names_in(t: &Term, out: &mut HashSet<String>) {
    match t {
        Term::Var(x) | Term::Abs(x, ..) | Term::IterNat { binder: x, .. } => {
            out.insert(x.clone());
        }
        Term::IterList { head, acc, .. } => {
            out.insert(head.clone());
            out.insert(acc.clone());
        }
        _ => {}
    }
    for c in crate::lang::children_of(t) {
        names_in(c, out);
    }
}

struct Reader<'a> {
    net: &'a Net,
    system: &'a InteractionSystem,
    table: &'a SymbolTable,
    free: &'a [String],
    visited: HashSet<AgentId>,
    names: HashMap<AgentId, String>,
    avoid: HashSet<String>,
    generated: HashSet<String>,
    fresh: usize,
}

impl Reader<'_> {
    fn malformed(e: Endpoint) -> ReadbackError {
        match e {
            Endpoint::Port(a, p) => ReadbackError::Malformed {
                agent: a.0,
                port: p,
            },
            Endpoint::Free(k) => ReadbackError::Malformed {
                agent: u32::MAX,
                port: k as u8,
            },
        }
    }

    fn kind(&self, id: AgentId) -> SymbolKind {
        self.system.kind(self.net.symbol_of(id).unwrap())
    }

    /// Marks the c tree and erasers hanging off a variable's port.
    fn claim(&mut self, port: Endpoint) {
        if let Some(Endpoint::Port(a, 0)) = self.net.partner(port) {
            match self.kind(a) {
                SymbolKind::Eraser => {
                    self.visited.insert(a);
                }
                SymbolKind::Copy => {
                    self.visited.insert(a);
                    self.claim(Endpoint::aux(a, 1));
                    self.claim(Endpoint::aux(a, 2));
                }
                _ => {}
            }
        }
    }

    fn fresh_name(&mut self) -> String {
        loop {
            let name = if self.fresh == 0 {
                "x".to_string()
            } else {
                format!("x{}", self.fresh)
            };
            self.fresh += 1;
            if self.avoid.insert(name.clone()) {
                self.generated.insert(name.clone());
                return name;
            }
        }
    }

    /// The term whose root is at the other end of `port`.
    fn read(&mut self, port: Endpoint) -> Result<Term, ReadbackError> {
        match self
            .net
            .partner(port)
            .ok_or_else(|| Self::malformed(port))?
        {
            Endpoint::Free(k) => self.free_var(k, port),
            Endpoint::Port(a, 0) => self.subterm(a),
            Endpoint::Port(a, p) => self.variable(a, p),
        }
    }

    fn free_var(&self, k: u32, from: Endpoint) -> Result<Term, ReadbackError> {
        match k.checked_sub(1).and_then(|i| self.free.get(i as usize)) {
            Some(x) => Ok(Term::Var(x.clone())),
            None => Err(Self::malformed(from)),
        }
    }

    /// An occurrence arriving at auxiliary port `p` of `a`: climb the c
    /// tree to the binder.
    fn variable(&mut self, a: AgentId, p: u8) -> Result<Term, ReadbackError> {
        match self.kind(a) {
            SymbolKind::Lambda if p == 1 => {
                self.names
                    .get(&a)
                    .map(|x| Term::Var(x.clone()))
                    .ok_or(ReadbackError::Malformed {
                        agent: a.0,
                        port: p,
                    })
            }
            SymbolKind::Copy => match self.net.partner(Endpoint::principal(a)) {
                Some(Endpoint::Port(b, q)) if q > 0 => self.variable(b, q),
                Some(Endpoint::Free(k)) => self.free_var(k, Endpoint::principal(a)),
                _ => Err(ReadbackError::Malformed {
                    agent: a.0,
                    port: 0,
                }),
            },
            _ => Err(ReadbackError::Malformed {
                agent: a.0,
                port: p,
            }),
        }
    }

    fn subterm(&mut self, a: AgentId) -> Result<Term, ReadbackError> {
        self.visited.insert(a);
        let sym = self.net.symbol_of(a).unwrap();
        let aux = |i| Endpoint::aux(a, i);
        Ok(match sym {
            SymbolId::LAM => {
                let x = self.fresh_name();
                self.names.insert(a, x.clone());
                self.claim(aux(1));
                let body = self.read(aux(2))?;
                Term::Abs(x, Type::Nat, Box::new(body))
            }
            SymbolId::APP => Term::App(Box::new(self.read(aux(1))?), Box::new(self.read(aux(2))?)),
            SymbolId::TRUE => Term::True,
            SymbolId::FALSE => Term::False,
            SymbolId::ZERO => Term::Zero,
            SymbolId::NIL => Term::Nil,
            SymbolId::SUC => Term::Suc(Box::new(self.read(aux(1))?)),
            SymbolId::CONS => {
                Term::Cons(Box::new(self.read(aux(1))?), Box::new(self.read(aux(2))?))
            }
            _ => match self.table.by_symbol(sym) {
                Some(d) if d.syntactic == sym => {
                    let d = d.clone();
                    let mut args = Vec::with_capacity(d.fv.len());
                    for k in 0..d.fv.len() {
                        args.push(self.read(aux(2 + k))?);
                    }
                    let scrutinee = self.read(aux(1))?;
                    rebuild(&d, &args, scrutinee)
                }
                _ => {
                    return Err(ReadbackError::Malformed {
                        agent: a.0,
                        port: 0,
                    })
                }
            },
        })
    }
}

/// The iterator of `d` with its fv ports filled by `args`, substituted
/// simultaneously, over `scrutinee`.
fn rebuild(d: &IteratorDescriptor, args: &[Term], scrutinee: Term) -> Term {
    let mut t = blind(&d.term);
    for (k, v) in d.fv.iter().enumerate() {
        t = subst(&t, v, &Term::Var(format!("#fv{k}")));
    }
    for (k, a) in args.iter().enumerate() {
        t = subst(&t, &format!("#fv{k}"), a);
    }
    subst(&t, "#scrutinee", &scrutinee)
}
