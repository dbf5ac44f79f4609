//! The base interaction system and the per-program systems with one symbol
//! pair per iterator occurrence.

use std::collections::HashMap;
use std::fmt;

use crate::lang::{alpha_eq, iterator_count, param_free_vars, subst, Term};
use crate::net::{
    Endpoint, InteractionSystem, Net, RuleTemplate, SymbolId, SymbolKind, SystemError,
};
use crate::translate::{Builder, RecSpec, Resolve, TranslateError, HEAD, REC, TAIL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IterKind {
    Bool,
    Nat,
    List,
}

impl IterKind {
    pub fn of(t: &Term) -> Option<IterKind> {
        match t {
            Term::IterBool { .. } => Some(IterKind::Bool),
            Term::IterNat { .. } => Some(IterKind::Nat),
            Term::IterList { .. } => Some(IterKind::List),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            IterKind::Bool => "bool",
            IterKind::Nat => "nat",
            IterKind::List => "list",
        }
    }
}

impl fmt::Display for IterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One iterator occurrence and the symbols generated for it.
#[derive(Clone, Debug)]
pub struct IteratorDescriptor {
    /// Preorder position among the program's iterator occurrences.
    pub index: usize,
    pub kind: IterKind,
    /// The occurrence as written. Its scrutinee is not used by the rules.
    pub term: Term,
    /// Free variables of the parameters: the order of the fv ports.
    pub fv: Vec<String>,
    pub syntactic: SymbolId,
    pub computation: SymbolId,
}

impl IteratorDescriptor {
    /// Arity of both symbols: the scrutinee or root, then the fv ports.
    pub fn arity(&self) -> usize {
        1 + self.fv.len()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    descriptors: Vec<IteratorDescriptor>,
    by_symbol: HashMap<SymbolId, usize>,
}

impl SymbolTable {
    pub fn descriptors(&self) -> &[IteratorDescriptor] {
        &self.descriptors
    }

    pub fn get(&self, index: usize) -> Option<&IteratorDescriptor> {
        self.descriptors.get(index)
    }

    /// The descriptor owning `symbol`, syntactic or computation.
    pub fn by_symbol(&self, symbol: SymbolId) -> Option<&IteratorDescriptor> {
        self.by_symbol.get(&symbol).map(|&i| &self.descriptors[i])
    }

    /// First descriptor whose parameters are α-equal to those of `t`.
    pub fn by_params(&self, t: &Term) -> Option<&IteratorDescriptor> {
        let key = blind(t);
        self.descriptors
            .iter()
            .find(|d| alpha_eq(&blind(&d.term), &key))
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}

/// `t` with its scrutinee replaced by a placeholder.
pub(crate) fn blind(t: &Term) -> Term {
    let hole = Box::new(Term::var("#scrutinee"));
    match t.clone() {
        Term::IterBool {
            on_true, on_false, ..
        } => Term::IterBool {
            on_true,
            on_false,
            scrutinee: hole,
        },
        Term::IterNat {
            binder, step, zero, ..
        } => Term::IterNat {
            binder,
            step,
            zero,
            scrutinee: hole,
        },
        Term::IterList {
            head,
            acc,
            step,
            nil,
            ..
        } => Term::IterList {
            head,
            acc,
            step,
            nil,
            scrutinee: hole,
        },
        other => other,
    }
}

const CONSTRUCTORS: [SymbolId; 6] = [
    SymbolId::TRUE,
    SymbolId::FALSE,
    SymbolId::ZERO,
    SymbolId::SUC,
    SymbolId::NIL,
    SymbolId::CONS,
];

/// The fixed system: token, application, abstraction, constructors and the
/// copy/erase machinery.
pub fn base_system() -> InteractionSystem {
    use SymbolKind as K;
    let mut sys = InteractionSystem::new();
    let decls: [(&str, &str, usize, SymbolKind); 13] = [
        ("tok", "⇓", 1, K::Token),
        ("app", "@", 2, K::SyntacticApp),
        ("app^", "@̂", 2, K::ComputationApp),
        ("lam", "λ", 2, K::Lambda),
        ("true", "true", 0, K::Constructor),
        ("false", "false", 0, K::Constructor),
        ("zero", "0", 0, K::Constructor),
        ("suc", "suc", 1, K::Constructor),
        ("nil", "nil", 0, K::Constructor),
        ("cons", "cons", 2, K::Constructor),
        ("c", "c", 2, K::Copy),
        ("d", "δ", 2, K::Duplicator),
        ("e", "ε", 0, K::Eraser),
    ];
    for (name, display, arity, kind) in decls {
        sys.add_symbol(name, display, arity, kind);
    }

    let mut rules = vec![token_app(), token_lambda(&sys), beta()];
    for k in CONSTRUCTORS {
        rules.push(token_value(&sys, k));
    }
    for a in 0..13 {
        rules.push(erase(&sys, SymbolId(a)));
    }
    for a in [SymbolId::LAM, SymbolId::APP]
        .into_iter()
        .chain(CONSTRUCTORS)
    {
        rules.push(duplicate(&sys, SymbolId::COPY, a));
        rules.push(duplicate(&sys, SymbolId::DUP, a));
    }
    rules.push(commute());
    rules.push(annihilate());
    for r in rules {
        sys.add_rule(r).expect("base rules are well formed");
    }
    sys
}

fn holes(net: &mut Net, n: usize) -> Vec<Endpoint> {
    (0..n).map(|_| net.add_free()).collect()
}

fn rule(a: SymbolId, b: SymbolId, label: &str, replacement: Net) -> RuleTemplate {
    RuleTemplate {
        left: (a, b),
        label: label.to_string(),
        replacement,
    }
}

/// ⇓ ⋈ @: the application turns into @̂ and the token moves to the function.
fn token_app() -> RuleTemplate {
    let mut net = Net::new();
    let h = holes(&mut net, 3);
    let capp = net.add_agent(SymbolId::CAPP, 2);
    let tok = net.add_agent(SymbolId::TOKEN, 1);
    net.link(Endpoint::aux(capp, 1), h[0]);
    net.link(Endpoint::aux(capp, 2), h[2]);
    net.link(Endpoint::principal(tok), h[1]);
    net.link(Endpoint::aux(tok, 1), Endpoint::principal(capp));
    rule(SymbolId::TOKEN, SymbolId::APP, "token-app", net)
}

/// ⇓ ⋈ k for a value k: the token is absorbed and k is re-emitted.
fn token_value(sys: &InteractionSystem, k: SymbolId) -> RuleTemplate {
    let arity = sys.arity(k);
    let mut net = Net::new();
    let h = holes(&mut net, 1 + arity);
    let v = net.add_agent(k, arity);
    net.link(Endpoint::principal(v), h[0]);
    for (i, &hole) in h.iter().enumerate().skip(1) {
        net.link(Endpoint::aux(v, i), hole);
    }
    let label = format!("token-{}", sys.name(k));
    rule(SymbolId::TOKEN, k, &label, net)
}

fn token_lambda(sys: &InteractionSystem) -> RuleTemplate {
    token_value(sys, SymbolId::LAM)
}

/// @̂ ⋈ λ: the argument meets the binder and a token starts on the body.
fn beta() -> RuleTemplate {
    let mut net = Net::new();
    let h = holes(&mut net, 4);
    net.link(h[1], h[2]);
    let tok = net.add_agent(SymbolId::TOKEN, 1);
    net.link(Endpoint::principal(tok), h[3]);
    net.link(Endpoint::aux(tok, 1), h[0]);
    rule(SymbolId::CAPP, SymbolId::LAM, "beta", net)
}

/// ε ⋈ α: one eraser per auxiliary port of α.
fn erase(sys: &InteractionSystem, a: SymbolId) -> RuleTemplate {
    let arity = sys.arity(a);
    let mut net = Net::new();
    for h in holes(&mut net, arity) {
        let e = net.add_agent(SymbolId::ERASE, 0);
        net.link(Endpoint::principal(e), h);
    }
    let label = format!("erase-{}", sys.name(a));
    rule(SymbolId::ERASE, a, &label, net)
}

/// c ⋈ α or δ ⋈ α: two copies of α and a duplicator on every aux wire.
fn duplicate(sys: &InteractionSystem, copier: SymbolId, a: SymbolId) -> RuleTemplate {
    let arity = sys.arity(a);
    let mut net = Net::new();
    let h = holes(&mut net, 2 + arity);
    let left = net.add_agent(a, arity);
    let right = net.add_agent(a, arity);
    net.link(Endpoint::principal(left), h[0]);
    net.link(Endpoint::principal(right), h[1]);
    for i in 1..=arity {
        let d = net.add_agent(SymbolId::DUP, 2);
        net.link(Endpoint::principal(d), h[1 + i]);
        net.link(Endpoint::aux(d, 1), Endpoint::aux(left, i));
        net.link(Endpoint::aux(d, 2), Endpoint::aux(right, i));
    }
    let label = format!("{}-{}", sys.name(copier), sys.name(a));
    rule(copier, a, &label, net)
}

/// δ ⋈ c: the two pass through each other.
fn commute() -> RuleTemplate {
    let mut net = Net::new();
    let h = holes(&mut net, 4);
    let c1 = net.add_agent(SymbolId::COPY, 2);
    let c2 = net.add_agent(SymbolId::COPY, 2);
    let d1 = net.add_agent(SymbolId::DUP, 2);
    let d2 = net.add_agent(SymbolId::DUP, 2);
    net.link(Endpoint::principal(c1), h[0]);
    net.link(Endpoint::principal(c2), h[1]);
    net.link(Endpoint::principal(d1), h[2]);
    net.link(Endpoint::principal(d2), h[3]);
    net.link(Endpoint::aux(c1, 1), Endpoint::aux(d1, 1));
    net.link(Endpoint::aux(c1, 2), Endpoint::aux(d2, 1));
    net.link(Endpoint::aux(c2, 1), Endpoint::aux(d1, 2));
    net.link(Endpoint::aux(c2, 2), Endpoint::aux(d2, 2));
    rule(SymbolId::DUP, SymbolId::COPY, "d-c", net)
}

/// δ ⋈ δ: annihilation.
fn annihilate() -> RuleTemplate {
    let mut net = Net::new();
    let h = holes(&mut net, 4);
    net.link(h[0], h[2]);
    net.link(h[1], h[3]);
    rule(SymbolId::DUP, SymbolId::DUP, "d-d", net)
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

/// The system for `t`: the base rules plus, for every iterator occurrence
/// in preorder, a fresh symbol pair and its rules.
pub fn gen_system(t: &Term) -> Result<(InteractionSystem, SymbolTable), GenError> {
    let mut sys = base_system();
    let mut table = SymbolTable::default();
    register(t, &mut sys, &mut table);
    for d in table.descriptors.clone() {
        for r in iterator_rules(&d, &table)? {
            sys.add_rule(r)?;
        }
    }
    Ok((sys, table))
}

fn register(t: &Term, sys: &mut InteractionSystem, table: &mut SymbolTable) {
    if let Some(kind) = IterKind::of(t) {
        let index = table.descriptors.len();
        let fv = param_free_vars(t);
        let arity = 1 + fv.len();
        let syntactic = sys.add_symbol(
            &format!("It_{kind}_{index}"),
            &format!("It_{kind}_{index}"),
            arity,
            SymbolKind::IteratorSyntactic,
        );
        let computation = sys.add_symbol(
            &format!("ItC_{kind}_{index}"),
            &format!("Ît_{kind}_{index}"),
            arity,
            SymbolKind::IteratorComputation,
        );
        table.by_symbol.insert(syntactic, index);
        table.by_symbol.insert(computation, index);
        table.descriptors.push(IteratorDescriptor {
            index,
            kind,
            term: t.clone(),
            fv,
            syntactic,
            computation,
        });
    }
    for c in crate::lang::children_of(t) {
        register(c, sys, table);
    }
}

/// The rules of one iterator occurrence: the token rule, one rule per
/// constructor of the iterated type, and erase/copy rows.
pub fn iterator_rules(
    d: &IteratorDescriptor,
    table: &SymbolTable,
) -> Result<Vec<RuleTemplate>, TranslateError> {
    let (syn, comp) = (d.syntactic, d.computation);
    let k = d.fv.len();
    let mut rules = Vec::new();

    // ⇓ ⋈ It: becomes Ît, the token descends into the scrutinee.
    let mut net = Net::new();
    let h = holes(&mut net, 2 + k);
    let it = net.add_agent(comp, 1 + k);
    let tok = net.add_agent(SymbolId::TOKEN, 1);
    net.link(Endpoint::aux(it, 1), h[0]);
    for j in 0..k {
        net.link(Endpoint::aux(it, 2 + j), h[2 + j]);
    }
    net.link(Endpoint::principal(tok), h[1]);
    net.link(Endpoint::aux(tok, 1), Endpoint::principal(it));
    rules.push(rule(
        SymbolId::TOKEN,
        syn,
        &format!("token-It{}", d.index),
        net,
    ));

    let n = d.index;
    let case = |ctor: SymbolId, body: &Term, offset: usize, args: &[&str]| {
        case_rule(d, table, ctor, body, offset, args)
    };
    match &d.term {
        Term::IterBool {
            on_true, on_false, ..
        } => {
            rules.push(case(SymbolId::TRUE, on_true, n + 1, &[])?);
            let off = n + 1 + iterator_count(on_true);
            rules.push(case(SymbolId::FALSE, on_false, off, &[])?);
        }
        Term::IterNat {
            binder, step, zero, ..
        } => {
            let off = n + 1 + iterator_count(step);
            rules.push(case(SymbolId::ZERO, zero, off, &[])?);
            let s = subst(step, binder, &Term::var(REC));
            rules.push(case(SymbolId::SUC, &s, n + 1, &[TAIL])?);
        }
        Term::IterList {
            head,
            acc,
            step,
            nil,
            ..
        } => {
            let off = n + 1 + iterator_count(step);
            rules.push(case(SymbolId::NIL, nil, off, &[])?);
            let c = subst(&subst(step, acc, &Term::var(REC)), head, &Term::var(HEAD));
            rules.push(case(SymbolId::CONS, &c, n + 1, &[HEAD, TAIL])?);
        }
        _ => unreachable!("descriptors only hold iterators"),
    }

    for sym in [syn, comp] {
        let mut net = Net::new();
        for h in holes(&mut net, 1 + k) {
            let e = net.add_agent(SymbolId::ERASE, 0);
            net.link(Endpoint::principal(e), h);
        }
        rules.push(rule(SymbolId::ERASE, sym, &format!("erase-It{n}"), net));
    }
    for copier in [SymbolId::COPY, SymbolId::DUP] {
        let mut net = Net::new();
        let h = holes(&mut net, 3 + k);
        let left = net.add_agent(syn, 1 + k);
        let right = net.add_agent(syn, 1 + k);
        net.link(Endpoint::principal(left), h[0]);
        net.link(Endpoint::principal(right), h[1]);
        for i in 1..=1 + k {
            let dup = net.add_agent(SymbolId::DUP, 2);
            net.link(Endpoint::principal(dup), h[1 + i]);
            net.link(Endpoint::aux(dup, 1), Endpoint::aux(left, i));
            net.link(Endpoint::aux(dup, 2), Endpoint::aux(right, i));
        }
        rules.push(rule(copier, syn, &format!("copy-It{n}"), net));
    }
    Ok(rules)
}

/// Ît ⋈ ctor → ⇓T⟦body⟧. Holes: the root, the fv ports, then the
/// constructor's arguments, bound to the pseudo-variables in `args`.
fn case_rule(
    d: &IteratorDescriptor,
    table: &SymbolTable,
    ctor: SymbolId,
    body: &Term,
    offset: usize,
    args: &[&str],
) -> Result<RuleTemplate, TranslateError> {
    let rec = RecSpec {
        symbol: d.syntactic,
        fv: d.fv.clone(),
    };
    let mut b = Builder::new(table, Resolve::Preorder(offset)).with_rec(rec);
    let h = holes(&mut b.net, 1 + d.fv.len() + args.len());
    let tok = b.net.add_agent(SymbolId::TOKEN, 1);
    b.net.link(Endpoint::aux(tok, 1), h[0]);
    b.term(body, Endpoint::principal(tok))?;
    for (j, v) in d.fv.iter().enumerate() {
        let shadow = format!("#fv:{v}");
        b.bind(&[v.as_str(), shadow.as_str()], 0, h[1 + j]);
    }
    for (j, a) in args.iter().enumerate() {
        b.bind(&[a], 0, h[1 + d.fv.len() + j]);
    }
    let net = b.finish()?;
    let label = format!("It{}-{}", d.index, ctor_name(ctor));
    Ok(rule(d.computation, ctor, &label, net))
}

fn ctor_name(k: SymbolId) -> &'static str {
    match k {
        SymbolId::TRUE => "true",
        SymbolId::FALSE => "false",
        SymbolId::ZERO => "zero",
        SymbolId::SUC => "suc",
        SymbolId::NIL => "nil",
        _ => "cons",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn gen(src: &str) -> (InteractionSystem, SymbolTable) {
        gen_system(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn base_rule_shapes() {
        let sys = base_system();
        let r1 = sys.rule(SymbolId::TOKEN, SymbolId::APP).unwrap();
        assert_eq!(r1.replacement.interface_len(), 2 + 1);
        assert_eq!(r1.replacement.agent_count(), 2);
        assert_eq!(r1.replacement.count_symbol(SymbolId::CAPP), 1);
        let r2 = sys.rule(SymbolId::TOKEN, SymbolId::LAM).unwrap();
        assert_eq!(r2.replacement.agent_count(), 1);
        assert_eq!(r2.replacement.count_symbol(SymbolId::LAM), 1);
        assert!(sys.rule(SymbolId::COPY, SymbolId::TOKEN).is_none());
        assert!(sys.rule(SymbolId::COPY, SymbolId::COPY).is_none());
        assert!(sys.rule(SymbolId::ERASE, SymbolId::ERASE).is_some());
    }

    #[test]
    fn closed_terms_without_iterators_add_nothing() {
        let (sys, table) = gen("\\x:nat. x");
        assert!(table.is_empty());
        assert_eq!(sys.symbols().len(), 13);
        assert_eq!(sys.rules().len(), base_system().rules().len());
    }

    #[test]
    fn one_iterator_gives_one_pair_and_three_evaluation_rules() {
        let (sys, table) = gen("iternat <\\x. suc x> <0> 0");
        assert_eq!(table.len(), 1);
        let d = &table.descriptors()[0];
        assert_eq!(sys.name(d.syntactic), "It_nat_0");
        assert_eq!(sys.name(d.computation), "ItC_nat_0");
        let own = |s: SymbolId| {
            sys.rules()
                .iter()
                .filter(|r| r.left.0 == s || r.left.1 == s)
                .filter(|r| !matches!(r.left.0, SymbolId::ERASE | SymbolId::COPY | SymbolId::DUP))
                .count()
        };
        assert_eq!(own(d.syntactic) + own(d.computation), 3);
    }

    #[test]
    fn each_occurrence_gets_its_own_symbols() {
        let e = "(iternat <\\x. suc x> <0> 0)";
        let (sys, table) = gen(&format!("(\\a:nat. \\b:nat. a) {e} {e}"));
        assert_eq!(table.len(), 2);
        let names: Vec<_> = table
            .descriptors()
            .iter()
            .map(|d| sys.name(d.syntactic))
            .collect();
        assert_eq!(names, ["It_nat_0", "It_nat_1"]);
    }

    #[test]
    fn arities_follow_parameter_free_variables() {
        let (sys, table) =
            gen("\\a:nat. \\l:list nat. iterlist <\\x y. cons a (cons x y)> <cons a nil> l");
        let d = &table.descriptors()[0];
        assert_eq!(d.fv, ["a"]);
        assert_eq!(sys.arity(d.syntactic), 2);
        assert_eq!(sys.arity(d.computation), 2);
    }

    #[test]
    fn case_rule_contents() {
        let (sys, table) = gen("iterbool <0> <0> true");
        let d = &table.descriptors()[0];
        let r = sys.rule(d.computation, SymbolId::TRUE).unwrap();
        assert_eq!(r.replacement.agent_count(), 2);
        assert_eq!(r.replacement.count_symbol(SymbolId::TOKEN), 1);
        assert_eq!(r.replacement.count_symbol(SymbolId::ZERO), 1);

        let (sys, table) = gen("iterlist <\\x y. cons x y> <nil> nil");
        let d = &table.descriptors()[0];
        let r = &sys.rule(d.computation, SymbolId::CONS).unwrap().replacement;
        assert_eq!(r.count_symbol(SymbolId::TOKEN), 1);
        assert_eq!(r.count_symbol(SymbolId::CONS), 1);
        assert_eq!(r.count_symbol(d.syntactic), 1);
        assert_eq!(r.count_symbol(SymbolId::COPY), 0);
    }

    #[test]
    fn shared_free_variable_is_fanned() {
        // a is used by the step and by the reintroduced iterator.
        let (sys, table) = gen("\\a:nat. \\n:nat. iternat <\\x. cons a x> <nil> n");
        let d = &table.descriptors()[0];
        let r = &sys.rule(d.computation, SymbolId::SUC).unwrap().replacement;
        assert_eq!(r.count_symbol(SymbolId::COPY), 1);
        assert_eq!(r.count_symbol(d.syntactic), 1);
        // Without the recursive call nothing needs sharing.
        let (sys, table) = gen("\\a:nat. \\n:nat. iternat <\\x. suc a> <0> n");
        let d = &table.descriptors()[0];
        let r = &sys.rule(d.computation, SymbolId::SUC).unwrap().replacement;
        assert_eq!(r.count_symbol(SymbolId::COPY), 0);
        assert_eq!(r.count_symbol(SymbolId::ERASE), 1);
    }

    #[test]
    fn every_template_validates_and_pairs_are_unique() {
        let (sys, _) = gen(
            "\\f:nat -> nat. \\l:list nat. iterlist <\\x y. cons (f x) (iternat <\\z. suc z> <y> x)> <nil> l",
        );
        let mut seen = std::collections::HashSet::new();
        for r in sys.rules() {
            let (a, b) = r.left;
            assert!(seen.insert(if a <= b { (a, b) } else { (b, a) }));
            assert!(r.replacement.validate(&sys).is_empty(), "{}", r.label);
        }
    }
}
