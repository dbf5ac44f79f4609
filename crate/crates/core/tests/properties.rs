//! Randomised invariants over generated well-typed programs.
//!
//! Programs are built from a byte string that drives every choice, so
//! proptest shrinks counterexamples by shrinking the bytes.

use iternet::engine::{reduce, reduce_with, Strategy as Schedule};
use iternet::lang::{alpha_eq, free_vars, parse, subst, typecheck, Term, Type};
use iternet::net::{active_pairs, apply_rule, net_iso, Net, NetDoc, PortRef, SymbolId};
use iternet::oracle::{self, EvalError};
use iternet::program::Program;
use iternet::translate::readback_typed;
use proptest::prelude::*;

const NAMES: [&str; 4] = ["x", "y", "z", "w"];

struct Gen<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Gen<'_> {
    /// A choice in `0..n`; 0 once the bytes run out.
    fn pick(&mut self, n: usize) -> usize {
        let b = self.bytes.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b as usize % n
    }

    fn name(&mut self) -> String {
        NAMES[self.pick(NAMES.len())].to_string()
    }

    fn small_type(&mut self) -> Type {
        [Type::Nat, Type::Bool][self.pick(2)].clone()
    }

    /// Visible variables of type `ty`, innermost first.
    fn candidates(env: &[(String, Type)], ty: &Type) -> Vec<String> {
        let mut seen = Vec::new();
        let mut out = Vec::new();
        for (x, t) in env.iter().rev() {
            if seen.contains(x) {
                continue;
            }
            seen.push(x.clone());
            if t == ty {
                out.push(x.clone());
            }
        }
        out
    }

    fn simple(&mut self, ty: &Type, env: &mut Vec<(String, Type)>) -> Term {
        let vars = Self::candidates(env, ty);
        if !vars.is_empty() && self.pick(2) == 1 {
            return Term::var(&vars[self.pick(vars.len())]);
        }
        match ty {
            Type::Bool => [Term::True, Term::False][self.pick(2)].clone(),
            Type::Nat => Term::numeral(self.pick(3)),
            Type::List(_) => Term::Nil,
            Type::Arrow(a, b) => {
                let x = self.name();
                env.push((x.clone(), (**a).clone()));
                let body = self.simple(b, env);
                env.pop();
                Term::abs(&x, (**a).clone(), body)
            }
        }
    }

    fn term(&mut self, ty: &Type, env: &mut Vec<(String, Type)>, depth: usize) -> Term {
        if depth == 0 || self.pos >= self.bytes.len() {
            return self.simple(ty, env);
        }
        let d = depth - 1;
        match self.pick(6) {
            0 => self.simple(ty, env),
            1 => match ty {
                Type::Bool | Type::Nat if self.pick(2) == 0 => self.simple(ty, env),
                Type::Bool => self.term(ty, env, d),
                Type::Nat => Term::suc(self.term(ty, env, d)),
                Type::List(elem) => {
                    if self.pick(3) == 0 {
                        Term::Nil
                    } else {
                        Term::cons(self.term(elem, env, d), self.term(ty, env, d))
                    }
                }
                Type::Arrow(a, b) => {
                    let x = self.name();
                    env.push((x.clone(), (**a).clone()));
                    let body = self.term(b, env, d);
                    env.pop();
                    Term::abs(&x, (**a).clone(), body)
                }
            },
            2 => {
                let a = self.small_type();
                let f = self.term(&Type::arrow(a.clone(), ty.clone()), env, d);
                Term::app(f, self.term(&a, env, d))
            }
            3 => {
                let on_true = self.term(ty, env, d);
                let on_false = self.term(ty, env, d);
                Term::iter_bool(on_true, on_false, self.term(&Type::Bool, env, d))
            }
            4 => {
                let x = self.name();
                env.push((x.clone(), ty.clone()));
                let step = self.term(ty, env, d);
                env.pop();
                let zero = self.term(ty, env, d);
                Term::iter_nat(&x, step, zero, self.term(&Type::Nat, env, d))
            }
            _ => {
                let elem = self.small_type();
                let (h, mut r) = (self.name(), self.name());
                if r == h {
                    r = format!("{h}1");
                }
                env.push((h.clone(), elem.clone()));
                env.push((r.clone(), ty.clone()));
                let step = self.term(ty, env, d);
                env.truncate(env.len() - 2);
                let nil = self.term(ty, env, d);
                Term::iter_list(&h, &r, step, nil, self.term(&Type::list(elem), env, d))
            }
        }
    }
}

fn program_type(k: u8) -> Type {
    match k % 5 {
        0 => Type::Nat,
        1 => Type::Bool,
        2 => Type::list(Type::Nat),
        3 => Type::arrow(Type::Nat, Type::Nat),
        _ => Type::list(Type::Bool),
    }
}

fn arb_program() -> impl Strategy<Value = (Term, Type)> {
    (any::<u8>(), prop::collection::vec(any::<u8>(), 0..64)).prop_map(|(k, bytes)| {
        let ty = program_type(k);
        let t = Gen {
            bytes: &bytes,
            pos: 0,
        }
        .term(&ty, &mut Vec::new(), 4);
        (t, ty)
    })
}

const FUEL: u64 = 200_000;

/// Programs whose reference evaluation fits the fuel budget.
fn evaluable(t: &Term) -> bool {
    !matches!(oracle::deep_eval(t, FUEL), Err(EvalError::FuelExhausted(_)))
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn generated_programs_have_their_type((t, ty) in arb_program()) {
        // A bare `nil` defaults its element type, so pin the type with an
        // annotated identity.
        prop_assert!(typecheck(&t).is_ok());
        let pinned = Term::app(Term::abs("v", ty.clone(), Term::var("v")), t.clone());
        prop_assert_eq!(typecheck(&pinned), Ok(ty));
        prop_assert!(free_vars(&t).is_empty());
    }

    #[test]
    fn printing_then_parsing_is_the_identity((t, _) in arb_program()) {
        let printed = t.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), t, "{}", printed);
    }

    #[test]
    fn substituting_a_variable_for_itself_changes_nothing((t, _) in arb_program(), x in 0..4usize) {
        let x = NAMES[x];
        prop_assert!(alpha_eq(&subst(&t, x, &Term::var(x)), &t));
    }

    #[test]
    fn substitution_removes_the_variable((t, ty) in arb_program()) {
        // Open the program up by stripping one λ, then close it again.
        if let Term::Abs(v, _, body) = &t {
            let closed = subst(body, v, &Term::numeral(1));
            prop_assert!(!free_vars(&closed).contains(v));
            if let Type::Arrow(a, b) = &ty {
                if **a == Type::Nat {
                    prop_assert_eq!(typecheck(&closed), Ok((**b).clone()));
                }
            }
        }
    }

    #[test]
    fn translation_reads_back_to_the_source((t, ty) in arb_program()) {
        let p = Program::new(t.clone()).unwrap();
        let net = p.net().unwrap();
        prop_assert!(active_pairs(&net).is_empty());
        prop_assert_eq!(active_pairs(&p.initial().unwrap()).len(), 1);
        let back = readback_typed(&net, &p.system, &p.table, Some(&ty)).unwrap();
        prop_assert!(alpha_eq(&back, &t), "{} read back as {}", t, back);
    }

    #[test]
    fn net_agrees_with_the_reference_evaluator((t, ty) in arb_program(), seed in any::<u64>()) {
        prop_assume!(evaluable(&t));
        let p = Program::new(t).unwrap();
        let weak = p.check_weak(Schedule::Random(seed), FUEL * 10).unwrap();
        prop_assert!(weak.agree, "{} vs {}", weak.net_result, weak.oracle_result);
        prop_assert!(weak.max_tokens <= 1);
        if ty.is_first_order() {
            let deep = p.check_deep(Schedule::Random(seed), FUEL * 10).unwrap();
            prop_assert!(deep.agree, "{} vs {}", deep.net_result, deep.oracle_result);
        }
    }

    #[test]
    fn step_counts_and_normal_forms_ignore_the_strategy((t, _) in arb_program(), seed in any::<u64>()) {
        prop_assume!(evaluable(&t));
        let p = Program::new(t).unwrap();
        let run = |s| reduce(p.initial().unwrap(), &p.system, s, FUEL * 10).unwrap().0;
        let fifo = run(Schedule::Fifo);
        for s in [Schedule::Lifo, Schedule::Random(seed)] {
            let other = run(s);
            prop_assert_eq!(other.steps, fifo.steps);
            prop_assert_eq!(&other.per_rule, &fifo.per_rule);
            prop_assert!(net_iso(&other.net, &fifo.net));
        }
    }

    #[test]
    fn every_step_keeps_the_net_valid((t, _) in arb_program()) {
        prop_assume!(evaluable(&t));
        let p = Program::new(t).unwrap();
        let mut defects = Vec::new();
        let mut wires = Vec::new();
        reduce_with(p.initial().unwrap(), &p.system, Schedule::Lifo, FUEL * 10, |_, net| {
            defects.extend(net.validate(&p.system));
            wires.push((net.wire_count(), net.interface_len()));
        }).unwrap();
        prop_assert!(defects.is_empty(), "{:?}", defects);
        prop_assert!(wires.iter().all(|&(_, i)| i == 1));
    }

    #[test]
    fn disjoint_pairs_commute((t, _) in arb_program()) {
        prop_assume!(evaluable(&t));
        let p = Program::new(t).unwrap();
        let mut checked = 0;
        let mut failures = 0;
        reduce_with(p.initial().unwrap(), &p.system, Schedule::Fifo, FUEL * 10, |_, net| {
            let pairs = active_pairs(net);
            if checked >= 8 || pairs.len() < 2 {
                return;
            }
            checked += 1;
            let (a, b) = (pairs[0], pairs[pairs.len() - 1]);
            let mut ab = net.clone();
            apply_rule(&mut ab, a, &p.system).unwrap();
            apply_rule(&mut ab, b, &p.system).unwrap();
            let mut ba = net.clone();
            apply_rule(&mut ba, b, &p.system).unwrap();
            apply_rule(&mut ba, a, &p.system).unwrap();
            if !net_iso(&ab, &ba) {
                failures += 1;
            }
        }).unwrap();
        prop_assert_eq!(failures, 0);
    }

    #[test]
    fn net_json_round_trips((t, _) in arb_program(), token in any::<bool>()) {
        let p = Program::new(t).unwrap();
        let net = if token { p.initial().unwrap() } else { p.net().unwrap() };
        let json = net.to_json(&p.system);
        let back = Net::from_json(&json, &p.system).unwrap();
        prop_assert_eq!(back.to_json(&p.system), json);
        prop_assert!(net_iso(&back, &net));
    }

    #[test]
    fn isomorphism_ignores_agent_numbering((t, _) in arb_program(), shift in 1u32..1000) {
        let p = Program::new(t).unwrap();
        let net = p.initial().unwrap();
        let mut doc: NetDoc = serde_json::from_str(&net.to_json(&p.system)).unwrap();
        let top = doc.agents.iter().map(|a| a.id).max().unwrap();
        // Reverse the numbering and move it out of the original range.
        let remap = |id: u32| shift + (top - id);
        for a in &mut doc.agents {
            a.id = remap(a.id);
        }
        let fix = |r: &mut PortRef| {
            if let PortRef::Agent(id, _) = r {
                *id = remap(*id);
            }
        };
        for w in &mut doc.wires {
            w.iter_mut().for_each(fix);
        }
        doc.interface.iter_mut().for_each(fix);
        let renamed = Net::from_doc(&doc, &p.system).unwrap();
        prop_assert!(net_iso(&renamed, &net));
        prop_assert_eq!(renamed.count_symbol(SymbolId::TOKEN), 1);
    }
}
