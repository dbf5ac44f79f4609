//! Reduction to normal form under a chosen scheduling strategy.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Term;
use crate::net::{
    active_pairs, apply_rule, ActivePair, AgentId, Endpoint, Fired, InteractionSystem, Net,
    NetError, SymbolId, SymbolKind,
};
use crate::system::SymbolTable;
use crate::translate::{attach_token, readback_typed, translate, ReadbackError, TranslateError};

/// Default interaction budget.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Which active pair fires next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Oldest pair first.
    #[default]
    Fifo,
    /// Newest pair first.
    Lifo,
    /// Uniformly at random, reproducible from the seed.
    Random(u64),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Fifo => f.write_str("fifo"),
            Strategy::Lifo => f.write_str("lifo"),
            Strategy::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    /// `fifo`, `lifo`, `random` (seed 0) or `random:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(Strategy::Fifo),
            "lifo" => Ok(Strategy::Lifo),
            "random" => Ok(Strategy::Random(0)),
            _ => s
                .strip_prefix("random:")
                .and_then(|n| n.parse().ok())
                .map(Strategy::Random)
                .ok_or_else(|| format!("unknown strategy `{s}` (fifo, lifo, random)")),
        }
    }
}

/// One fired interaction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// 1-based, contiguous.
    pub step: u64,
    /// Symbol names, in rule order.
    pub rule: [String; 2],
    pub consumed: [u32; 2],
    pub created: Vec<u32>,
}

impl TraceEvent {
    pub fn new(step: u64, fired: &Fired, system: &InteractionSystem) -> Self {
        TraceEvent {
            step,
            rule: [
                system.name(fired.rule.0).to_string(),
                system.name(fired.rule.1).to_string(),
            ],
            consumed: [fired.consumed[0].0, fired.consumed[1].0],
            created: fired.created.iter().map(|a| a.0).collect(),
        }
    }

    /// One line of the trace file, without the newline.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events serialise")
    }

    pub fn rule_key(&self) -> String {
        format!("{}><{}", self.rule[0], self.rule[1])
    }
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub net: Net,
    pub steps: u64,
    /// Steps per rule, keyed `a><b`.
    pub per_rule: BTreeMap<String, u64>,
    /// Steps involving ⇓, @̂ or a computation iterator.
    pub evaluation_steps: u64,
    pub management_steps: u64,
    pub fuel_exhausted: bool,
    /// Most ⇓ agents present at once, initial net included.
    pub max_tokens: usize,
}

impl ReductionReport {
    /// Statistics as one JSON object, keys in a fixed order.
    pub fn stats_json(&self) -> String {
        serde_json::json!({
            "steps": self.steps,
            "evaluation": self.evaluation_steps,
            "management": self.management_steps,
            "fuel_exhausted": self.fuel_exhausted,
            "max_tokens": self.max_tokens,
            "agents": self.net.agent_count(),
            "rules": self.per_rule,
        })
        .to_string()
    }
}

/// Pending active pairs, ordered by strategy.
struct Agenda {
    pairs: VecDeque<ActivePair>,
    strategy: Strategy,
    rng: ChaCha8Rng,
}

impl Agenda {
    fn new(net: &Net, strategy: Strategy) -> Self {
        let seed = match strategy {
            Strategy::Random(s) => s,
            _ => 0,
        };
        Agenda {
            pairs: active_pairs(net).into(),
            strategy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn pop(&mut self) -> Option<ActivePair> {
        match self.strategy {
            Strategy::Fifo => self.pairs.pop_front(),
            Strategy::Lifo => self.pairs.pop_back(),
            Strategy::Random(_) => {
                if self.pairs.is_empty() {
                    return None;
                }
                let i = self.rng.gen_range(0..self.pairs.len());
                self.pairs.swap_remove_back(i)
            }
        }
    }

    fn extend(&mut self, new: &[ActivePair]) {
        self.pairs.extend(new.iter().copied());
    }
}

fn is_evaluation(system: &InteractionSystem, rule: (SymbolId, SymbolId)) -> bool {
    system.kind(rule.0).is_evaluation() || system.kind(rule.1).is_evaluation()
}

/// Reduces until no active pair remains or `fuel` interactions have fired.
pub fn reduce(
    net: Net,
    system: &InteractionSystem,
    strategy: Strategy,
    fuel: u64,
) -> Result<(ReductionReport, Vec<TraceEvent>), NetError> {
    let mut trace = Vec::new();
    let report = reduce_with(net, system, strategy, fuel, |ev, _| trace.push(ev))?;
    Ok((report, trace))
}

/// As `reduce`, handing every event and the net after it to `observe`
/// instead of collecting a trace.
pub fn reduce_with(
    mut net: Net,
    system: &InteractionSystem,
    strategy: Strategy,
    fuel: u64,
    mut observe: impl FnMut(TraceEvent, &Net),
) -> Result<ReductionReport, NetError> {
    let mut agenda = Agenda::new(&net, strategy);
    let mut tokens = net.count_symbol(SymbolId::TOKEN);
    let mut report = ReductionReport {
        net: Net::new(),
        steps: 0,
        per_rule: BTreeMap::new(),
        evaluation_steps: 0,
        management_steps: 0,
        fuel_exhausted: false,
        max_tokens: tokens,
    };
    while !agenda.pairs.is_empty() {
        if report.steps >= fuel {
            report.fuel_exhausted = true;
            break;
        }
        let pair = agenda.pop().expect("agenda is not empty");
        let consumed_tokens = [pair.left, pair.right]
            .iter()
            .filter(|&&a| net.symbol_of(a) == Some(SymbolId::TOKEN))
            .count();
        let fired = apply_rule(&mut net, pair, system)?;
        tokens = tokens - consumed_tokens
            + fired
                .created
                .iter()
                .filter(|&&a| net.symbol_of(a) == Some(SymbolId::TOKEN))
                .count();
        report.max_tokens = report.max_tokens.max(tokens);
        report.steps += 1;
        if is_evaluation(system, fired.rule) {
            report.evaluation_steps += 1;
        } else {
            report.management_steps += 1;
        }
        agenda.extend(&fired.new_pairs);
        let event = TraceEvent::new(report.steps, &fired, system);
        *report.per_rule.entry(event.rule_key()).or_default() += 1;
        observe(event, &net);
    }
    report.net = net;
    Ok(report)
}

/// Reduces only management pairs (copy, duplicate, erase), leaving every
/// evaluation pair in place. Returns the number of interactions.
pub fn quiesce_management(
    net: &mut Net,
    system: &InteractionSystem,
    fuel: u64,
) -> Result<u64, NetError> {
    let mut steps = 0;
    loop {
        let next = active_pairs(net).into_iter().find(|p| {
            let (a, b) = (
                net.symbol_of(p.left).unwrap(),
                net.symbol_of(p.right).unwrap(),
            );
            !is_evaluation(system, (a, b))
        });
        match next {
            Some(p) if steps < fuel => {
                apply_rule(net, p, system)?;
                steps += 1;
            }
            _ => return Ok(steps),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("step {step}: agents {a} and {b} are not an active pair")]
    NotActive { step: u64, a: u32, b: u32 },
    #[error("step {step}: created agents differ from the trace")]
    Diverged { step: u64 },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Re-fires a recorded trace. Agent ids must come out identical.
pub fn replay(
    mut net: Net,
    system: &InteractionSystem,
    trace: &[TraceEvent],
) -> Result<Net, ReplayError> {
    for ev in trace {
        let [a, b] = ev.consumed;
        let pair = ActivePair::new(AgentId(a), AgentId(b));
        let active = matches!(
            net.agent(pair.left).and_then(|x| x.ports[0]),
            Some(Endpoint::Port(other, 0)) if other == pair.right
        );
        if !active {
            return Err(ReplayError::NotActive {
                step: ev.step,
                a,
                b,
            });
        }
        let fired = apply_rule(&mut net, pair, system)?;
        let created: Vec<u32> = fired.created.iter().map(|x| x.0).collect();
        if created != ev.created {
            return Err(ReplayError::Diverged { step: ev.step });
        }
    }
    Ok(net)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("fuel exhausted after {0} interactions")]
    FuelExhausted(u64),
    #[error(transparent)]
    Readback(#[from] ReadbackError),
}

/// Result of `reduce_deep`.
#[derive(Clone, Debug)]
pub struct DeepOutcome {
    pub term: Term,
    pub net: Net,
    pub steps: u64,
    pub rounds: usize,
}

/// Reduces ⇓T⟦t⟧, then keeps placing tokens on the arguments of every
/// `suc` and `cons` reached from the root and reducing again, until the
/// result is a full value. The final net is read back with `ty`.
pub fn reduce_deep(
    t: &Term,
    ty: Option<&crate::lang::Type>,
    system: &InteractionSystem,
    table: &SymbolTable,
    strategy: Strategy,
    fuel: u64,
) -> Result<DeepOutcome, RunError> {
    let mut net = attach_token(translate(t, table)?)?;
    let mut frontier = vec![Endpoint::Free(0)];
    let mut steps = 0;
    let mut rounds = 0;
    while !frontier.is_empty() {
        let report = reduce_with(net, system, strategy, fuel - steps, |_, _| {})?;
        steps += report.steps;
        rounds += 1;
        net = report.net;
        if report.fuel_exhausted {
            return Err(RunError::FuelExhausted(steps));
        }
        let mut next = Vec::new();
        for port in frontier {
            let Some(Endpoint::Port(a, 0)) = net.partner(port) else {
                continue;
            };
            let sym = net.symbol_of(a).unwrap();
            if system.kind(sym) != SymbolKind::Constructor {
                continue;
            }
            for i in 1..=system.arity(sym) {
                let arg = Endpoint::aux(a, i);
                let target = net.partner(arg).expect("validated net");
                let tok = net.add_agent(SymbolId::TOKEN, 1);
                net.link(Endpoint::principal(tok), target);
                net.link(Endpoint::aux(tok, 1), arg);
                next.push(arg);
            }
        }
        frontier = next;
    }
    let term = readback_typed(&net, system, table, ty)?;
    Ok(DeepOutcome {
        term,
        net,
        steps,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{alpha_eq, parse, typecheck};
    use crate::net::net_iso;
    use crate::oracle;
    use crate::system::gen_system;

    fn start(src: &str) -> (Term, InteractionSystem, SymbolTable, Net) {
        let t = parse(src).unwrap();
        let (sys, table) = gen_system(&t).unwrap();
        let net = attach_token(translate(&t, &table).unwrap()).unwrap();
        (t, sys, table, net)
    }

    #[test]
    fn token_on_zero_takes_one_step() {
        let (_, sys, table, net) = start("0");
        let (r, trace) = reduce(net, &sys, Strategy::Fifo, 10).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(trace[0].rule, ["tok", "zero"]);
        let expected = translate(&Term::Zero, &table).unwrap().net;
        assert!(net_iso(&r.net, &expected));
    }

    #[test]
    fn identity_application_hand_trace() {
        let (_, sys, table, net) = start("(\\x:nat. x) 0");
        let (r, trace) = reduce(net, &sys, Strategy::Fifo, 100).unwrap();
        let rules: Vec<_> = trace.iter().map(|e| e.rule_key()).collect();
        assert_eq!(rules, ["tok><app", "tok><lam", "app^><lam", "tok><zero"]);
        assert!(net_iso(
            &r.net,
            &translate(&Term::Zero, &table).unwrap().net
        ));
        assert_eq!(r.evaluation_steps, 4);
        assert_eq!(r.max_tokens, 1);
    }

    #[test]
    fn iterbool_selects_the_false_branch() {
        let (_, sys, table, net) = start("iterbool <0> <suc 0> false");
        let (r, _) = reduce(net, &sys, Strategy::Fifo, 100).unwrap();
        let expected = translate(&Term::numeral(1), &table).unwrap().net;
        assert!(net_iso(&r.net, &expected));
    }

    #[test]
    fn fuel_stops_reduction() {
        let (_, sys, _, net) = start("(\\x:nat. x) 0");
        let (r, trace) = reduce(net, &sys, Strategy::Fifo, 2).unwrap();
        assert!(r.fuel_exhausted);
        assert_eq!(trace.len(), 2);
    }

    #[test]
    fn strategies_agree_on_steps_and_result() {
        let src = "(\\f:nat -> nat. f (f 0)) (\\n:nat. iternat <\\x. suc (suc x)> <n> (suc 0))";
        let (_, sys, _, net) = start(src);
        let (base, _) = reduce(net.clone(), &sys, Strategy::Fifo, DEFAULT_FUEL).unwrap();
        for s in [Strategy::Lifo, Strategy::Random(1), Strategy::Random(99)] {
            let (r, _) = reduce(net.clone(), &sys, s, DEFAULT_FUEL).unwrap();
            assert_eq!(r.steps, base.steps, "{s}");
            assert!(net_iso(&r.net, &base.net), "{s}");
        }
    }

    #[test]
    fn replay_reproduces_ids() {
        let (_, sys, _, net) = start("iterlist <\\x y. cons x y> <nil> (cons 0 (cons 0 nil))");
        let (r, trace) = reduce(net.clone(), &sys, Strategy::Random(5), DEFAULT_FUEL).unwrap();
        let again = replay(net, &sys, &trace).unwrap();
        assert_eq!(again, r.net);
    }

    #[test]
    fn deep_reduction_matches_the_oracle() {
        for src in [
            "0",
            "(\\m:nat. \\n:nat. iternat <\\x. suc x> <n> m) (suc (suc 0)) (suc (suc (suc 0)))",
            "iterlist <\\x y. cons x y> <nil> (cons 0 nil)",
        ] {
            let t = parse(src).unwrap();
            let ty = typecheck(&t).unwrap();
            let (sys, table) = gen_system(&t).unwrap();
            let out =
                reduce_deep(&t, Some(&ty), &sys, &table, Strategy::Fifo, DEFAULT_FUEL).unwrap();
            let want = oracle::deep_eval(&t, oracle::DEFAULT_FUEL).unwrap();
            assert!(alpha_eq(&out.term, &want), "{src}: {} vs {want}", out.term);
        }
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("lifo".parse::<Strategy>().unwrap(), Strategy::Lifo);
        assert_eq!("random:7".parse::<Strategy>().unwrap(), Strategy::Random(7));
        assert!("best".parse::<Strategy>().is_err());
    }
}
