use thiserror::Error;

use super::{Agent, AgentId, Endpoint, InteractionSystem, Net, SymbolId};

/// Two agents connected principal to principal. `left < right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivePair {
    pub left: AgentId,
    pub right: AgentId,
}

impl ActivePair {
    pub fn new(a: AgentId, b: AgentId) -> Self {
        if a <= b {
            ActivePair { left: a, right: b }
        } else {
            ActivePair { left: b, right: a }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("agents {0} and {1} do not form an active pair")]
    NotActive(AgentId, AgentId),
    #[error("no rule for {0} >< {1}")]
    NoRule(String, String),
}

/// What one interaction did.
#[derive(Clone, Debug)]
pub struct Fired {
    /// The rule's symbol pair, in template order.
    pub rule: (SymbolId, SymbolId),
    /// The two consumed agents, in template order.
    pub consumed: [AgentId; 2],
    pub created: Vec<AgentId>,
    /// Active pairs that did not exist before this interaction.
    pub new_pairs: Vec<ActivePair>,
    pub patch: InversePatch,
}

/// Enough to undo one interaction exactly, agent ids included.
#[derive(Clone, Debug)]
pub struct InversePatch {
    removed: Vec<(AgentId, Agent)>,
    first_created: usize,
    relinked: Vec<(Endpoint, Option<Endpoint>)>,
}

impl InversePatch {
    pub fn undo(self, net: &mut Net) {
        net.truncate_ids(self.first_created);
        for (id, agent) in self.removed {
            net.restore_agent(id, agent);
        }
        for (end, old) in self.relinked {
            net.set_slot(end, old);
        }
    }
}

/// All active pairs, ordered by their lower agent id.
pub fn active_pairs(net: &Net) -> Vec<ActivePair> {
    net.agents()
        .filter_map(|(id, a)| match a.ports[0] {
            Some(Endpoint::Port(other, 0)) if id < other => Some(ActivePair::new(id, other)),
            _ => None,
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Inner {
    Real(Endpoint),
    Hole(usize),
}

/// Fires `pair`: removes both agents, instantiates the rule's replacement
/// with fresh ids and splices each hole onto the wire that was attached to
/// the matching auxiliary port.
pub fn apply_rule(
    net: &mut Net,
    pair: ActivePair,
    system: &InteractionSystem,
) -> Result<Fired, NetError> {
    let (la, ra) = (pair.left, pair.right);
    let active = matches!(
        net.agent(la).and_then(|a| a.ports[0]),
        Some(Endpoint::Port(id, 0)) if id == ra
    );
    if !active {
        return Err(NetError::NotActive(la, ra));
    }
    let (ls, rs) = (net.symbol_of(la).unwrap(), net.symbol_of(ra).unwrap());
    let rule = system
        .rule(ls, rs)
        .ok_or_else(|| NetError::NoRule(system.name(ls).into(), system.name(rs).into()))?;
    let (first, second) = if rule.left.0 == ls {
        (la, ra)
    } else {
        (ra, la)
    };

    let first_agent = net.take_agent(first).unwrap();
    let second_agent = net.take_agent(second).unwrap();
    let split = first_agent.arity();

    // outer[h]: what the wire on the consumed aux port behind hole h leads to.
    let outer: Vec<Endpoint> = first_agent.ports[1..]
        .iter()
        .chain(&second_agent.ports[1..])
        .map(|e| e.expect("validated net"))
        .collect();
    let consumed_hole = |e: Endpoint| match e {
        Endpoint::Port(id, p) if id == first && p > 0 => Some(p as usize - 1),
        Endpoint::Port(id, p) if id == second && p > 0 => Some(split + p as usize - 1),
        _ => None,
    };

    let first_created = net.next_id().0 as usize;
    let template = &rule.replacement;
    let mut fresh: Vec<Option<AgentId>> = Vec::new();
    let mut created = Vec::with_capacity(template.agent_count());
    for (tid, tagent) in template.agents() {
        let idx = tid.0 as usize;
        if fresh.len() <= idx {
            fresh.resize(idx + 1, None);
        }
        let id = net.add_agent(tagent.symbol, tagent.arity());
        fresh[idx] = Some(id);
        created.push(id);
    }
    let map = |e: Endpoint| match e {
        Endpoint::Port(t, p) => Endpoint::Port(fresh[t.0 as usize].unwrap(), p),
        Endpoint::Free(_) => unreachable!(),
    };

    let mut new_pairs = Vec::new();
    let mut inner = vec![Inner::Hole(usize::MAX); outer.len()];
    for (tid, tagent) in template.agents() {
        for (p, slot) in tagent.ports.iter().enumerate() {
            let here = Endpoint::Port(tid, p as u8);
            match slot.expect("validated template") {
                Endpoint::Free(h) => inner[h as usize] = Inner::Real(map(here)),
                there if here < there => {
                    let (a, b) = (map(here), map(there));
                    net.link(a, b);
                    if a.is_principal() && b.is_principal() {
                        new_pairs.push(ActivePair::new(a.agent().unwrap(), b.agent().unwrap()));
                    }
                }
                _ => {}
            }
        }
    }
    for (h, slot) in template.interface().enumerate() {
        if let Some(Endpoint::Free(j)) = slot {
            inner[h] = Inner::Hole(j as usize);
        }
    }

    // Every hole is a wire segment; chase each chain of segments from one
    // surviving endpoint to the other. Chains made only of holes vanish.
    let mut visited = vec![false; outer.len()];
    let mut links = Vec::new();
    let walk_from_outer = |mut h: usize, visited: &mut Vec<bool>| loop {
        visited[h] = true;
        match inner[h] {
            Inner::Real(e) => return e,
            Inner::Hole(j) => {
                visited[j] = true;
                match consumed_hole(outer[j]) {
                    Some(k) => h = k,
                    None => return outer[j],
                }
            }
        }
    };
    let walk_from_inner = |mut h: usize, visited: &mut Vec<bool>| loop {
        visited[h] = true;
        match consumed_hole(outer[h]) {
            None => return outer[h],
            Some(k) => {
                visited[k] = true;
                match inner[k] {
                    Inner::Real(e) => return e,
                    Inner::Hole(j) => h = j,
                }
            }
        }
    };
    for h in 0..outer.len() {
        if !visited[h] && consumed_hole(outer[h]).is_none() {
            let end = walk_from_outer(h, &mut visited);
            links.push((outer[h], end));
        }
    }
    for h in 0..outer.len() {
        if let (false, Inner::Real(e)) = (visited[h], inner[h]) {
            let end = walk_from_inner(h, &mut visited);
            links.push((e, end));
        }
    }

    let is_new = |e: Endpoint| matches!(e, Endpoint::Port(id, _) if id.0 as usize >= first_created);
    let mut relinked = Vec::new();
    for &(a, b) in &links {
        for e in [a, b] {
            if !is_new(e) {
                relinked.push((e, net.partner(e)));
            }
        }
    }
    for (a, b) in links {
        net.link(a, b);
        if a.is_principal() && b.is_principal() {
            new_pairs.push(ActivePair::new(a.agent().unwrap(), b.agent().unwrap()));
        }
    }

    Ok(Fired {
        rule: rule.left,
        consumed: [first, second],
        created,
        new_pairs,
        patch: InversePatch {
            removed: vec![(first, first_agent), (second, second_agent)],
            first_created,
            relinked,
        },
    })
}
