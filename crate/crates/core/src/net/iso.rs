use std::collections::{HashMap, HashSet, VecDeque};

use super::{AgentId, Endpoint, Net};

/// Outcome of a rooted isomorphism check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoReport {
    pub isomorphic: bool,
    /// Components unreachable from the interface, per side. They are
    /// compared by canonical form rather than by traversal.
    pub detached: (usize, usize),
}

/// Rooted isomorphism: a parallel traversal from corresponding interface
/// positions must match symbols, port indices and wiring bijectively.
pub fn net_iso(a: &Net, b: &Net) -> bool {
    net_iso_report(a, b).isomorphic
}

pub fn net_iso_report(a: &Net, b: &Net) -> IsoReport {
    let mut report = IsoReport {
        isomorphic: false,
        detached: (0, 0),
    };
    if a.interface_len() != b.interface_len() || a.agent_count() != b.agent_count() {
        return report;
    }
    let mut fwd: HashMap<AgentId, AgentId> = HashMap::new();
    let mut bwd: HashMap<AgentId, AgentId> = HashMap::new();
    let mut queue: VecDeque<(Endpoint, Endpoint)> = (0..a.interface_len() as u32)
        .map(|k| (Endpoint::Free(k), Endpoint::Free(k)))
        .collect();

    while let Some((ea, eb)) = queue.pop_front() {
        match (a.partner(ea), b.partner(eb)) {
            (Some(Endpoint::Free(i)), Some(Endpoint::Free(j))) if i == j => {}
            (Some(Endpoint::Port(x, p)), Some(Endpoint::Port(y, q))) if p == q => {
                match (fwd.get(&x), bwd.get(&y)) {
                    (Some(&y2), Some(&x2)) if y2 == y && x2 == x => {}
                    (None, None) => {
                        let (ax, by) = (a.agent(x).unwrap(), b.agent(y).unwrap());
                        if ax.symbol != by.symbol || ax.ports.len() != by.ports.len() {
                            return report;
                        }
                        fwd.insert(x, y);
                        bwd.insert(y, x);
                        for port in 0..ax.ports.len() as u8 {
                            queue.push_back((Endpoint::Port(x, port), Endpoint::Port(y, port)));
                        }
                    }
                    _ => return report,
                }
            }
            _ => return report,
        }
    }

    let rest_a = components(a, &fwd);
    let rest_b = components(b, &bwd);
    report.detached = (rest_a.len(), rest_b.len());
    let mut ca: Vec<String> = rest_a.iter().map(|c| canonical(a, c)).collect();
    let mut cb: Vec<String> = rest_b.iter().map(|c| canonical(b, c)).collect();
    ca.sort();
    cb.sort();
    report.isomorphic = ca == cb;
    report
}

/// Connected components among the agents not in `seen`.
fn components(net: &Net, seen: &HashMap<AgentId, AgentId>) -> Vec<Vec<AgentId>> {
    let mut done: HashSet<AgentId> = seen.keys().copied().collect();
    let mut out = Vec::new();
    for (start, _) in net.agents() {
        if !done.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            for slot in &net.agent(id).unwrap().ports {
                if let Some(Endpoint::Port(other, _)) = slot {
                    if done.insert(*other) {
                        comp.push(*other);
                        stack.push(*other);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Lexicographically least traversal string over all starting agents.
fn canonical(net: &Net, comp: &[AgentId]) -> String {
    comp.iter()
        .map(|&root| {
            let mut order: HashMap<AgentId, usize> = HashMap::new();
            let mut queue = VecDeque::from([root]);
            order.insert(root, 0);
            let mut out = String::new();
            while let Some(id) = queue.pop_front() {
                let agent = net.agent(id).unwrap();
                out.push_str(&format!("{}[", agent.symbol.0));
                for slot in &agent.ports {
                    match slot {
                        Some(Endpoint::Port(other, q)) => {
                            let n = order.len();
                            let idx = *order.entry(*other).or_insert_with(|| {
                                queue.push_back(*other);
                                n
                            });
                            out.push_str(&format!("{idx}.{q},"));
                        }
                        _ => out.push_str("?,"),
                    }
                }
                out.push(']');
            }
            out
        })
        .min()
        .unwrap_or_default()
}
