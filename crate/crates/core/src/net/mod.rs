//! Interaction nets as port graphs.
//!
//! Every agent has a principal port (index 0) and `arity` auxiliary ports
//! (1..=arity). Each port slot stores the endpoint at the other end of its
//! wire. Free ports of the net form an ordered interface; a free port is
//! written `Endpoint::Free(k)` and its partner lives in the interface slot.

mod iso;
mod json;
mod rewrite;
mod rules;

use std::fmt;

pub use iso::{net_iso, net_iso_report, IsoReport};
pub use json::{NetDoc, NetParseError, PortRef};
pub use rewrite::{active_pairs, apply_rule, ActivePair, Fired, InversePatch, NetError};
pub use rules::{InteractionSystem, RuleTemplate, SymbolDecl, SymbolId, SymbolKind, SystemError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One end of a wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    /// Port `.1` of agent `.0`; port 0 is principal.
    Port(AgentId, u8),
    /// Position `.0` of the interface.
    Free(u32),
}

impl Endpoint {
    pub fn principal(id: AgentId) -> Endpoint {
        Endpoint::Port(id, 0)
    }

    pub fn aux(id: AgentId, i: usize) -> Endpoint {
        Endpoint::Port(id, i as u8)
    }

    pub fn is_principal(&self) -> bool {
        matches!(self, Endpoint::Port(_, 0))
    }

    pub fn agent(&self) -> Option<AgentId> {
        match self {
            Endpoint::Port(id, _) => Some(*id),
            Endpoint::Free(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub symbol: SymbolId,
    /// `ports[i]` is the partner of port `i`, `None` while unwired.
    pub ports: Vec<Option<Endpoint>>,
}

impl Agent {
    pub fn arity(&self) -> usize {
        self.ports.len() - 1
    }
}

/// A defect found by validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defect {
    Unwired(PortRef),
    DoublyWired(PortRef),
    Asymmetric(PortRef),
    Dangling(PortRef),
    UnknownSymbol {
        agent: u32,
        symbol: String,
    },
    ArityMismatch {
        agent: u32,
        expected: usize,
        found: usize,
    },
    DuplicateAgent(u32),
    UnpairedFree(String),
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::Unwired(p) => write!(f, "{p}: port unwired"),
            Defect::DoublyWired(p) => write!(f, "{p}: port doubly wired"),
            Defect::Asymmetric(p) => write!(f, "{p}: partner does not point back"),
            Defect::Dangling(p) => write!(f, "{p}: reference to a missing agent or port"),
            Defect::UnknownSymbol { agent, symbol } => {
                write!(f, "agent {agent}: unknown symbol `{symbol}`")
            }
            Defect::ArityMismatch {
                agent,
                expected,
                found,
            } => write!(
                f,
                "agent {agent}: arity {found}, symbol declares {expected}"
            ),
            Defect::DuplicateAgent(id) => write!(f, "agent {id} declared twice"),
            Defect::UnpairedFree(name) => {
                write!(
                    f,
                    "free wire `{name}` must appear exactly twice in the interface"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Net {
    agents: Vec<Option<Agent>>,
    interface: Vec<Option<Endpoint>>,
    live: usize,
}

impl Net {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_agent(&mut self, symbol: SymbolId, arity: usize) -> AgentId {
        let id = AgentId(self.agents.len() as u32);
        self.agents.push(Some(Agent {
            symbol,
            ports: vec![None; arity + 1],
        }));
        self.live += 1;
        id
    }

    /// Appends a new interface position.
    pub fn add_free(&mut self) -> Endpoint {
        self.interface.push(None);
        Endpoint::Free(self.interface.len() as u32 - 1)
    }

    fn slot_mut(&mut self, e: Endpoint) -> &mut Option<Endpoint> {
        match e {
            Endpoint::Port(id, p) => {
                &mut self.agents[id.0 as usize]
                    .as_mut()
                    .expect("live agent")
                    .ports[p as usize]
            }
            Endpoint::Free(k) => &mut self.interface[k as usize],
        }
    }

    pub(crate) fn set_slot(&mut self, e: Endpoint, partner: Option<Endpoint>) {
        *self.slot_mut(e) = partner;
    }

    /// Connects two endpoints with a wire.
    pub fn link(&mut self, a: Endpoint, b: Endpoint) {
        *self.slot_mut(a) = Some(b);
        *self.slot_mut(b) = Some(a);
    }

    pub fn partner(&self, e: Endpoint) -> Option<Endpoint> {
        match e {
            Endpoint::Port(id, p) => self
                .agent(id)
                .and_then(|a| a.ports.get(p as usize).copied().flatten()),
            Endpoint::Free(k) => self.interface.get(k as usize).copied().flatten(),
        }
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.agents.get(id.0 as usize).and_then(Option::as_ref)
    }

    pub fn symbol_of(&self, id: AgentId) -> Option<SymbolId> {
        self.agent(id).map(|a| a.symbol)
    }

    /// Live agents in ascending id order.
    pub fn agents(&self) -> impl Iterator<Item = (AgentId, &Agent)> + '_ {
        self.agents
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.as_ref().map(|a| (AgentId(i as u32), a)))
    }

    pub fn agent_count(&self) -> usize {
        self.live
    }

    pub fn count_symbol(&self, symbol: SymbolId) -> usize {
        self.agents().filter(|(_, a)| a.symbol == symbol).count()
    }

    pub fn interface_len(&self) -> usize {
        self.interface.len()
    }

    /// Partner of each interface position.
    pub fn interface(&self) -> impl Iterator<Item = Option<Endpoint>> + '_ {
        self.interface.iter().copied()
    }

    /// The id the next created agent will receive.
    pub fn next_id(&self) -> AgentId {
        AgentId(self.agents.len() as u32)
    }

    pub(crate) fn take_agent(&mut self, id: AgentId) -> Option<Agent> {
        let a = self.agents.get_mut(id.0 as usize)?.take();
        if a.is_some() {
            self.live -= 1;
        }
        a
    }

    pub(crate) fn restore_agent(&mut self, id: AgentId, agent: Agent) {
        let slot = &mut self.agents[id.0 as usize];
        debug_assert!(slot.is_none());
        *slot = Some(agent);
        self.live += 1;
    }

    /// Drops every agent with id >= `len`.
    pub(crate) fn truncate_ids(&mut self, len: usize) {
        while self.agents.len() > len {
            if self.agents.pop().flatten().is_some() {
                self.live -= 1;
            }
        }
    }

    pub(crate) fn insert_agent_at(&mut self, id: AgentId, agent: Agent) {
        let idx = id.0 as usize;
        if self.agents.len() <= idx {
            self.agents.resize(idx + 1, None);
        }
        if self.agents[idx].is_none() {
            self.live += 1;
        }
        self.agents[idx] = Some(agent);
    }

    /// Checks the structural invariants against `system`: symbols resolve,
    /// arities match, every port is wired and wires are symmetric.
    pub fn validate(&self, system: &InteractionSystem) -> Vec<Defect> {
        let mut defects = Vec::new();
        let port_ref = |e: Endpoint| match e {
            Endpoint::Port(id, p) => PortRef::Agent(id.0, p),
            Endpoint::Free(k) => PortRef::Free(format!("#{k}")),
        };
        for (id, agent) in self.agents() {
            match system.try_symbol(agent.symbol) {
                None => defects.push(Defect::UnknownSymbol {
                    agent: id.0,
                    symbol: format!("#{}", agent.symbol.0),
                }),
                Some(decl) if decl.arity != agent.arity() => defects.push(Defect::ArityMismatch {
                    agent: id.0,
                    expected: decl.arity,
                    found: agent.arity(),
                }),
                Some(_) => {}
            }
            for (p, slot) in agent.ports.iter().enumerate() {
                let here = Endpoint::Port(id, p as u8);
                self.check_slot(here, *slot, &mut defects, port_ref);
            }
        }
        for (k, slot) in self.interface.iter().enumerate() {
            self.check_slot(Endpoint::Free(k as u32), *slot, &mut defects, port_ref);
        }
        defects
    }

    fn check_slot(
        &self,
        here: Endpoint,
        slot: Option<Endpoint>,
        defects: &mut Vec<Defect>,
        port_ref: impl Fn(Endpoint) -> PortRef,
    ) {
        match slot {
            None => defects.push(Defect::Unwired(port_ref(here))),
            Some(there) => {
                let exists = match there {
                    Endpoint::Port(id, p) => {
                        self.agent(id).is_some_and(|a| (p as usize) < a.ports.len())
                    }
                    Endpoint::Free(k) => (k as usize) < self.interface.len(),
                };
                if !exists {
                    defects.push(Defect::Dangling(port_ref(here)));
                } else if self.partner(there) != Some(here) {
                    defects.push(Defect::Asymmetric(port_ref(here)));
                }
            }
        }
    }

    /// Number of wires: every port and interface position is one wire end.
    pub fn wire_count(&self) -> usize {
        let ends: usize =
            self.agents().map(|(_, a)| a.ports.len()).sum::<usize>() + self.interface.len();
        ends / 2
    }
}
