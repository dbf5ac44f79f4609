//! Net JSON:
//! `{"agents":[{"id":int,"symbol":string}],"wires":[[ref,ref]...],"interface":[ref...]}`
//! where a ref is `["a",id,port]` or `["free",name]`. A port wired to the
//! interface appears in `interface` only. Two interface positions joined by
//! a bare wire both appear as `["free",name]` with the same name.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AgentId, Defect, Endpoint, InteractionSystem, Net};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PortRef {
    Agent(u32, u8),
    Free(String),
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortRef::Agent(id, p) => write!(f, "agent {id} port {p}"),
            PortRef::Free(name) => write!(f, "free port `{name}`"),
        }
    }
}

impl Serialize for PortRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PortRef::Agent(id, p) => {
                let mut seq = s.serialize_seq(Some(3))?;
                seq.serialize_element("a")?;
                seq.serialize_element(id)?;
                seq.serialize_element(p)?;
                seq.end()
            }
            PortRef::Free(name) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element("free")?;
                seq.serialize_element(name)?;
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for PortRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let items = v
            .as_array()
            .ok_or_else(|| D::Error::custom("port reference must be an array"))?;
        match items.as_slice() {
            [tag, id, port] if tag == "a" => {
                let id = id.as_u64().ok_or_else(|| D::Error::custom("agent id"))?;
                let port = port
                    .as_u64()
                    .ok_or_else(|| D::Error::custom("port index"))?;
                Ok(PortRef::Agent(id as u32, port as u8))
            }
            [tag, name] if tag == "free" => Ok(PortRef::Free(
                name.as_str()
                    .ok_or_else(|| D::Error::custom("free port name"))?
                    .to_string(),
            )),
            _ => Err(D::Error::custom(
                "expected [\"a\", id, port] or [\"free\", name]",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDoc {
    pub id: u32,
    pub symbol: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDoc {
    pub agents: Vec<AgentDoc>,
    pub wires: Vec<[PortRef; 2]>,
    pub interface: Vec<PortRef>,
}

impl Net {
    pub fn to_doc(&self, system: &InteractionSystem) -> NetDoc {
        let agents = self
            .agents()
            .map(|(id, a)| AgentDoc {
                id: id.0,
                symbol: system.name(a.symbol).to_string(),
            })
            .collect();
        let mut wires = Vec::new();
        for (id, a) in self.agents() {
            for (p, slot) in a.ports.iter().enumerate() {
                let here = Endpoint::Port(id, p as u8);
                if let Some(there @ Endpoint::Port(oid, q)) = *slot {
                    if here < there {
                        wires.push([PortRef::Agent(id.0, p as u8), PortRef::Agent(oid.0, q)]);
                    }
                }
            }
        }
        let interface = self
            .interface()
            .enumerate()
            .map(|(k, slot)| match slot {
                Some(Endpoint::Port(id, p)) => PortRef::Agent(id.0, p),
                Some(Endpoint::Free(j)) => PortRef::Free(format!("w{}", (k as u32).min(j))),
                None => PortRef::Free(format!("unwired{k}")),
            })
            .collect();
        NetDoc {
            agents,
            wires,
            interface,
        }
    }

    /// Compact, key-order-stable JSON (no trailing newline).
    pub fn to_json(&self, system: &InteractionSystem) -> String {
        serde_json::to_string(&self.to_doc(system)).expect("net serialises")
    }

    /// Builds a net from its document form, reporting every defect found.
    pub fn from_doc(doc: &NetDoc, system: &InteractionSystem) -> Result<Net, Vec<Defect>> {
        let mut defects = Vec::new();
        let mut net = Net::new();
        let mut arity: HashMap<u32, usize> = HashMap::new();
        for a in &doc.agents {
            if arity.contains_key(&a.id) {
                defects.push(Defect::DuplicateAgent(a.id));
                continue;
            }
            match system.by_name(&a.symbol) {
                Some(sym) => {
                    let n = system.arity(sym);
                    arity.insert(a.id, n);
                    net.insert_agent_at(
                        AgentId(a.id),
                        super::Agent {
                            symbol: sym,
                            ports: vec![None; n + 1],
                        },
                    );
                }
                None => defects.push(Defect::UnknownSymbol {
                    agent: a.id,
                    symbol: a.symbol.clone(),
                }),
            }
        }

        let mut uses: BTreeMap<PortRef, usize> = BTreeMap::new();
        let mut valid = |r: &PortRef, defects: &mut Vec<Defect>| match r {
            PortRef::Agent(id, p) => match arity.get(id) {
                Some(&n) if (*p as usize) <= n => {
                    *uses.entry(r.clone()).or_default() += 1;
                    true
                }
                _ => {
                    defects.push(Defect::Dangling(r.clone()));
                    false
                }
            },
            PortRef::Free(_) => true,
        };
        let endpoint = |r: &PortRef| match r {
            PortRef::Agent(id, p) => Endpoint::Port(AgentId(*id), *p),
            PortRef::Free(_) => unreachable!(),
        };

        let mut frees: BTreeMap<String, Vec<Endpoint>> = BTreeMap::new();
        for r in &doc.interface {
            let slot = net.add_free();
            match r {
                PortRef::Free(name) => frees.entry(name.clone()).or_default().push(slot),
                agent => {
                    if valid(agent, &mut defects) {
                        net.link(slot, endpoint(agent));
                    }
                }
            }
        }
        for (name, ends) in frees {
            match ends.as_slice() {
                [x, y] => net.link(*x, *y),
                _ => defects.push(Defect::UnpairedFree(name)),
            }
        }
        for [x, y] in &doc.wires {
            if matches!(x, PortRef::Free(_)) || matches!(y, PortRef::Free(_)) {
                defects.push(Defect::Dangling(x.clone()));
                continue;
            }
            let (okx, oky) = (valid(x, &mut defects), valid(y, &mut defects));
            if okx && oky {
                net.link(endpoint(x), endpoint(y));
            }
        }

        for (id, n) in &arity {
            for p in 0..=*n {
                let r = PortRef::Agent(*id, p as u8);
                match uses.get(&r).copied().unwrap_or(0) {
                    0 => defects.push(Defect::Unwired(r)),
                    1 => {}
                    _ => defects.push(Defect::DoublyWired(r)),
                }
            }
        }
        if defects.is_empty() {
            Ok(net)
        } else {
            defects.sort_by_key(|d| d.to_string());
            defects.dedup();
            Err(defects)
        }
    }

    pub fn from_json(json: &str, system: &InteractionSystem) -> Result<Net, NetParseError> {
        let doc: NetDoc =
            serde_json::from_str(json).map_err(|e| NetParseError::Json(e.to_string()))?;
        Net::from_doc(&doc, system).map_err(NetParseError::Defects)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NetParseError {
    #[error("malformed net JSON: {0}")]
    Json(String),
    #[error("invalid net: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Defects(Vec<Defect>),
}
