//! The stepping protocol behind the interactive debugger.
//!
//! Requests are JSON objects `{"rev":int,"cmd":string,...}` and every
//! response is `{"rev":int,"ok":bool,...}`. Commands that change the net
//! (`step`, `run`, `undo`) must carry the current revision; each fired
//! interaction and each undo advance it by one.

use serde_json::{json, Value};

use crate::engine::{TraceEvent, DEFAULT_FUEL};
use crate::net::{active_pairs, apply_rule, ActivePair, InversePatch, Net};
use crate::program::Program;

pub struct Session {
    source: String,
    program: Option<Program>,
    initial: Net,
    net: Net,
    history: Vec<(TraceEvent, InversePatch)>,
    rev: u64,
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

/// What the caller should do after a response.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Quit,
}

struct Failure(String);

impl<T: ToString> From<T> for Failure {
    fn from(e: T) -> Self {
        Failure(e.to_string())
    }
}

impl Session {
    pub fn new() -> Self {
        Session {
            source: String::new(),
            program: None,
            initial: Net::new(),
            net: Net::new(),
            history: Vec::new(),
            rev: 0,
        }
    }

    pub fn rev(&self) -> u64 {
        self.rev
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Steps currently applied (fired minus undone).
    pub fn depth(&self) -> usize {
        self.history.len()
    }

    /// Re-fires the history from the loaded net; the result must equal the
    /// current net exactly.
    pub fn replay_matches(&self) -> bool {
        let Some(p) = &self.program else {
            return true;
        };
        let trace: Vec<TraceEvent> = self.history.iter().map(|(e, _)| e.clone()).collect();
        match crate::engine::replay(self.initial.clone(), &p.system, &trace) {
            Ok(net) => net == self.net,
            Err(_) => false,
        }
    }

    /// Handles one raw message. Malformed JSON yields an error response.
    pub fn handle_text(&mut self, text: &str) -> (String, Flow) {
        match serde_json::from_str::<Value>(text) {
            Ok(req) => {
                let (resp, flow) = self.handle(&req);
                (resp.to_string(), flow)
            }
            Err(e) => (
                self.error(format!("malformed request: {e}")).to_string(),
                Flow::Continue,
            ),
        }
    }

    pub fn handle(&mut self, req: &Value) -> (Value, Flow) {
        let cmd = req.get("cmd").and_then(Value::as_str).unwrap_or("");
        let result = match cmd {
            "load" => self.load(req),
            "snapshot" => self.loaded().map(|_| self.snapshot()),
            "pairs" => self.loaded().map(|_| json!({ "pairs": self.pairs_json() })),
            "step" => self.step(req),
            "run" => self.run(req),
            "undo" => self.undo(req),
            "readback" => self.readback(),
            "system" => self
                .loaded()
                .map(|p| json!({ "system": p.system.dump(false) })),
            "quit" => return (self.ok(json!({ "bye": true })), Flow::Quit),
            "" => Err(Failure("missing `cmd`".into())),
            other => Err(Failure(format!("unknown command `{other}`"))),
        };
        let resp = match result {
            Ok(body) => self.ok(body),
            Err(Failure(msg)) => self.error(msg),
        };
        (resp, Flow::Continue)
    }

    fn ok(&self, body: Value) -> Value {
        let mut out = json!({ "rev": self.rev, "ok": true });
        if let (Value::Object(out), Value::Object(body)) = (&mut out, body) {
            out.extend(body);
        }
        out
    }

    fn error(&self, message: String) -> Value {
        json!({ "rev": self.rev, "ok": false, "error": message })
    }

    fn loaded(&self) -> Result<&Program, Failure> {
        self.program
            .as_ref()
            .ok_or_else(|| Failure("no program loaded".into()))
    }

    fn check_rev(&self, req: &Value) -> Result<(), Failure> {
        match req.get("rev").and_then(Value::as_u64) {
            Some(r) if r == self.rev => Ok(()),
            Some(r) => Err(Failure(format!(
                "stale revision {r}, current is {}",
                self.rev
            ))),
            None => Err(Failure("missing `rev`".into())),
        }
    }

    fn load(&mut self, req: &Value) -> Result<Value, Failure> {
        let source = req
            .get("source")
            .and_then(Value::as_str)
            .ok_or_else(|| Failure("load needs `source`".into()))?;
        let token = req.get("token").and_then(Value::as_bool).unwrap_or(true);
        let program = Program::from_source(source)?;
        let net = if token {
            program.initial()?
        } else {
            program.net()?
        };
        self.source = source.to_string();
        self.program = Some(program);
        self.initial = net.clone();
        self.net = net;
        self.history.clear();
        self.rev = 0;
        let ty = self.program.as_ref().unwrap().ty.to_string();
        let mut body = self.snapshot();
        body["type"] = json!(ty);
        Ok(body)
    }

    fn pairs(&self) -> Vec<ActivePair> {
        active_pairs(&self.net)
    }

    fn pairs_json(&self) -> Value {
        let Some(p) = &self.program else {
            return json!([]);
        };
        let pairs: Vec<Value> = self
            .pairs()
            .into_iter()
            .map(|pair| {
                let name = |a| p.system.name(self.net.symbol_of(a).unwrap()).to_string();
                json!({
                    "agents": [pair.left.0, pair.right.0],
                    "symbols": [name(pair.left), name(pair.right)],
                })
            })
            .collect();
        Value::Array(pairs)
    }

    fn snapshot(&self) -> Value {
        let net = match &self.program {
            Some(p) => serde_json::to_value(self.net.to_doc(&p.system)).expect("net serialises"),
            None => Value::Null,
        };
        json!({ "net": net, "pairs": self.pairs_json() })
    }

    /// Fires `pair`, returning the event and the pairs it created.
    fn fire(&mut self, pair: ActivePair) -> Result<(TraceEvent, Vec<ActivePair>), Failure> {
        let p = self.program.as_ref().unwrap();
        let fired = apply_rule(&mut self.net, pair, &p.system)?;
        let event = TraceEvent::new(self.history.len() as u64 + 1, &fired, &p.system);
        self.history.push((event.clone(), fired.patch));
        self.rev += 1;
        Ok((event, fired.new_pairs))
    }

    fn step(&mut self, req: &Value) -> Result<Value, Failure> {
        self.loaded()?;
        self.check_rev(req)?;
        let index = req
            .get("pair_index")
            .and_then(Value::as_u64)
            .ok_or_else(|| Failure("step needs `pair_index`".into()))? as usize;
        let pairs = self.pairs();
        let pair = *pairs.get(index).ok_or_else(|| {
            Failure(format!(
                "invalid pair index {index}, {} active pairs",
                pairs.len()
            ))
        })?;
        let (event, _) = self.fire(pair)?;
        let mut body = json!({ "event": event });
        if let (Value::Object(b), Value::Object(s)) = (&mut body, self.snapshot()) {
            b.extend(s);
        }
        Ok(body)
    }

    fn run(&mut self, req: &Value) -> Result<Value, Failure> {
        self.loaded()?;
        self.check_rev(req)?;
        let to_normal = req
            .get("to_normal")
            .and_then(Value::as_bool)
            .unwrap_or(false);
        let limit = match req.get("n").and_then(Value::as_u64) {
            Some(n) => n,
            None if to_normal => DEFAULT_FUEL,
            None => return Err(Failure("run needs `n` or `to_normal`".into())),
        };
        let mut queue: std::collections::VecDeque<ActivePair> = self.pairs().into();
        let mut fired = 0;
        while fired < limit {
            let Some(pair) = queue.pop_front() else {
                break;
            };
            let (_, new) = self.fire(pair)?;
            queue.extend(new);
            fired += 1;
        }
        let mut body = json!({ "fired": fired, "normal": queue.is_empty() });
        if let (Value::Object(b), Value::Object(s)) = (&mut body, self.snapshot()) {
            b.extend(s);
        }
        Ok(body)
    }

    fn undo(&mut self, req: &Value) -> Result<Value, Failure> {
        self.loaded()?;
        self.check_rev(req)?;
        let (event, patch) = self
            .history
            .pop()
            .ok_or_else(|| Failure("nothing to undo".into()))?;
        patch.undo(&mut self.net);
        self.rev += 1;
        let mut body = json!({ "undone": event });
        if let (Value::Object(b), Value::Object(s)) = (&mut body, self.snapshot()) {
            b.extend(s);
        }
        Ok(body)
    }

    fn readback(&self) -> Result<Value, Failure> {
        let p = self.loaded()?;
        let root_only = self.net.interface_len() == 1;
        match p.readback(&self.net) {
            Ok(t) if root_only => Ok(json!({ "term": t.to_string() })),
            Ok(_) => Err(Failure("net has free ports".into())),
            Err(e) => Err(Failure(e.to_string())),
        }
    }
}
