//! One line per acceptance criterion. Exits non-zero if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use iternet::engine::{reduce_with, Strategy};
use iternet::lang::parse;
use iternet::law::iterator_step;
use iternet::net::{active_pairs, net_iso, SymbolId};
use iternet::program::Program;
use iternet::session::Session;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const FUEL: u64 = 1_000_000;

struct Entry {
    name: String,
    path: PathBuf,
    source: String,
    program: Program,
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs/corpus")
}

fn corpus() -> Vec<Entry> {
    let mut paths: Vec<_> = fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "fun"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let source = fs::read_to_string(&path).unwrap();
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let program = Program::from_source(&source).unwrap_or_else(|e| panic!("{name}: {e}"));
            Entry {
                name,
                path,
                source,
                program,
            }
        })
        .collect()
}

type Outcome = Result<String, String>;

fn agreement(corpus: &[Entry]) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for e in corpus {
        match e.program.check_weak(Strategy::Fifo, FUEL) {
            Ok(a) if a.agree => {}
            Ok(a) => bad.push(format!(
                "{}: {} vs {}",
                e.name, a.net_result, a.oracle_result
            )),
            Err(err) => bad.push(format!("{}: {err}", e.name)),
        }
    }
    let took = start.elapsed();
    if corpus.len() < 25 {
        return Err(format!("corpus has only {} programs", corpus.len()));
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    if took >= Duration::from_secs(10) {
        return Err(format!("took {took:.2?}"));
    }
    Ok(format!("{0}/{0} agree in {took:.2?}", corpus.len()))
}

fn no_active_pairs(corpus: &[Entry]) -> Outcome {
    for e in corpus {
        let plain = active_pairs(&e.program.net().map_err(|x| x.to_string())?).len();
        let token = active_pairs(&e.program.initial().map_err(|x| x.to_string())?).len();
        if plain != 0 || token != 1 {
            return Err(format!("{}: {plain} pairs, {token} with the token", e.name));
        }
    }
    Ok(format!(
        "{} translations, 0 pairs each, 1 with the token",
        corpus.len()
    ))
}

fn one_step_law() -> Outcome {
    let instances = [
        "iterbool <a> <false> true",
        "iterbool <0> <suc b> false",
        "iternat <\\x. suc x> <a> 0",
        "iternat <\\x. suc a> <0> (suc 0)",
        "iternat <\\x. suc x> <a> (suc (suc 0))",
        "iternat <\\g. \\y:nat. g (suc y)> <\\y:nat. y> (suc 0)",
        "iterlist <\\x y. cons x y> <nil> (cons 0 nil)",
        "iterlist <\\x y. suc y> <0> (cons 0 (cons 0 nil))",
        "iterlist <\\x y. cons a (cons x y)> <nil> (cons 0 nil)",
        "iterlist <\\x y. y> <b> nil",
    ];
    let mut bad = Vec::new();
    for src in instances {
        match iterator_step(&parse(src).unwrap()) {
            Ok(law) if law.holds => {}
            Ok(_) => bad.push(format!("{src}: not isomorphic")),
            Err(e) => bad.push(format!("{src}: {e}")),
        }
    }
    if bad.is_empty() {
        Ok(format!("{} instances", instances.len()))
    } else {
        Err(bad.join("; "))
    }
}

fn strategies() -> Vec<Strategy> {
    let mut s = vec![Strategy::Fifo, Strategy::Lifo];
    s.extend((0..10).map(Strategy::Random));
    s
}

/// Strategy irrelevance and the single-token bound, from the same runs.
fn confluence_and_tokens(corpus: &[Entry]) -> (Outcome, Outcome) {
    let mut conf = Vec::new();
    let mut tok = Vec::new();
    let mut observed = 0u64;
    for e in corpus {
        let p = &e.program;
        let mut reference = None;
        for s in strategies() {
            let mut most = p.initial().unwrap().count_symbol(SymbolId::TOKEN);
            let report = reduce_with(p.initial().unwrap(), &p.system, s, FUEL, |_, net| {
                most = most.max(net.count_symbol(SymbolId::TOKEN));
                observed += 1;
            });
            let report = match report {
                Ok(r) if !r.fuel_exhausted => r,
                Ok(_) => {
                    conf.push(format!("{} {s}: fuel", e.name));
                    continue;
                }
                Err(err) => {
                    conf.push(format!("{} {s}: {err}", e.name));
                    continue;
                }
            };
            if most > 1 {
                tok.push(format!("{} {s}: {most} tokens", e.name));
            }
            match &reference {
                None => reference = Some(report),
                Some(r) => {
                    if r.steps != report.steps {
                        conf.push(format!(
                            "{} {s}: {} vs {} steps",
                            e.name, report.steps, r.steps
                        ));
                    } else if !net_iso(&r.net, &report.net) {
                        conf.push(format!("{} {s}: normal forms differ", e.name));
                    }
                }
            }
        }
    }
    let runs = corpus.len() * strategies().len();
    let conf = if conf.is_empty() {
        Ok(format!("{runs} runs, fifo/lifo/10 seeds per program"))
    } else {
        Err(conf.join("; "))
    };
    let tok = if tok.is_empty() {
        Ok(format!(
            "{observed} intermediate nets, at most 1 token each"
        ))
    } else {
        Err(tok.join("; "))
    };
    (conf, tok)
}

fn deep_agreement(corpus: &[Entry]) -> Outcome {
    let mut n = 0;
    for e in corpus.iter().filter(|e| e.program.ty.is_first_order()) {
        match e.program.check_deep(Strategy::Fifo, FUEL) {
            Ok(a) if a.agree => n += 1,
            Ok(a) => {
                return Err(format!(
                    "{}: {} vs {}",
                    e.name, a.net_result, a.oracle_result
                ))
            }
            Err(err) => return Err(format!("{}: {err}", e.name)),
        }
    }
    Ok(format!("{n} first-order programs"))
}

/// Stdout, trace file and net file of one run.
type RunBytes = (Vec<u8>, Vec<u8>, Vec<u8>);

fn cli_run(file: &Path, dir: &Path, tag: &str) -> Result<RunBytes, String> {
    let trace = dir.join(format!("{tag}.jsonl"));
    let net = dir.join(format!("{tag}.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_iternet"))
        .arg("run")
        .arg(file)
        .args(["--strategy", "random", "--seed", "7", "--trace"])
        .arg(&trace)
        .arg("--net")
        .arg(&net)
        .env_remove("FUN_FUEL")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{}: exit {:?}", file.display(), out.status.code()));
    }
    Ok((out.stdout, fs::read(trace).unwrap(), fs::read(net).unwrap()))
}

fn determinism(corpus: &[Entry]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for e in corpus {
        let a = cli_run(&e.path, dir.path(), "a")?;
        let b = cli_run(&e.path, dir.path(), "b")?;
        if a != b {
            return Err(format!("{}: outputs differ", e.name));
        }
    }
    Ok(format!(
        "{} programs run twice, byte-identical",
        corpus.len()
    ))
}

fn undo_soundness(corpus: &[Entry]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ops = 0;
    for seq in 0..1000 {
        let e = &corpus[rng.gen_range(0..corpus.len())];
        let mut s = Session::new();
        let send = |s: &mut Session, req: Value| -> Result<Value, String> {
            let (r, _) = s.handle(&req);
            if r["ok"] == true {
                Ok(r)
            } else {
                Err(format!("sequence {seq}: {req} -> {}", r["error"]))
            }
        };
        let first = send(&mut s, json!({"cmd":"load","source":e.source}))?;
        let mut stack = vec![first["net"].clone()];
        for _ in 0..rng.gen_range(1..60) {
            let rev = s.rev();
            let pairs = s.handle(&json!({"cmd":"pairs"})).0["pairs"]
                .as_array()
                .unwrap()
                .len();
            let r = if pairs > 0 && (stack.len() == 1 || rng.gen_bool(0.65)) {
                let r = send(
                    &mut s,
                    json!({"rev":rev,"cmd":"step","pair_index":rng.gen_range(0..pairs)}),
                )?;
                stack.push(r["net"].clone());
                r
            } else if stack.len() > 1 {
                let r = send(&mut s, json!({"rev":rev,"cmd":"undo"}))?;
                stack.pop();
                if &r["net"] != stack.last().unwrap() {
                    return Err(format!("sequence {seq}: undo did not restore the snapshot"));
                }
                r
            } else {
                continue;
            };
            ops += 1;
            if r["rev"] != rev + 1 {
                return Err(format!("sequence {seq}: revision did not advance"));
            }
            if !s.replay_matches() {
                return Err(format!(
                    "sequence {seq}: replay differs from the current net"
                ));
            }
        }
        while s.depth() > 0 {
            let rev = s.rev();
            send(&mut s, json!({"rev":rev,"cmd":"undo"}))?;
        }
        let back = send(&mut s, json!({"cmd":"snapshot"}))?;
        if back["net"] != stack[0] {
            return Err(format!(
                "sequence {seq}: full undo differs from the loaded net"
            ));
        }
    }
    Ok(format!("1000 sequences, {ops} mutations"))
}

fn main() {
    let corpus = corpus();
    let (conf, tok) = confluence_and_tokens(&corpus);
    let results = [
        (
            "corpus agreement with the reference evaluator",
            agreement(&corpus),
        ),
        (
            "translations have no active pairs",
            no_active_pairs(&corpus),
        ),
        ("iterator one-step law", one_step_law()),
        ("strategy irrelevance", conf),
        ("single token", tok),
        ("deep agreement", deep_agreement(&corpus)),
        ("cli determinism", determinism(&corpus)),
        ("undo soundness", undo_soundness(&corpus)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
