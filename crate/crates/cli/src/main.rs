use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use iternet::engine::{reduce_deep, reduce_with, replay, RunError, Strategy, TraceEvent};
use iternet::lang::alpha_eq;
use iternet::oracle::{self, EvalError};
use iternet::program::{default_fuel, CompileError, Program};

#[derive(Parser)]
#[command(
    name = "iternet",
    version,
    about = "Compile and run programs as token-passing interaction nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck and print the type.
    Check { file: PathBuf },
    /// Evaluate with the reference evaluator.
    Eval {
        file: PathBuf,
        /// Evaluate under constructors too.
        #[arg(long)]
        deep: bool,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Translate to a net and write artefacts. Without outputs the net JSON
    /// goes to stdout.
    Compile {
        file: PathBuf,
        #[arg(long, value_name = "OUT")]
        net: Option<PathBuf>,
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
        #[arg(long, value_name = "OUT")]
        system: Option<PathBuf>,
        /// Attach the evaluation token to the root.
        #[arg(long)]
        token: bool,
    },
    /// Reduce the net and read back the result.
    Run(RunArgs),
    /// Serve the stepping protocol, each session starting with FILE loaded.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Fifo,
    Lifo,
    Random,
}

#[derive(clap::Args)]
struct RunArgs {
    file: PathBuf,
    /// Keep reducing under constructors until the result is a full value.
    #[arg(long, conflicts_with_all = ["trace", "replay"])]
    deep: bool,
    #[arg(long, value_enum, default_value = "fifo")]
    strategy: StrategyArg,
    /// Seed for the random strategy.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    fuel: Option<u64>,
    /// Write one JSON event per interaction.
    #[arg(long, value_name = "OUT")]
    trace: Option<PathBuf>,
    /// Print reduction statistics as JSON.
    #[arg(long)]
    stats: bool,
    /// Compare with the reference evaluator and print AGREE.
    #[arg(long)]
    check: bool,
    /// Write the final net as JSON.
    #[arg(long, value_name = "OUT")]
    net: Option<PathBuf>,
    /// Fire the events of a recorded trace instead of scheduling.
    #[arg(long, value_name = "TRACE")]
    replay: Option<PathBuf>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 5, error }
    }
}

const USAGE: u8 = 1;
const REJECTED: u8 = 2;
const FUEL: u8 = 3;
const DISAGREE: u8 = 4;
const INTERNAL: u8 = 5;

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Check { file } => {
            let p = compile(&file)?;
            println!("{}", p.ty);
            Ok(())
        }
        Command::Eval { file, deep, fuel } => {
            let p = compile(&file)?;
            let fuel = fuel.unwrap_or_else(default_fuel);
            let v = if deep {
                oracle::deep_eval(&p.term, fuel)
            } else {
                oracle::eval_cbn(&p.term, fuel)
            }
            .map_err(eval_failure)?;
            println!("{v}");
            Ok(())
        }
        Command::Compile {
            file,
            net,
            dot,
            system,
            token,
        } => {
            let p = compile(&file)?;
            let n =
                if token { p.initial() } else { p.net() }.map_err(|e| Failure::new(INTERNAL, e))?;
            let json = n.to_json(&p.system) + "\n";
            if net.is_none() && dot.is_none() && system.is_none() {
                print!("{json}");
            }
            if let Some(out) = net {
                write(&out, &json)?;
            }
            if let Some(out) = dot {
                write(&out, &iternet::dot::export_dot(&n, &p.system))?;
            }
            if let Some(out) = system {
                write(&out, &p.system.dump(true))?;
            }
            Ok(())
        }
        Command::Run(args) => run(args),
        Command::Serve { file, port } => {
            let source = read(&file)?;
            Program::from_source(&source).map_err(compile_failure)?;
            let server = iternet_server::Server::bind(("127.0.0.1", port), Some(source))
                .with_context(|| format!("cannot bind port {port}"))
                .map_err(|e| Failure::new(USAGE, e))?;
            eprintln!(
                "listening on {}",
                server.local_addr().map_err(anyhow::Error::from)?
            );
            server.run().map_err(anyhow::Error::from)?;
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let p = compile(&args.file)?;
    let strategy = match args.strategy {
        StrategyArg::Fifo => Strategy::Fifo,
        StrategyArg::Lifo => Strategy::Lifo,
        StrategyArg::Random => Strategy::Random(args.seed),
    };
    let fuel = args.fuel.unwrap_or_else(default_fuel);

    let (result, net, stats) = if args.deep {
        let out = reduce_deep(&p.term, Some(&p.ty), &p.system, &p.table, strategy, fuel)
            .map_err(run_failure)?;
        let stats = serde_json::json!({ "steps": out.steps, "rounds": out.rounds }).to_string();
        (out.term, out.net, stats)
    } else if let Some(path) = &args.replay {
        let trace = read_trace(path)?;
        let initial = p.initial().map_err(|e| Failure::new(INTERNAL, e))?;
        let net = replay(initial, &p.system, &trace).map_err(|e| Failure::new(INTERNAL, e))?;
        let term = p.readback(&net).map_err(|e| Failure::new(INTERNAL, e))?;
        let stats = serde_json::json!({ "steps": trace.len() }).to_string();
        (term, net, stats)
    } else {
        let mut trace = match &args.trace {
            Some(path) => Some(std::io::BufWriter::new(create(path)?)),
            None => None,
        };
        let mut io_error = None;
        let initial = p.initial().map_err(|e| Failure::new(INTERNAL, e))?;
        let report = reduce_with(initial, &p.system, strategy, fuel, |ev, _| {
            if let Some(w) = trace.as_mut() {
                if let Err(e) = writeln!(w, "{}", ev.to_json()) {
                    io_error.get_or_insert(e);
                }
            }
        })
        .map_err(|e| Failure::new(INTERNAL, e))?;
        if let Some(mut w) = trace {
            w.flush().map_err(anyhow::Error::from)?;
        }
        if let Some(e) = io_error {
            return Err(anyhow::Error::from(e).context("writing trace").into());
        }
        if report.fuel_exhausted {
            return Err(run_failure(RunError::FuelExhausted(report.steps)));
        }
        let term = p
            .readback(&report.net)
            .map_err(|e| Failure::new(INTERNAL, e))?;
        (term, report.net.clone(), report.stats_json())
    };

    if let Some(out) = &args.net {
        write(out, &(net.to_json(&p.system) + "\n"))?;
    }
    if args.check {
        let expected = if args.deep {
            oracle::deep_eval(&p.term, oracle::DEFAULT_FUEL)
        } else {
            oracle::eval_cbn(&p.term, oracle::DEFAULT_FUEL)
        }
        .map_err(eval_failure)?;
        if !alpha_eq(&result, &expected) {
            return Err(Failure::new(
                DISAGREE,
                anyhow::anyhow!("DISAGREE: net gives `{result}`, evaluator gives `{expected}`"),
            ));
        }
        println!("AGREE");
    } else {
        println!("{result}");
    }
    if args.stats {
        println!("{stats}");
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Failure::new(USAGE, e))
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(|e| Failure::new(USAGE, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(|e| Failure::new(USAGE, e))
}

fn read_trace(path: &Path) -> Result<Vec<TraceEvent>, Failure> {
    read(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l)
                .with_context(|| format!("{}:{}: bad trace event", path.display(), i + 1))
                .map_err(|e| Failure::new(USAGE, e))
        })
        .collect()
}

fn compile(path: &Path) -> Result<Program, Failure> {
    Program::from_source(&read(path)?).map_err(compile_failure)
}

fn compile_failure(e: CompileError) -> Failure {
    let code = match e {
        CompileError::Gen(_) => INTERNAL,
        _ => REJECTED,
    };
    Failure::new(code, anyhow::anyhow!("{e}"))
}

fn run_failure(e: RunError) -> Failure {
    let code = match e {
        RunError::FuelExhausted(_) => FUEL,
        _ => INTERNAL,
    };
    Failure::new(code, e)
}

fn eval_failure(e: EvalError) -> Failure {
    let code = match e {
        EvalError::FuelExhausted(_) => FUEL,
        _ => INTERNAL,
    };
    Failure::new(code, e)
}
