//! Checking many programs at once. Each program owns its net, so the work
//! splits cleanly across threads; reduction of a single net stays
//! sequential.

use thiserror::Error;

use crate::engine::Strategy;
use crate::program::{Agreement, CheckError, CompileError, Program};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error(transparent)]
    Compile(CompileError),
    #[error(transparent)]
    Check(CheckError),
}

/// How `check_all` runs its jobs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

/// Compiles and checks `source` against the reference evaluator, weakly and,
/// when `deep` is set, with full values too.
pub fn check_one(
    source: &str,
    strategy: Strategy,
    fuel: u64,
    deep: bool,
) -> Result<Vec<Agreement>, BatchError> {
    let p = Program::from_source(source).map_err(BatchError::Compile)?;
    let mut out = vec![p.check_weak(strategy, fuel).map_err(BatchError::Check)?];
    if deep {
        out.push(p.check_deep(strategy, fuel).map_err(BatchError::Check)?);
    }
    Ok(out)
}

/// Maps `f` over `items`, in parallel when the `parallel` feature is on and
/// `mode` asks for it. Results keep the input order.
pub fn map<T, R, F>(items: &[T], mode: Mode, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn check_all(
    sources: &[String],
    strategy: Strategy,
    fuel: u64,
    deep: bool,
    mode: Mode,
) -> Vec<Result<Vec<Agreement>, BatchError>> {
    map(sources, mode, |s| check_one(s, strategy, fuel, deep))
}
