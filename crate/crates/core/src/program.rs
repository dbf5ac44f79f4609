//! A compiled program: the term, its type, its interaction system, and
//! the agreement check between the net and the reference evaluator.

use thiserror::Error;

use crate::engine::{self, reduce_deep, reduce_with, RunError, Strategy};
use crate::lang::{alpha_eq, parse, typecheck, ParseError, Term, Type, TypeError};
use crate::net::{InteractionSystem, Net, SymbolId};
use crate::oracle::{self, EvalError};
use crate::system::{gen_system, GenError, SymbolTable};
use crate::translate::{attach_token, readback_typed, translate, TranslateError};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("parse error at {}:{}: {}", .0.line, .0.column, .0.message)]
    Parse(ParseError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error("program must be closed, free variables: {0:?}")]
    Open(Vec<String>),
    #[error(transparent)]
    Gen(#[from] GenError),
}

#[derive(Clone, Debug)]
pub struct Program {
    pub term: Term,
    pub ty: Type,
    pub system: InteractionSystem,
    pub table: SymbolTable,
}

impl Program {
    pub fn from_source(source: &str) -> Result<Program, CompileError> {
        let term = parse(source).map_err(CompileError::Parse)?;
        Program::new(term)
    }

    pub fn new(term: Term) -> Result<Program, CompileError> {
        let ty = typecheck(&term)?;
        let fv = crate::lang::free_vars(&term);
        if !fv.is_empty() {
            return Err(CompileError::Open(fv));
        }
        let (system, table) = gen_system(&term)?;
        Ok(Program {
            term,
            ty,
            system,
            table,
        })
    }

    /// T⟦t⟧ without a token.
    pub fn net(&self) -> Result<Net, TranslateError> {
        translate(&self.term, &self.table).map(|tr| tr.net)
    }

    /// ⇓T⟦t⟧.
    pub fn initial(&self) -> Result<Net, TranslateError> {
        attach_token(translate(&self.term, &self.table)?)
    }

    pub fn readback(&self, net: &Net) -> Result<Term, crate::translate::ReadbackError> {
        readback_typed(net, &self.system, &self.table, Some(&self.ty))
    }
}

/// Outcome of comparing the net with the reference evaluator.
#[derive(Clone, Debug)]
pub struct Agreement {
    pub net_result: Term,
    pub oracle_result: Term,
    pub agree: bool,
    pub steps: u64,
    /// Most ⇓ agents seen in any intermediate net.
    pub max_tokens: usize,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("reference evaluator: {0}")]
    Oracle(#[from] EvalError),
}

impl From<TranslateError> for CheckError {
    fn from(e: TranslateError) -> Self {
        CheckError::Run(e.into())
    }
}

impl Program {
    /// Reduces ⇓T⟦t⟧ to normal form and compares its readback with the
    /// weak call-by-name value of `t`.
    pub fn check_weak(&self, strategy: Strategy, fuel: u64) -> Result<Agreement, CheckError> {
        let mut tokens_ok = 0usize;
        let report = reduce_with(self.initial()?, &self.system, strategy, fuel, |_, net| {
            tokens_ok = tokens_ok.max(net.count_symbol(SymbolId::TOKEN));
        })
        .map_err(RunError::from)?;
        if report.fuel_exhausted {
            return Err(RunError::FuelExhausted(report.steps).into());
        }
        let net_result = self.readback(&report.net).map_err(RunError::from)?;
        let oracle_result = oracle::eval_cbn(&self.term, oracle::DEFAULT_FUEL)?;
        Ok(Agreement {
            agree: alpha_eq(&net_result, &oracle_result),
            net_result,
            oracle_result,
            steps: report.steps,
            max_tokens: report.max_tokens.max(tokens_ok),
        })
    }

    /// As `check_weak` with full values on both sides.
    pub fn check_deep(&self, strategy: Strategy, fuel: u64) -> Result<Agreement, CheckError> {
        let out = reduce_deep(
            &self.term,
            Some(&self.ty),
            &self.system,
            &self.table,
            strategy,
            fuel,
        )?;
        let oracle_result = oracle::deep_eval(&self.term, oracle::DEFAULT_FUEL)?;
        Ok(Agreement {
            agree: alpha_eq(&out.term, &oracle_result),
            net_result: out.term,
            oracle_result,
            steps: out.steps,
            max_tokens: 0,
        })
    }
}

/// Default fuel, honouring `FUN_FUEL` when it holds a number.
pub fn default_fuel() -> u64 {
    std::env::var("FUN_FUEL")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(engine::DEFAULT_FUEL)
}
