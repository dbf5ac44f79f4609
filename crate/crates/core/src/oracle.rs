//! Reference big-step call-by-name evaluator.
//!
//! Evaluation is weak: it stops at abstractions and at constructors, leaving
//! their arguments untouched. `deep_eval` keeps going under `suc`/`cons` so
//! numerals and lists can be observed in full.

use std::collections::HashSet;

use thiserror::Error;

use crate::lang::{free_vars, fresh_name, subst, Term};

/// Default budget, counted in big-step rule applications.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("fuel exhausted after {0} rule applications")]
    FuelExhausted(u64),
    #[error("evaluation stuck at `{0}`")]
    Stuck(String),
}

/// Evaluates a closed term to weak canonical form.
pub fn eval_cbn(t: &Term, fuel: u64) -> Result<Term, EvalError> {
    Evaluator::new(fuel).eval(t)
}

/// Evaluates a closed term and then, recursively, the arguments of every
/// `suc` and `cons` in the result. Abstractions are returned as they are.
pub fn deep_eval(t: &Term, fuel: u64) -> Result<Term, EvalError> {
    Evaluator::new(fuel).deep(t)
}

/// An evaluator with a fuel tank shared across calls.
#[derive(Clone, Debug)]
pub struct Evaluator {
    budget: u64,
    used: u64,
}

impl Evaluator {
    pub fn new(budget: u64) -> Self {
        Evaluator { budget, used: 0 }
    }

    /// Rule applications performed so far.
    pub fn used(&self) -> u64 {
        self.used
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        if self.used >= self.budget {
            return Err(EvalError::FuelExhausted(self.used));
        }
        self.used += 1;
        Ok(())
    }

    pub fn eval(&mut self, t: &Term) -> Result<Term, EvalError> {
        let mut cur = t.clone();
        loop {
            self.tick()?;
            cur = match cur {
                v if v.is_canonical() => return Ok(v),
                Term::App(fun, arg) => match self.eval(&fun)? {
                    Term::Abs(x, _, body) => subst(&body, &x, &arg),
                    other => {
                        return Err(EvalError::Stuck(
                            Term::App(Box::new(other), arg).to_string(),
                        ))
                    }
                },
                Term::IterBool {
                    on_true,
                    on_false,
                    scrutinee,
                } => match self.eval(&scrutinee)? {
                    Term::True => *on_true,
                    Term::False => *on_false,
                    other => return Err(EvalError::Stuck(other.to_string())),
                },
                Term::IterNat {
                    binder,
                    step,
                    zero,
                    scrutinee,
                } => match self.eval(&scrutinee)? {
                    Term::Zero => *zero,
                    Term::Suc(pred) => {
                        let rec = Term::IterNat {
                            binder: binder.clone(),
                            step: step.clone(),
                            zero,
                            scrutinee: pred,
                        };
                        subst(&step, &binder, &rec)
                    }
                    other => return Err(EvalError::Stuck(other.to_string())),
                },
                Term::IterList {
                    head,
                    acc,
                    step,
                    nil,
                    scrutinee,
                } => match self.eval(&scrutinee)? {
                    Term::Nil => *nil,
                    Term::Cons(h, tail) => {
                        let rec = Term::IterList {
                            head: head.clone(),
                            acc: acc.clone(),
                            step: step.clone(),
                            nil,
                            scrutinee: tail,
                        };
                        subst_step(&step, &head, &h, &acc, &rec)
                    }
                    other => return Err(EvalError::Stuck(other.to_string())),
                },
                Term::Var(x) => return Err(EvalError::Stuck(x)),
                _ => unreachable!("canonical forms are handled above"),
            };
        }
    }

    pub fn deep(&mut self, t: &Term) -> Result<Term, EvalError> {
        match self.eval(t)? {
            Term::Suc(p) => Ok(Term::Suc(Box::new(self.deep(&p)?))),
            Term::Cons(h, tl) => {
                let h = self.deep(&h)?;
                let tl = self.deep(&tl)?;
                Ok(Term::Cons(Box::new(h), Box::new(tl)))
            }
            v => Ok(v),
        }
    }
}

/// `step{head:=h}{acc:=rec}` as a simultaneous substitution. When the two
/// binders coincide the inner one (`acc`) shadows the outer.
pub(crate) fn subst_step(step: &Term, head: &str, h: &Term, acc: &str, rec: &Term) -> Term {
    if head == acc {
        return subst(step, acc, rec);
    }
    let fv_h = free_vars(h);
    if !fv_h.iter().any(|v| v == acc) {
        return subst(&subst(step, head, h), acc, rec);
    }
    let mut avoid: HashSet<String> = fv_h.into_iter().collect();
    avoid.extend(free_vars(step));
    avoid.insert(head.to_string());
    let tmp = fresh_name(acc, &avoid);
    let step = subst(step, acc, &Term::Var(tmp.clone()));
    subst(&subst(&step, head, h), &tmp, rec)
}
