//! The one-step iterator law: firing an iterator's constructor rule and
//! then settling the copy/erase pairs gives ⇓T⟦one unfolding⟧.

use thiserror::Error;

use crate::engine::quiesce_management;
use crate::lang::subst;
use crate::lang::Term;
use crate::net::{active_pairs, apply_rule, net_iso, Net, NetError};
use crate::oracle::subst_step;
use crate::system::{gen_system, GenError};
use crate::translate::{token_on_root, translate, translate_by_params_in, TranslateError};

#[derive(Debug, Error)]
pub enum LawError {
    #[error("`{0}` is not an iterator over a constructor")]
    NotApplicable(String),
    #[error("the constructor rule did not fire within {0} interactions")]
    NotReached(usize),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Clone, Debug)]
pub struct StepLaw {
    /// The unfolded term the net is compared with.
    pub unfolded: Term,
    pub fired: Net,
    pub expected: Net,
    pub holds: bool,
}

/// One unfolding of an iterator whose scrutinee is constructor-headed.
pub fn unfold(t: &Term) -> Option<Term> {
    Some(match t {
        Term::IterBool {
            on_true,
            on_false,
            scrutinee,
        } => match &**scrutinee {
            Term::True => (**on_true).clone(),
            Term::False => (**on_false).clone(),
            _ => return None,
        },
        Term::IterNat {
            binder,
            step,
            zero,
            scrutinee,
        } => match &**scrutinee {
            Term::Zero => (**zero).clone(),
            Term::Suc(pred) => {
                let rec =
                    Term::iter_nat(binder, (**step).clone(), (**zero).clone(), (**pred).clone());
                subst(step, binder, &rec)
            }
            _ => return None,
        },
        Term::IterList {
            head,
            acc,
            step,
            nil,
            scrutinee,
        } => match &**scrutinee {
            Term::Nil => (**nil).clone(),
            Term::Cons(h, tail) => {
                let rec = Term::iter_list(
                    head,
                    acc,
                    (**step).clone(),
                    (**nil).clone(),
                    (**tail).clone(),
                );
                subst_step(step, head, h, acc, &rec)
            }
            _ => return None,
        },
        _ => return None,
    })
}

/// Checks the law for `t`, which may be open. Iterators inside the
/// unfolded term must have parameters equal to some occurrence in `t`.
pub fn iterator_step(t: &Term) -> Result<StepLaw, LawError> {
    let unfolded = unfold(t).ok_or_else(|| LawError::NotApplicable(t.to_string()))?;
    let (system, table) = gen_system(t)?;
    let d = &table.descriptors()[0];
    let tr = translate(t, &table)?;
    let free = tr.free.clone();
    let mut net = token_on_root(tr.net);

    const LIMIT: usize = 16;
    let mut fired_case = false;
    for _ in 0..LIMIT {
        let Some(&pair) = active_pairs(&net).first() else {
            break;
        };
        let fired = apply_rule(&mut net, pair, &system)?;
        if fired.rule.0 == d.computation && fired.rule.1 != crate::net::SymbolId::TOKEN {
            fired_case = true;
            break;
        }
    }
    if !fired_case {
        return Err(LawError::NotReached(LIMIT));
    }
    quiesce_management(&mut net, &system, 1_000_000)?;
    let expected = token_on_root(translate_by_params_in(&unfolded, &table, &free)?.net);
    Ok(StepLaw {
        holds: net_iso(&net, &expected),
        unfolded,
        fired: net,
        expected,
    })
}
