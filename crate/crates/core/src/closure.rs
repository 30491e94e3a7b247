//! Existential closure of prefix meanings.

use serde::Serialize;
use thiserror::Error;

use crate::lf::{beta_reduce, Quant, ReduceError, SemType, Term};
use crate::parser::Hypothesis;

/// A proposition with quantifier terms and pronouns still in situ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnscopedProp {
    pub body: Term,
    /// Variables of the `q(exists,v,true)` terms introduced by closure.
    pub introduced: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("cannot close over an argument of type {0}")]
    UnsupportedArgumentType(SemType),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

/// Trivial value for a functional argument: the identity for `X->X`,
/// the constantly true function for anything else ending in `t`.
pub(crate) fn trivial_value(ty: &SemType, var: &str) -> Result<Term, ClosureError> {
    if let SemType::Fn(a, r) = ty {
        if a == r {
            let f = format!("{var}_id");
            return Ok(Term::lam(f.clone(), Term::var(f)));
        }
    }
    if ty.ends_in_t() {
        let (args, _) = ty.uncurry();
        let vars: Vec<String> = (0..args.len()).map(|i| format!("{var}_c{i}")).collect();
        return Ok(Term::lams(&vars, Term::True));
    }
    Err(ClosureError::UnsupportedArgumentType(ty.clone()))
}

pub fn close_existentially(h: &Hypothesis) -> Result<UnscopedProp, ClosureError> {
    let (vars, body) = h.sem.peel_lams(h.pending.len());
    let types: Vec<SemType> = h.pending.iter().map(|c| c.sem_type()).collect();
    let mut body = body.clone();
    let mut entity_vars = Vec::new();
    let mut functional = false;
    for (v, ty) in vars.iter().zip(&types) {
        match ty {
            SemType::E => entity_vars.push(v.clone()),
            SemType::T => return Err(ClosureError::UnsupportedArgumentType(SemType::T)),
            ty => {
                body = body.subst(v, &trivial_value(ty, v)?);
                functional = true;
            }
        }
    }
    if functional {
        body = beta_reduce(&body)?;
    }
    let mut introduced = Vec::new();
    for v in entity_vars {
        if body.raw_free_vars().contains(&v) {
            body = body.replace_first_occurrence(&v, &Term::qterm(Quant::Exists, v.clone(), Term::True));
            introduced.push(v);
        }
    }
    Ok(UnscopedProp {
        body: body.simplify_true_conjuncts(),
        introduced,
    })
}
