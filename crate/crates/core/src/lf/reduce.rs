use thiserror::Error;

use super::{synth_type, Term, TypeEnv, TypeError};

/// Upper bound on contractions before a term is declared non-terminating.
const FUEL: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error(transparent)]
    TypeClash(#[from] TypeError),
    #[error("reduction did not terminate within {0} steps")]
    NonTerminating(usize),
}

/// Beta-normal form by leftmost-outermost reduction. The term is checked
/// for type clashes first; reduction itself is capture-avoiding.
pub fn beta_reduce(t: &Term) -> Result<Term, ReduceError> {
    synth_type(t, &mut TypeEnv::new())?;
    let mut fuel = FUEL;
    normalize(t.clone(), &mut fuel)
}

fn contract(fuel: &mut usize) -> Result<(), ReduceError> {
    if *fuel == 0 {
        return Err(ReduceError::NonTerminating(FUEL));
    }
    *fuel -= 1;
    Ok(())
}

/// Weak head normal form: no redex at the head of the spine.
fn whnf(mut t: Term, fuel: &mut usize) -> Result<Term, ReduceError> {
    loop {
        match t {
            Term::App(h, mut args) => {
                let h = whnf(*h, fuel)?;
                match h {
                    Term::Lam(v, body) => {
                        contract(fuel)?;
                        let first = args.remove(0);
                        t = Term::app(body.subst(&v, &first), args);
                    }
                    h => return Ok(Term::app(h, args)),
                }
            }
            other => return Ok(other),
        }
    }
}

fn normalize(t: Term, fuel: &mut usize) -> Result<Term, ReduceError> {
    let t = whnf(t, fuel)?;
    Ok(match t {
        Term::Const(_) | Term::Var(_) | Term::Pro(_) | Term::True => t,
        Term::App(h, args) => {
            let h = normalize(*h, fuel)?;
            let args = args
                .into_iter()
                .map(|a| normalize(a, fuel))
                .collect::<Result<Vec<_>, _>>()?;
            Term::app(h, args)
        }
        Term::Lam(v, b) => Term::lam(v, normalize(*b, fuel)?),
        Term::QTerm {
            quant,
            var,
            restrictor,
        } => Term::qterm(quant, var, normalize(*restrictor, fuel)?),
        Term::Scoped {
            quant,
            var,
            restrictor,
            body,
        } => Term::scoped(
            quant,
            var,
            normalize(*restrictor, fuel)?,
            normalize(*body, fuel)?,
        ),
        Term::And(l, r) => Term::and(normalize(*l, fuel)?, normalize(*r, fuel)?),
        Term::Impl(l, r) => Term::implies(normalize(*l, fuel)?, normalize(*r, fuel)?),
    })
}
