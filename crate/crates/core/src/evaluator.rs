//! Dynamic evaluation against world models, context update and
//! plausibility.
//!
//! Evaluation follows dynamic predicate logic: a formula maps an input
//! assignment to the set of output assignments that verify it.
//! Existentials extend the assignment, conjunction feeds the outputs of its
//! left conjunct into its right, and implication, universals and `no` are
//! tests that thread antecedent or restrictor outputs into the rest.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ground::{solve, GroundError, Grounder};
use crate::lf::{fresh_name, Quant, Term};
use crate::world::WorldModel;

pub type Assignment = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown predicate `{0}/{1}`")]
    UnknownPredicate(String, usize),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("`{0}` is not a scoped formula")]
    NotScoped(String),
    #[error("free variable `{0}` is not bound by the context")]
    UnresolvableFreeVariable(String),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// Truth of `f` in `m` under `g`.
pub fn evaluate(f: &Term, m: &WorldModel, g: &Assignment) -> Result<bool, EvalError> {
    truth(f, m, g)
}

/// Whether `f` has an output on `g`, stopping at the first witness.
fn truth(f: &Term, m: &WorldModel, g: &Assignment) -> Result<bool, EvalError> {
    match f {
        Term::True => Ok(true),
        Term::And(l, r) => {
            for h in outputs(l, m, g)? {
                if truth(r, m, &h)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Term::Impl(a, c) => {
            for h in outputs(a, m, g)? {
                if !truth(c, m, &h)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Term::Scoped {
            quant,
            var,
            restrictor,
            body,
        } => {
            let mut g1 = g.clone();
            for d in m.entities() {
                g1.insert(var.clone(), d.clone());
                for h in outputs(restrictor, m, &g1)? {
                    let b = truth(body, m, &h)?;
                    match quant {
                        Quant::Exists | Quant::The if b => return Ok(true),
                        Quant::Forall if !b => return Ok(false),
                        Quant::No if b => return Ok(false),
                        _ => {}
                    }
                }
            }
            Ok(matches!(quant, Quant::Forall | Quant::No))
        }
        _ => Ok(!outputs(f, m, g)?.is_empty()),
    }
}

/// Output assignments of `f` on input `g`.
pub fn outputs(f: &Term, m: &WorldModel, g: &Assignment) -> Result<Vec<Assignment>, EvalError> {
    match f {
        Term::True => Ok(vec![g.clone()]),
        Term::Const(p) => atom(p, &[], m, g).map(|b| if b { vec![g.clone()] } else { vec![] }),
        Term::App(h, args) => {
            let Term::Const(p) = &**h else {
                return Err(EvalError::NotScoped(f.to_string()));
            };
            atom(p, args, m, g).map(|b| if b { vec![g.clone()] } else { vec![] })
        }
        Term::And(l, r) => {
            let mut out = Vec::new();
            for h in outputs(l, m, g)? {
                for k in outputs(r, m, &h)? {
                    if !out.contains(&k) {
                        out.push(k);
                    }
                }
            }
            Ok(out)
        }
        Term::Impl(a, c) => {
            for h in outputs(a, m, g)? {
                if outputs(c, m, &h)?.is_empty() {
                    return Ok(vec![]);
                }
            }
            Ok(vec![g.clone()])
        }
        Term::Scoped {
            quant,
            var,
            restrictor,
            body,
        } => {
            let mut verified = Vec::new();
            let mut all = true;
            for d in m.entities() {
                let mut g1 = g.clone();
                g1.insert(var.clone(), d.clone());
                for h in outputs(restrictor, m, &g1)? {
                    let bs = outputs(body, m, &h)?;
                    if bs.is_empty() {
                        all = false;
                    }
                    for k in bs {
                        if !verified.contains(&k) {
                            verified.push(k);
                        }
                    }
                }
            }
            Ok(match quant {
                Quant::Exists | Quant::The => verified,
                Quant::Forall => {
                    if all {
                        vec![g.clone()]
                    } else {
                        vec![]
                    }
                }
                Quant::No => {
                    if verified.is_empty() {
                        vec![g.clone()]
                    } else {
                        vec![]
                    }
                }
            })
        }
        Term::Var(_) | Term::Lam(..) | Term::QTerm { .. } | Term::Pro(_) => {
            Err(EvalError::NotScoped(f.to_string()))
        }
    }
}

/// Propositional arguments are opaque individuals, as in grounding.
fn opaque(t: &Term, g: &Assignment) -> Result<String, EvalError> {
    if t.contains_lam() || t.contains_qterm() || t.contains_pro() {
        return Err(EvalError::NotScoped(t.to_string()));
    }
    let free = t.free_vars();
    if let Some(v) = free.iter().find(|v| !g.contains_key(*v)) {
        return Err(EvalError::UnboundVariable(v.clone()));
    }
    let closed = t.map_bottom_up(&mut |n| match n {
        Term::Var(v) if free.contains(&v) => Term::Const(g[&v].clone()),
        other => other,
    });
    Ok(format!("[{closed}]"))
}

fn atom(p: &str, args: &[Term], m: &WorldModel, g: &Assignment) -> Result<bool, EvalError> {
    if !m.declares(p, args.len()) {
        return Err(EvalError::UnknownPredicate(p.to_string(), args.len()));
    }
    let vals = args
        .iter()
        .map(|a| match a {
            Term::Var(v) => g.get(v).cloned().ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Const(c) if m.is_entity(c) => Ok(c.clone()),
            Term::Const(c) => Err(EvalError::UnknownEntity(c.clone())),
            other => opaque(other, g),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(m.holds(p, &vals))
}

/// Leading `exists(v,true,...)` binders and the formula under them.
pub fn context_binders(ctx: &Term) -> (Vec<String>, &Term) {
    let mut vars = Vec::new();
    let mut cur = ctx;
    while let Term::Scoped {
        quant: Quant::Exists,
        var,
        restrictor,
        body,
    } = cur
    {
        if !restrictor.is_true() {
            break;
        }
        vars.push(var.clone());
        cur = body;
    }
    (vars, cur)
}

/// Inserts a scoped sentence into the context: the sentence goes under the
/// context's existentials, and its own wide existentials are lifted to
/// join them so later sentences can refer to their variables.
pub fn update_context(ctx: Option<&Term>, sentence: &Term) -> Result<Vec<Term>, EvalError> {
    let (binders, core) = match ctx {
        Some(c) => context_binders(c),
        None => (vec![], &Term::True),
    };
    if let Some(v) = sentence.free_vars().into_iter().find(|v| !binders.contains(v)) {
        return Err(EvalError::UnresolvableFreeVariable(v));
    }
    if ctx.is_none() {
        return Ok(vec![sentence.clone()]);
    }
    let (lifted, inner) = lift_existentials(sentence, ctx.map(|c| c.all_var_names()).unwrap_or_default());
    let mut body = Term::and_simplified(core.clone(), inner);
    for v in lifted.iter().rev().chain(binders.iter().rev()) {
        body = Term::scoped(Quant::Exists, v.clone(), Term::True, body);
    }
    Ok(vec![body])
}

/// Context form of a first sentence: wide existentials become
/// `exists(v,true,...)` binders with their restrictors conjoined below.
pub fn context_form(sentence: &Term) -> Term {
    let (lifted, inner) = lift_existentials(sentence, BTreeSet::new());
    lifted
        .iter()
        .rev()
        .fold(inner, |acc, v| Term::scoped(Quant::Exists, v.clone(), Term::True, acc))
}

/// Strips the leading existentials of `s`, renaming any that clash with
/// `avoid`. Returns their variables and the body with their restrictors
/// conjoined in front.
fn lift_existentials(s: &Term, mut avoid: BTreeSet<String>) -> (Vec<String>, Term) {
    let mut vars = Vec::new();
    let mut restrictors = Vec::new();
    let mut cur = s.clone();
    while let Term::Scoped {
        quant: Quant::Exists,
        var,
        restrictor,
        body,
    } = cur
    {
        let (var, restrictor, body) = if avoid.contains(&var) {
            let fresh = fresh_name(&var, &avoid.union(&body.all_var_names()).cloned().collect());
            let r = restrictor.subst(&var, &Term::var(&fresh));
            let b = body.subst(&var, &Term::var(&fresh));
            (fresh, r, b)
        } else {
            (var, *restrictor, *body)
        };
        avoid.insert(var.clone());
        vars.push(var);
        restrictors.push(restrictor);
        cur = body;
    }
    let inner = restrictors
        .into_iter()
        .rev()
        .fold(cur, |acc, r| Term::and_simplified(r, acc));
    (vars, inner)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub plausible: bool,
    /// Name of the violated constraint, or `facts` when the proposition
    /// contradicts the world's facts alone.
    pub violated: Option<String>,
}

impl Verdict {
    pub fn ok() -> Verdict {
        Verdict {
            plausible: true,
            violated: None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violated {
            None => f.write_str("PLAUSIBLE"),
            Some(c) => write!(f, "IMPLAUSIBLE({c})"),
        }
    }
}

const PLAUSIBILITY_ATOM_BUDGET: usize = 200_000;

/// Whether `p` is consistent with the world. Entities are fixed, and
/// predicates with facts are closed; other predicates are unconstrained
/// except by the world's constraints. Constants that are not entities
/// denote additional individuals.
pub fn plausible(p: &Term, world: &WorldModel) -> Result<Verdict, EvalError> {
    let mut domain: Vec<String> = world.entities().to_vec();
    let mut extra = |t: &Term| {
        for c in t.entity_constants() {
            if !domain.contains(&c) {
                domain.push(c);
            }
        }
    };
    extra(p);
    for c in world.constraints() {
        extra(&c.formula);
    }
    let consts: HashMap<String, String> = domain.iter().map(|d| (d.clone(), d.clone())).collect();
    let fixed = |pred: &str, args: &[String]| {
        world
            .has_facts(pred, args.len())
            .then(|| world.holds(pred, args))
    };
    let mut g = Grounder::new(domain, consts, &fixed, PLAUSIBILITY_ATOM_BUDGET);
    let gp = g.ground(p)?;
    let mut cs = Vec::new();
    for c in world.constraints() {
        cs.push((c.name.clone(), g.ground(&c.formula)?));
    }
    let n = g.atoms().len();
    let mut props = vec![gp];
    if solve(&props, n).is_none() {
        return Ok(Verdict {
            plausible: false,
            violated: Some("facts".into()),
        });
    }
    for (name, c) in cs {
        props.push(c);
        if solve(&props, n).is_none() {
            return Ok(Verdict {
                plausible: false,
                violated: Some(name),
            });
        }
    }
    Ok(Verdict::ok())
}
