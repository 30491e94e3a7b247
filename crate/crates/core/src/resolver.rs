//! Pronoun coindexing and referent sets for definite descriptions.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::closure::{trivial_value, ClosureError, UnscopedProp};
use crate::evaluator::{evaluate, Assignment, EvalError};
use crate::lf::{beta_reduce, Quant, SemType, Term};
use crate::parser::Hypothesis;
use crate::scoper::scope_description;
use crate::world::WorldModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarSource {
    Context,
    CurrentSentence,
}

/// Something a pronoun can be coindexed with: a variable or a proper noun.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Antecedent {
    pub term: Term,
    pub source: VarSource,
}

/// Antecedents available from the preceding context, most recent first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ContextVars {
    pub vars: Vec<Antecedent>,
}

impl ContextVars {
    /// Context variables (most recent first) followed by context proper
    /// nouns.
    pub fn new(vars: &[String], proper_nouns: &[String]) -> Self {
        let vars = vars
            .iter()
            .map(|v| Term::var(v.clone()))
            .chain(proper_nouns.iter().map(|c| Term::cnst(c.clone())))
            .unique()
            .map(|term| Antecedent {
                term,
                source: VarSource::Context,
            })
            .collect();
        ContextVars { vars }
    }
}

fn distinct_pronouns(t: &Term) -> Vec<String> {
    let mut out = Vec::new();
    t.visit(&mut |n| {
        if let Term::Pro(v) = n {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
    });
    out
}

/// Quantified variables in surface order (except those introduced by
/// closure), then proper nouns.
fn sentence_antecedents(t: &Term, introduced: &[String]) -> Vec<Antecedent> {
    let mut vars = Vec::new();
    t.visit(&mut |n| {
        if let Term::QTerm { var, .. } = n {
            if !introduced.contains(var) {
                vars.push(var.clone());
            }
        }
    });
    vars.into_iter()
        .map(Term::var)
        .chain(t.entity_constants().into_iter().map(Term::cnst))
        .unique()
        .map(|term| Antecedent {
            term,
            source: VarSource::CurrentSentence,
        })
        .collect()
}

fn replace_pro(t: &Term, var: &str, with: &Term) -> Term {
    t.map_bottom_up(&mut |n| match n {
        Term::Pro(v) if v == var => with.clone(),
        other => other,
    })
}

/// Every total assignment of the pronouns in `p` to antecedents, context
/// antecedents first.
pub fn coindex_candidates(p: &UnscopedProp, ctx: &ContextVars) -> Vec<UnscopedProp> {
    let pronouns = distinct_pronouns(&p.body);
    if pronouns.is_empty() {
        return vec![p.clone()];
    }
    let mut cands: Vec<Antecedent> = ctx.vars.clone();
    for a in sentence_antecedents(&p.body, &p.introduced) {
        if !cands.iter().any(|c| c.term == a.term) {
            cands.push(a);
        }
    }
    if cands.is_empty() {
        return vec![];
    }
    pronouns
        .iter()
        .map(|_| cands.iter())
        .multi_cartesian_product()
        .map(|choice| {
            let mut body = p.body.clone();
            for (pro, a) in pronouns.iter().zip(choice) {
                body = replace_pro(&body, pro, &a.term);
            }
            UnscopedProp {
                body,
                introduced: p.introduced.clone(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("no definite description marked `{0}`")]
    UnknownMarker(String),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Variables of the definite descriptions in `t`, in surface order.
pub fn definite_markers(t: &Term) -> Vec<String> {
    let mut out = Vec::new();
    t.visit(&mut |n| {
        if let Term::QTerm {
            quant: Quant::The,
            var,
            ..
        } = n
        {
            out.push(var.clone());
        }
    });
    out
}

/// Entities satisfying the restrictor of the definite marked `marker`, as
/// built so far in `hyp`. Recomputed from scratch on every call.
pub fn referent_set(hyp: &Hypothesis, marker: &str, world: &WorldModel) -> Result<BTreeSet<String>, ResolveError> {
    let (vars, body) = hyp.sem.peel_lams(hyp.pending.len());
    let mut restrictor = None;
    body.visit(&mut |n| {
        if let Term::QTerm {
            quant: Quant::The,
            var,
            restrictor: r,
        } = n
        {
            if var == marker && restrictor.is_none() {
                restrictor = Some((**r).clone());
            }
        }
    });
    let mut r = restrictor.ok_or_else(|| ResolveError::UnknownMarker(marker.to_string()))?;
    // Pending functional arguments used inside the description get their
    // trivial values; pending entities are left free and closed below.
    let mut functional = false;
    for (v, cat) in vars.iter().zip(&hyp.pending) {
        let ty = cat.sem_type();
        if ty != SemType::E && r.raw_free_vars().contains(v) {
            r = r.subst(v, &trivial_value(&ty, v)?);
            functional = true;
        }
    }
    if functional {
        r = beta_reduce(&r).map_err(ClosureError::from)?;
    }
    for pro in distinct_pronouns(&r) {
        r = replace_pro(&r, &pro, &Term::var(pro.clone()));
    }
    let mut f = scope_description(&r).into_iter().next().unwrap_or(r);
    for v in f.free_vars() {
        if v != marker {
            f = Term::scoped(Quant::Exists, v, Term::True, f);
        }
    }
    let mut out = BTreeSet::new();
    for e in world.entities() {
        let g = Assignment::from([(marker.to_string(), e.clone())]);
        if evaluate(&f, world, &g)? {
            out.insert(e.clone());
        }
    }
    Ok(out)
}
