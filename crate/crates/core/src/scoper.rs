//! Outside-in discharge of in-situ quantifier terms.
//!
//! A reading is built by repeatedly choosing one of the remaining
//! top-level quantifier terms as the next (narrower) scope. Terms nested in
//! a restrictor are discharged inside the restrictor conjunct holding them. Choices are tried
//! in surface order, so the first reading has the leftmost quantifier
//! widest.

use serde::Serialize;
use thiserror::Error;

use crate::lf::{Quant, Term};

/// Scope order recorded for one clause node, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScopeRecord {
    pub node: String,
    pub discharged: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopedReading {
    pub formula: Term,
    /// Top-level discharge order, outermost first.
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("chosen reading is not among the latest scopings")]
pub struct InconsistentPreference;

struct QInfo {
    quant: Quant,
    var: String,
    restrictor: Term,
}

/// Top-level quantifier terms in surface order (not descending into
/// restrictors).
fn top_level_qterms(t: &Term, out: &mut Vec<QInfo>) {
    match t {
        Term::QTerm {
            quant,
            var,
            restrictor,
        } => out.push(QInfo {
            quant: *quant,
            var: var.clone(),
            restrictor: (**restrictor).clone(),
        }),
        _ => {
            for c in t.children() {
                top_level_qterms(c, out);
            }
        }
    }
}

/// Replaces the quantifier term binding `var` by the bare variable.
fn discharge_site(t: &Term, var: &str) -> Term {
    t.map_bottom_up(&mut |n| match n {
        Term::QTerm { var: v, .. } if v == var => Term::Var(v),
        other => other,
    })
}

/// Pairs `(a, b)`: `a` must outscope `b`.
fn pref_pairs(prefs: &[ScopeRecord], node: &str) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for r in prefs.iter().filter(|r| r.node == node) {
        for (i, a) in r.discharged.iter().enumerate() {
            for b in &r.discharged[i + 1..] {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    pairs
}

/// All admissible readings of `body` at clause `node`.
pub fn enumerate_scopings(body: &Term, prefs: &[ScopeRecord], node: &str) -> Vec<ScopedReading> {
    let pairs = pref_pairs(prefs, node);
    let mut out = Vec::new();
    for (formula, order) in scope_all(body, &pairs) {
        out.push(ScopedReading { formula, order });
    }
    out
}

/// Readings of a description's restrictor on its own, first reading first.
pub fn scope_description(restrictor: &Term) -> Vec<Term> {
    scope_restrictor(restrictor, &[]).into_iter().map(|(t, _)| t).collect()
}

fn scope_all(body: &Term, pairs: &[(String, String)]) -> Vec<(Term, Vec<String>)> {
    let mut qs = Vec::new();
    top_level_qterms(body, &mut qs);
    if qs.is_empty() {
        return vec![(body.clone(), vec![])];
    }
    let remaining: Vec<&str> = qs.iter().map(|q| q.var.as_str()).collect();
    let mut out = Vec::new();
    for q in &qs {
        if !can_go_next(q, &remaining, pairs) {
            continue;
        }
        let restrictors = scope_restrictor(&q.restrictor, pairs);
        let rest = discharge_site(body, &q.var);
        let bodies = scope_all(&rest, pairs);
        for (r, _) in &restrictors {
            for (b, inner) in &bodies {
                let mut order = vec![q.var.clone()];
                order.extend(inner.iter().cloned());
                out.push((
                    Term::scoped(q.quant, q.var.clone(), r.clone(), b.clone()),
                    order,
                ));
            }
        }
    }
    out
}

/// Restrictor conjuncts are scoped separately, so a quantifier nested in a
/// modifier takes scope within that modifier only.
fn scope_restrictor(r: &Term, pairs: &[(String, String)]) -> Vec<(Term, Vec<String>)> {
    match r {
        Term::And(a, b) if r.contains_qterm() => {
            let left = scope_restrictor(a, pairs);
            let right = scope_restrictor(b, pairs);
            let mut out = Vec::new();
            for (l, lo) in &left {
                for (r, ro) in &right {
                    let mut order = lo.clone();
                    order.extend(ro.iter().cloned());
                    out.push((Term::and(l.clone(), r.clone()), order));
                }
            }
            out
        }
        _ => scope_all(r, pairs),
    }
}

fn can_go_next(q: &QInfo, remaining: &[&str], pairs: &[(String, String)]) -> bool {
    let rfree = q.restrictor.raw_free_vars();
    let others = remaining.iter().filter(|v| **v != q.var);
    for o in others {
        // Free-variable constraint.
        if rfree.contains(*o) {
            return false;
        }
        if pairs.iter().any(|(a, b)| a == o && b == &q.var) {
            return false;
        }
    }
    true
}

/// Records the relative order of `chosen`, keeping only `eligible`
/// variables (closure-introduced ones are not carried across words).
pub fn persist_preference(
    prefs: &[ScopeRecord],
    node: &str,
    chosen: &ScopedReading,
    latest: &[ScopedReading],
    eligible: impl Fn(&str) -> bool,
) -> Result<Vec<ScopeRecord>, InconsistentPreference> {
    if !latest.iter().any(|r| r.order == chosen.order) {
        return Err(InconsistentPreference);
    }
    let discharged: Vec<String> = chosen
        .order
        .iter()
        .filter(|v| eligible(v))
        .cloned()
        .collect();
    let mut out: Vec<ScopeRecord> = prefs.iter().filter(|r| r.node != node).cloned().collect();
    // Keep recorded variables that are absent from this reading.
    let mut merged = discharged.clone();
    if let Some(old) = prefs.iter().find(|r| r.node == node) {
        for v in &old.discharged {
            if !merged.contains(v) {
                merged.push(v.clone());
            }
        }
    }
    out.push(ScopeRecord {
        node: node.to_string(),
        discharged: merged,
    });
    Ok(out)
}
