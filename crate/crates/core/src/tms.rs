//! Source-tagged proposition store.
//!
//! Every asserted proposition gets a fresh source tag; conclusions drawn by
//! modus ponens carry the union of their premises' tags, so retracting a
//! source removes exactly what depended on it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ground::{solve, GroundError, Grounder, Prop};
use crate::lf::{alpha_eq, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceId(pub u32);

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

impl Serialize for SourceId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropRecord {
    pub prop: Term,
    pub sources: BTreeSet<SourceId>,
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmsError {
    #[error("proposition `{0}` is not closed and scoped")]
    NotClosed(String),
    #[error("signature too large for finite-model entailment ({0})")]
    SignatureTooLarge(String),
    #[error("unknown source {0}")]
    UnknownSource(SourceId),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// A finite model: domain, constant denotations and true atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Countermodel {
    pub domain: Vec<String>,
    pub constants: BTreeMap<String, String>,
    pub facts: Vec<String>,
}

impl fmt::Display for Countermodel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "domain {{{}}}", self.domain.join(","))?;
        for (c, d) in &self.constants {
            write!(f, "; {c}={d}")?;
        }
        write!(f, "; true: {{{}}}", self.facts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entailment {
    pub holds: bool,
    /// Present whenever `holds` is false.
    pub countermodel: Option<Countermodel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntailmentBudget {
    /// Maximum ground atoms per model size.
    pub max_atoms: usize,
    /// Maximum constant interpretations per model size.
    pub max_interpretations: usize,
}

impl Default for EntailmentBudget {
    fn default() -> Self {
        EntailmentBudget {
            max_atoms: 4096,
            max_interpretations: 20_000,
        }
    }
}

fn signature(t: &Term, preds: &mut BTreeSet<(String, usize)>) {
    t.visit(&mut |n| {
        if let Term::App(h, args) = n {
            if let Term::Const(p) = &**h {
                preds.insert((p.clone(), args.len()));
            }
        }
    });
}

/// Whether `b` is true in every model of size `1..=k` in which `a` is
/// true, over the predicates and constants of `a` and `b`.
pub fn entails(a: &Term, b: &Term, k: usize, budget: EntailmentBudget) -> Result<Entailment, TmsError> {
    for t in [a, b] {
        if !t.free_vars().is_empty() || t.contains_qterm() || t.contains_lam() || t.contains_pro() {
            return Err(TmsError::NotClosed(t.to_string()));
        }
    }
    let mut preds = BTreeSet::new();
    signature(a, &mut preds);
    signature(b, &mut preds);
    let consts: Vec<String> = a
        .entity_constants()
        .into_iter()
        .chain(b.entity_constants())
        .unique()
        .filter(|c| !preds.iter().any(|(p, n)| p == c && *n == 0))
        .collect();
    let open = |_: &str, _: &[String]| None;
    for n in 1..=k.max(1) {
        let atoms: usize = preds.iter().map(|(_, ar)| n.pow(*ar as u32)).sum();
        if atoms > budget.max_atoms {
            return Err(TmsError::SignatureTooLarge(format!("{atoms} ground atoms at domain size {n}")));
        }
        let interps = n.checked_pow(consts.len() as u32).unwrap_or(usize::MAX);
        if interps > budget.max_interpretations {
            return Err(TmsError::SignatureTooLarge(format!(
                "{interps} constant interpretations at domain size {n}"
            )));
        }
        let domain: Vec<String> = (1..=n).map(|i| format!("d{i}")).collect();
        for choice in tuples(consts.len(), n) {
            let interp: HashMap<String, String> = consts
                .iter()
                .zip(&choice)
                .map(|(c, &i)| (c.clone(), domain[i].clone()))
                .collect();
            let mut g = Grounder::new(domain.clone(), interp.clone(), &open, budget.max_atoms);
            let ga = g.ground(a)?;
            let gb = g.ground(b)?;
            let n_atoms = g.atoms().len();
            if let Some(val) = solve(&[ga, Prop::negate(gb)], n_atoms) {
                let facts = g
                    .atoms()
                    .iter()
                    .zip(&val)
                    .filter(|(_, v)| **v)
                    .map(|((p, args), _)| {
                        if args.is_empty() {
                            p.clone()
                        } else {
                            format!("{p}({})", args.join(","))
                        }
                    })
                    .collect();
                return Ok(Entailment {
                    holds: false,
                    countermodel: Some(Countermodel {
                        domain,
                        constants: interp.into_iter().collect(),
                        facts,
                    }),
                });
            }
        }
    }
    Ok(Entailment {
        holds: true,
        countermodel: None,
    })
}

/// All `k`-tuples over `0..n`; one empty tuple when `k == 0`.
fn tuples(k: usize, n: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (0..k).map(|_| 0..n).multi_cartesian_product().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetractReason {
    EntailmentFailure,
    Plausibility,
}

impl fmt::Display for RetractReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RetractReason::EntailmentFailure => "entailment-failure",
            RetractReason::Plausibility => "plausibility",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertOutcome {
    pub id: SourceId,
    /// Retracted source, with the countermodel that refuted entailment.
    pub retracted: Option<(SourceId, Countermodel)>,
    /// Records removed by the retraction.
    pub removed: Vec<PropRecord>,
    /// Conclusions added by forward chaining.
    pub derived: Vec<PropRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tms {
    records: Vec<PropRecord>,
    next: u32,
    pub domain_k: usize,
    pub budget: EntailmentBudget,
}

impl Default for Tms {
    fn default() -> Self {
        Tms::new(3)
    }
}

impl Tms {
    pub fn new(domain_k: usize) -> Self {
        Tms {
            records: Vec::new(),
            next: 1,
            domain_k,
            budget: EntailmentBudget::default(),
        }
    }

    /// Store whose first source tag is `u{first}`.
    pub fn starting_at(first: u32, domain_k: usize) -> Self {
        Tms {
            next: first,
            ..Tms::new(domain_k)
        }
    }

    pub fn records(&self) -> &[PropRecord] {
        &self.records
    }

    pub fn record(&self, id: SourceId) -> Option<&PropRecord> {
        self.records
            .iter()
            .find(|r| !r.derived && r.sources.len() == 1 && r.sources.contains(&id))
    }

    /// Stores `prop` under a fresh source. If `prev` names an earlier
    /// assertion that `prop` does not entail, that source is retracted.
    pub fn assert_prop(&mut self, prop: Term, prev: Option<SourceId>) -> Result<AssertOutcome, TmsError> {
        if !prop.free_vars().is_empty() || prop.contains_qterm() || prop.contains_lam() || prop.contains_pro() {
            return Err(TmsError::NotClosed(prop.to_string()));
        }
        let mut retracted = None;
        let mut removed = Vec::new();
        if let Some(prev_id) = prev {
            if let Some(prev_rec) = self.record(prev_id) {
                let e = entails(&prop, &prev_rec.prop, self.domain_k, self.budget)?;
                if !e.holds {
                    removed = self.retract(prev_id)?;
                    retracted = Some((prev_id, e.countermodel.expect("countermodel for refutation")));
                }
            }
        }
        let id = SourceId(self.next);
        self.next += 1;
        self.records.push(PropRecord {
            prop,
            sources: BTreeSet::from([id]),
            derived: false,
        });
        let derived = self.forward_chain();
        Ok(AssertOutcome {
            id,
            retracted,
            removed,
            derived,
        })
    }

    /// Modus ponens to a fixpoint.
    fn forward_chain(&mut self) -> Vec<PropRecord> {
        let mut added = Vec::new();
        loop {
            let mut new = None;
            'search: for imp in &self.records {
                let Term::Impl(ante, cons) = &imp.prop else {
                    continue;
                };
                for fact in &self.records {
                    if !alpha_eq(&fact.prop, ante) {
                        continue;
                    }
                    let sources: BTreeSet<SourceId> = imp.sources.union(&fact.sources).copied().collect();
                    let known = self
                        .records
                        .iter()
                        .any(|r| alpha_eq(&r.prop, cons) && r.sources.is_subset(&sources));
                    if !known {
                        new = Some(PropRecord {
                            prop: (**cons).clone(),
                            sources,
                            derived: true,
                        });
                        break 'search;
                    }
                }
            }
            match new {
                Some(r) => {
                    added.push(r.clone());
                    self.records.push(r);
                }
                None => return added,
            }
        }
    }

    /// Removes every record depending on `src`.
    pub fn retract(&mut self, src: SourceId) -> Result<Vec<PropRecord>, TmsError> {
        if !self.records.iter().any(|r| r.sources.contains(&src)) {
            return Err(TmsError::UnknownSource(src));
        }
        let (gone, kept): (Vec<_>, Vec<_>) = self
            .records
            .drain(..)
            .partition(|r| r.sources.contains(&src));
        self.records = kept;
        Ok(gone)
    }
}
