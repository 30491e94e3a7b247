//! Per-word pipeline: parse, close, coindex, scope, evaluate in context,
//! judge plausibility, and maintain the proposition store.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::closure::close_existentially;
use crate::evaluator::{context_binders, context_form, plausible, update_context, Verdict};
use crate::lexicon::Lexicon;
use crate::lf::{NameMap, Term, VarSort};
use crate::parser::{is_punctuation, Hypothesis, ParserConfig, ParserState, StepError};
use crate::report::{
    Event, HypothesisReport, PipelineReport, PropReport, ReadingReport, ReferentReport, StateReport, Status,
};
use crate::resolver::{coindex_candidates, definite_markers, referent_set, ContextVars};
use crate::scoper::{enumerate_scopings, persist_preference, ScopeRecord, ScopedReading};
use crate::tms::{RetractReason, SourceId, Tms, TmsError};
use crate::world::WorldModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub parser: ParserConfig,
    pub domain_k: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            parser: ParserConfig::default(),
            domain_k: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("session is blocked by constraint `{0}`; undo to continue")]
    Blocked(String),
    #[error("no complete sentence to end here")]
    IncompleteSentence,
    #[error("nothing to undo")]
    NothingToUndo,
}

/// One judged reading of one coindexing of one hypothesis.
#[derive(Debug, Clone)]
struct Judged {
    hyp: usize,
    candidate: usize,
    reading: ScopedReading,
    /// All readings the candidate was scoped into, for preference checks.
    latest: Vec<ScopedReading>,
    introduced: Vec<String>,
    context: Option<Term>,
    verdict: Option<Verdict>,
    overturned: bool,
}

impl Judged {
    fn is_plausible(&self) -> bool {
        self.verdict.as_ref().is_some_and(|v| v.plausible)
    }

    fn is_implausible(&self) -> bool {
        self.verdict.as_ref().is_some_and(|v| !v.plausible)
    }
}

#[derive(Debug, Clone)]
struct SessionState {
    words: Vec<String>,
    parser: ParserState,
    tms: Tms,
    prefs: Vec<ScopeRecord>,
    /// Context LF with display names `w`, `w1`, ...
    ctx: Option<Term>,
    sentence: usize,
    last_source: Option<SourceId>,
    /// Preferred reading of the current prefix, in internal names.
    preferred: Option<(usize, Term)>,
    blocked: Option<String>,
    events: Vec<Event>,
    report: StateReport,
}

pub struct Session {
    lex: Arc<Lexicon>,
    world: Arc<WorldModel>,
    cfg: SessionConfig,
    state: SessionState,
    history: Vec<SessionState>,
}

fn node_id(sentence: usize) -> String {
    format!("s{sentence}")
}

/// Instantiation index encoded in an internal variable name (`x_w3`).
fn word_index(var: &str) -> Option<usize> {
    let tail = &var[var.rfind("_w")? + 2..];
    let digits: String = tail.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

impl Session {
    pub fn new(lex: Arc<Lexicon>, world: Arc<WorldModel>, cfg: SessionConfig) -> Self {
        let tms = Tms::new(cfg.domain_k);
        let mut state = SessionState {
            words: vec![],
            parser: ParserState::new(),
            tms,
            prefs: vec![],
            ctx: None,
            sentence: 0,
            last_source: None,
            preferred: None,
            blocked: None,
            events: vec![],
            report: StateReport::default(),
        };
        let mut s = Session {
            lex,
            world,
            cfg,
            state: state.clone(),
            history: vec![],
        };
        s.analyse(&mut state);
        s.state = state;
        s
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lex
    }

    pub fn world(&self) -> &WorldModel {
        &self.world
    }

    pub fn words(&self) -> &[String] {
        &self.state.words
    }

    pub fn can_undo(&self) -> bool {
        !self.history.is_empty()
    }

    pub fn snapshot(&self) -> StateReport {
        self.state.report.clone()
    }

    pub fn is_blocked(&self) -> bool {
        self.state.blocked.is_some()
    }

    /// Feeds one word (or the sentence boundary `.`).
    pub fn feed_word(&mut self, word: &str) -> Result<&StateReport, SessionError> {
        if let Some(c) = &self.state.blocked {
            return Err(SessionError::Blocked(c.clone()));
        }
        let word = word.trim();
        let mut next = self.state.clone();
        if word == "." {
            self.end_sentence(&mut next)?;
        } else {
            next.parser = next.parser.step_word(&self.lex, word, &self.cfg.parser)?;
            next.words.push(word.to_string());
            if !is_punctuation(word) {
                self.judge(&mut next);
            }
        }
        self.analyse(&mut next);
        self.history.push(std::mem::replace(&mut self.state, next));
        Ok(&self.state.report)
    }

    pub fn undo_word(&mut self) -> Result<&StateReport, SessionError> {
        self.state = self.history.pop().ok_or(SessionError::NothingToUndo)?;
        Ok(&self.state.report)
    }

    fn step(&self, st: &SessionState) -> usize {
        st.words.len()
    }

    fn event(&self, st: &mut SessionState, text: String) {
        let step = self.step(st);
        st.events.push(Event { step, text });
    }

    fn context_vars(st: &SessionState) -> ContextVars {
        match &st.ctx {
            None => ContextVars::default(),
            Some(c) => {
                let (mut binders, _) = context_binders(c);
                binders.reverse();
                ContextVars::new(&binders, &c.entity_constants())
            }
        }
    }

    fn name_map(st: &SessionState, hyp: &Hypothesis) -> NameMap {
        let mut nm = NameMap::new(Vec::<String>::new());
        if let Some(c) = &st.ctx {
            let (binders, _) = context_binders(c);
            for v in c.all_var_names() {
                if binders.contains(&v) {
                    nm.pin(v.clone(), v);
                } else {
                    nm.keep(v);
                }
            }
            for k in c.constants() {
                nm.reserve(k);
            }
        }
        nm.name_term(&hyp.sem, &hyp.arg_sorts());
        nm
    }

    /// Every reading of every hypothesis, with verdicts.
    fn readings(&self, st: &SessionState) -> Vec<Judged> {
        let node = node_id(st.sentence);
        let ctx_vars = Self::context_vars(st);
        let mut out = Vec::new();
        for (hi, hyp) in st.parser.hyps().iter().enumerate() {
            let Ok(closed) = close_existentially(hyp) else {
                continue;
            };
            for (ci, cand) in coindex_candidates(&closed, &ctx_vars).into_iter().enumerate() {
                let judge = |rs: &[ScopedReading]| -> Vec<(ScopedReading, Option<Term>, Option<Verdict>)> {
                    rs.iter()
                        .map(|r| {
                            let ctx = update_context(st.ctx.as_ref(), &r.formula)
                                .ok()
                                .and_then(|v| v.into_iter().next());
                            let verdict = ctx.as_ref().and_then(|c| plausible(c, &self.world).ok());
                            (r.clone(), ctx, verdict)
                        })
                        .collect()
                };
                let mut latest = enumerate_scopings(&cand.body, &st.prefs, &node);
                let mut judged = judge(&latest);
                let mut overturned = false;
                let any_ok = |j: &[(ScopedReading, Option<Term>, Option<Verdict>)]| {
                    j.iter().any(|(_, _, v)| v.as_ref().is_some_and(|v| v.plausible))
                };
                if !any_ok(&judged) && st.prefs.iter().any(|p| p.node == node) {
                    let free = enumerate_scopings(&cand.body, &[], &node);
                    let rejudged = judge(&free);
                    if any_ok(&rejudged) {
                        latest = free;
                        judged = rejudged;
                        overturned = true;
                    }
                }
                for (reading, context, verdict) in judged {
                    out.push(Judged {
                        hyp: hi,
                        candidate: ci,
                        reading,
                        latest: latest.clone(),
                        introduced: cand.introduced.clone(),
                        context,
                        verdict,
                        overturned,
                    });
                }
            }
        }
        out
    }

    /// Plausibility filtering, preference update and assertion for the
    /// new prefix.
    fn judge(&self, st: &mut SessionState) {
        let judged = self.readings(st);
        let n_hyps = st.parser.hyps().len();
        let implausible_only: Vec<bool> = (0..n_hyps)
            .map(|h| {
                let mine: Vec<&Judged> = judged.iter().filter(|j| j.hyp == h).collect();
                mine.iter().any(|j| j.is_implausible()) && !mine.iter().any(|j| j.is_plausible())
            })
            .collect();
        let preferred = judged.iter().find(|j| j.is_plausible()).cloned();
        st.preferred = None;
        let Some(pref) = preferred else {
            if let Some(first) = judged.iter().find(|j| j.is_implausible()) {
                let constraint = first
                    .verdict
                    .as_ref()
                    .and_then(|v| v.violated.clone())
                    .unwrap_or_default();
                self.assert_context(st, first, true);
                self.event(st, format!("BLOCKED {constraint}"));
                st.blocked = Some(constraint);
            }
            return;
        };
        // Block implausible-only branches.
        let mut removed = Vec::new();
        for (h, &bad) in implausible_only.iter().enumerate() {
            if bad {
                let c = judged
                    .iter()
                    .find(|j| j.hyp == h)
                    .and_then(|j| j.verdict.as_ref())
                    .and_then(|v| v.violated.clone())
                    .unwrap_or_default();
                removed.push((h, c));
            }
        }
        for (h, c) in &removed {
            self.event(st, format!("BLOCK h{h} {c}"));
        }
        st.parser.retain(|i, _| !implausible_only[i]);
        let new_index = |h: usize| h - implausible_only[..h].iter().filter(|b| **b).count();
        if pref.overturned {
            self.event(st, format!("OVERTURN {}", node_id(st.sentence)));
        }
        let node = node_id(st.sentence);
        let introduced = pref.introduced.clone();
        if let Ok(p) = persist_preference(&st.prefs, &node, &pref.reading, &pref.latest, |v| {
            !introduced.iter().any(|i| i == v)
        }) {
            st.prefs = if pref.overturned {
                p.into_iter()
                    .map(|r| {
                        if r.node == node {
                            ScopeRecord {
                                node: r.node,
                                discharged: pref.reading.order.iter().filter(|v| !introduced.contains(v)).cloned().collect(),
                            }
                        } else {
                            r
                        }
                    })
                    .collect()
            } else {
                p
            };
        }
        self.assert_context(st, &pref, false);
        st.preferred = Some((new_index(pref.hyp), pref.reading.formula.clone()));
    }

    /// Asserts the judged reading's context; implausible ones are then
    /// retracted again.
    fn assert_context(&self, st: &mut SessionState, j: &Judged, implausible: bool) {
        let Some(ctx) = &j.context else {
            return;
        };
        let hyp = &st.parser.hyps()[j.hyp];
        let mut nm = Self::name_map(st, hyp);
        let sorts = hyp.arg_sorts();
        nm.name_term(&hyp.sem, &sorts);
        nm.name_term(ctx, &sorts);
        let shown = nm.apply(ctx);
        let outcome = match st.tms.assert_prop(shown.clone(), st.last_source) {
            Ok(o) => o,
            Err(TmsError::SignatureTooLarge(why)) => {
                self.event(st, format!("ENTAILMENT-UNKNOWN {why}"));
                st.tms
                    .assert_prop(shown, None)
                    .expect("closed proposition")
            }
            Err(e) => {
                self.event(st, format!("ERROR {e}"));
                return;
            }
        };
        if let Some((old, cm)) = &outcome.retracted {
            self.event(
                st,
                format!("RETRACT {old} REASON {} COUNTERMODEL {cm}", RetractReason::EntailmentFailure),
            );
        }
        self.event(st, format!("ASSERT {} {}", outcome.id, st.tms.records().iter().find(|r| r.sources.len() == 1 && r.sources.contains(&outcome.id)).map(|r| r.prop.to_string()).unwrap_or_default()));
        for d in &outcome.derived {
            let srcs: Vec<String> = d.sources.iter().map(|s| s.to_string()).collect();
            self.event(st, format!("DERIVE {} {{{}}}", d.prop, srcs.join(",")));
        }
        if implausible {
            let _ = st.tms.retract(outcome.id);
            self.event(st, format!("RETRACT {} REASON {}", outcome.id, RetractReason::Plausibility));
        } else {
            st.last_source = Some(outcome.id);
        }
    }

    fn end_sentence(&self, st: &mut SessionState) -> Result<(), SessionError> {
        let reading = match &st.preferred {
            Some((h, f)) if st.parser.hyps()[*h].is_complete() => Some(f.clone()),
            _ => {
                let judged = self.readings(st);
                judged
                    .iter()
                    .filter(|j| st.parser.hyps()[j.hyp].is_complete())
                    .find(|j| j.is_plausible())
                    .map(|j| j.reading.formula.clone())
            }
        };
        let reading = reading.ok_or(SessionError::IncompleteSentence)?;
        let ctx = match &st.ctx {
            None => context_form(&reading),
            Some(c) => update_context(Some(c), &reading)
                .ok()
                .and_then(|v| v.into_iter().next())
                .ok_or(SessionError::IncompleteSentence)?,
        };
        st.ctx = Some(rename_binders(&ctx));
        st.words.push(".".into());
        let offset = st.words.len();
        st.parser = ParserState::starting_at(offset);
        st.prefs.clear();
        st.sentence += 1;
        st.preferred = None;
        let shown = st.ctx.as_ref().map(|c| c.to_string()).unwrap_or_default();
        self.event(st, format!("COMMIT {shown}"));
        Ok(())
    }

    /// Rebuilds the report for the current state.
    fn analyse(&self, st: &mut SessionState) {
        let ctx_vars = Self::context_vars(st);
        let mut hypotheses = Vec::new();
        let mut pipeline = Vec::new();
        let mut name_maps = Vec::new();
        for (i, hyp) in st.parser.hyps().iter().enumerate() {
            let mut nm = Self::name_map(st, hyp);
            let sorts = hyp.arg_sorts();
            let lambda = nm.print(&hyp.sem, &sorts);
            hypotheses.push(HypothesisReport {
                index: i,
                ty: hyp.ty().to_string(),
                lf: lambda.clone(),
                categories: hyp.pending.iter().map(|c| c.to_string()).collect(),
                trace: hyp.trace.clone(),
            });
            let mut p = PipelineReport {
                hypothesis: i,
                lambda,
                ..Default::default()
            };
            match close_existentially(hyp) {
                Err(e) => p.closure_error = Some(e.to_string()),
                Ok(closed) => {
                    p.closure = Some(nm.print(&closed.body, &sorts));
                    for cand in coindex_candidates(&closed, &ctx_vars) {
                        p.coindexed.push(nm.print(&cand.body, &sorts));
                        for r in enumerate_scopings(&cand.body, &st.prefs, &node_id(st.sentence)) {
                            p.scopings.push(nm.print(&r.formula, &sorts));
                            if let Some(c) = update_context(st.ctx.as_ref(), &r.formula)
                                .ok()
                                .and_then(|v| v.into_iter().next())
                            {
                                p.contexts.push(nm.print(&c, &sorts));
                            }
                        }
                    }
                }
            }
            pipeline.push(p);
            name_maps.push((nm, sorts));
        }
        let mut readings = Vec::new();
        if !st.parser.hyps().is_empty() {
            for j in self.readings(st) {
                let (nm, sorts) = &mut name_maps[j.hyp];
                let preferred = st
                    .preferred
                    .as_ref()
                    .is_some_and(|(h, f)| *h == j.hyp && *f == j.reading.formula)
                    && !readings.iter().any(|r: &ReadingReport| r.preferred);
                readings.push(ReadingReport {
                    hypothesis: j.hyp,
                    candidate: j.candidate,
                    lf: nm.print(&j.reading.formula, sorts),
                    context: j.context.as_ref().map(|c| nm.print(c, sorts)),
                    verdict: j.verdict.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "UNJUDGED".into()),
                    preferred,
                });
            }
        }
        let referents = self.referents(st, &mut name_maps);
        let status = match &st.blocked {
            Some(c) => Status::Blocked { constraint: c.clone() },
            None => Status::Active,
        };
        let offset = st.parser.next_index() - st.parser.words().len();
        st.report = StateReport {
            words: st.words.clone(),
            sentence: st.parser.words().to_vec(),
            sentence_index: st.sentence,
            first_word: offset,
            status,
            can_undo: !st.words.is_empty(),
            pruned: st.parser.pruned(),
            hypotheses,
            pipeline,
            readings,
            propositions: st
                .tms
                .records()
                .iter()
                .map(|r| PropReport {
                    lf: r.prop.to_string(),
                    sources: r.sources.iter().map(|s| s.to_string()).collect(),
                    derived: r.derived,
                })
                .collect(),
            context: st.ctx.as_ref().map(|c| c.to_string()),
            referents,
            events: st.events.clone(),
        };
    }

    fn referents(&self, st: &SessionState, name_maps: &mut [(NameMap, HashMap<String, VarSort>)]) -> Vec<ReferentReport> {
        let h = st.preferred.as_ref().map(|(h, _)| *h).unwrap_or(0);
        let Some(hyp) = st.parser.hyps().get(h) else {
            return vec![];
        };
        let offset = st.parser.next_index() - st.parser.words().len();
        let (nm, sorts) = &mut name_maps[h];
        nm.name_term(&hyp.sem, sorts);
        definite_markers(&hyp.sem)
            .into_iter()
            .filter_map(|m| {
                let entities = referent_set(hyp, &m, &self.world).ok()?;
                let word = word_index(&m);
                Some(ReferentReport {
                    marker: nm.get(&m).unwrap_or(&m).to_string(),
                    word,
                    word_text: word.and_then(|w| st.parser.words().get(w.checked_sub(offset)?).cloned()),
                    entities: entities.into_iter().collect(),
                })
            })
            .collect()
    }
}

/// Renames context binders to `w`, `w1`, ... in order.
fn rename_binders(ctx: &Term) -> Term {
    let (binders, _) = context_binders(ctx);
    let mut out = ctx.clone();
    let mut avoid = ctx.all_var_names();
    // Move binders out of the way first so targets cannot clash.
    let mut tmp = Vec::new();
    for (i, b) in binders.iter().enumerate() {
        let t = crate::lf::fresh_name(&format!("ctxtmp{i}"), &avoid);
        avoid.insert(t.clone());
        out = out.rename_everywhere(b, &t);
        tmp.push(t);
    }
    let mut nm = NameMap::new(Vec::<String>::new());
    for (i, t) in tmp.iter().enumerate() {
        let target = if i == 0 { "w".to_string() } else { format!("w{i}") };
        out = out.rename_everywhere(t, &target);
        nm.pin(target.clone(), target);
    }
    nm.name_term(&out, &HashMap::new());
    nm.apply(&out)
}
