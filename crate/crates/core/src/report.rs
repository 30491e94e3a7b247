//! Serializable session snapshots and their text trace.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum Status {
    #[default]
    Active,
    Blocked {
        constraint: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    /// Number of words fed when the event happened.
    pub step: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub index: usize,
    #[serde(rename = "type")]
    pub ty: String,
    pub lf: String,
    pub categories: Vec<String>,
    pub trace: Vec<String>,
}

/// Intermediate results of each stage for one hypothesis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub hypothesis: usize,
    pub lambda: String,
    pub closure: Option<String>,
    pub closure_error: Option<String>,
    pub coindexed: Vec<String>,
    pub scopings: Vec<String>,
    pub contexts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingReport {
    pub hypothesis: usize,
    pub candidate: usize,
    pub lf: String,
    pub context: Option<String>,
    pub verdict: String,
    pub preferred: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropReport {
    pub lf: String,
    pub sources: Vec<String>,
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferentReport {
    pub marker: String,
    /// Index of the determiner in the session's word list.
    pub word: Option<usize>,
    pub word_text: Option<String>,
    pub entities: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateReport {
    /// Every word fed so far, including sentence boundaries.
    pub words: Vec<String>,
    /// Words of the sentence in progress.
    pub sentence: Vec<String>,
    pub sentence_index: usize,
    /// Index in `words` of the first word of the current sentence.
    pub first_word: usize,
    pub status: Status,
    pub can_undo: bool,
    pub pruned: usize,
    pub hypotheses: Vec<HypothesisReport>,
    pub pipeline: Vec<PipelineReport>,
    pub readings: Vec<ReadingReport>,
    pub propositions: Vec<PropReport>,
    pub context: Option<String>,
    pub referents: Vec<ReferentReport>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Verbosity {
    #[default]
    Min,
    Full,
}

impl StateReport {
    pub fn is_blocked(&self) -> bool {
        matches!(self.status, Status::Blocked { .. })
    }

    /// Events raised by the most recent step.
    pub fn latest_events(&self) -> impl Iterator<Item = &Event> {
        let step = self.words.len();
        self.events.iter().filter(move |e| e.step == step)
    }

    /// Trace section for the latest step.
    pub fn render(&self, verbosity: Verbosity) -> String {
        let mut out = String::new();
        let last = self.words.last().map(String::as_str).unwrap_or("");
        let _ = writeln!(out, "== {} {last}", self.words.len());
        let _ = writeln!(out, "HYPS");
        for h in &self.hypotheses {
            let _ = writeln!(out, "  [{}] {} : {}", h.index, h.lf, h.ty);
        }
        if self.pruned > 0 {
            let _ = writeln!(out, "  pruned {}", self.pruned);
        }
        if verbosity == Verbosity::Full {
            for p in &self.pipeline {
                let _ = writeln!(out, "PIPELINE [{}]", p.hypothesis);
                let _ = writeln!(out, "  lambda   {}", p.lambda);
                match (&p.closure, &p.closure_error) {
                    (Some(c), _) => {
                        let _ = writeln!(out, "  closure  {c}");
                    }
                    (None, Some(e)) => {
                        let _ = writeln!(out, "  closure  ! {e}");
                    }
                    _ => {}
                }
                for c in &p.coindexed {
                    let _ = writeln!(out, "  coindex  {c}");
                }
                for s in &p.scopings {
                    let _ = writeln!(out, "  scoping  {s}");
                }
                for c in &p.contexts {
                    let _ = writeln!(out, "  context  {c}");
                }
            }
        }
        let _ = writeln!(out, "PROPS");
        for p in &self.propositions {
            let _ = writeln!(out, "  {{{}}} {}", p.sources.join(","), p.lf);
        }
        let _ = writeln!(out, "READINGS");
        for r in &self.readings {
            let mark = if r.preferred { '*' } else { ' ' };
            let _ = writeln!(out, " {mark}[{}.{}] {} {}", r.hypothesis, r.candidate, r.lf, r.verdict);
            if verbosity == Verbosity::Full {
                if let Some(c) = &r.context {
                    let _ = writeln!(out, "      in context {c}");
                }
            }
        }
        if let Some(c) = &self.context {
            let _ = writeln!(out, "CONTEXT {c}");
        }
        if verbosity == Verbosity::Full {
            for r in &self.referents {
                let _ = writeln!(out, "REFERENTS {} {{{}}}", r.marker, r.entities.join(","));
            }
        }
        let _ = writeln!(out, "EVENTS");
        for e in self.latest_events() {
            let _ = writeln!(out, "  {}", e.text);
        }
        out
    }
}
