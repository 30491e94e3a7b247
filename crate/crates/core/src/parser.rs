//! Word-by-word parser. A parser state is a small set of typed lambda
//! terms, each standing for every partial tree of the prefix that shares
//! its semantics. A hypothesis of type `T1->...->Tk->t` records the
//! categories it still expects, leftmost first.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::lexicon::{Category, LexEntry, Lexicon, UnknownWord};
use crate::lf::{alpha_key, beta_reduce, NameMap, SemType, Term, VarSort};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserConfig {
    /// Anticipate modifiers of the main verb phrase.
    pub s_modifiers: bool,
    /// Hard cap on hypotheses kept after a step.
    pub max_hyps: usize,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            s_modifiers: false,
            max_hyps: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub sem: Term,
    /// Categories still expected, in the order they will be consumed.
    pub pending: Vec<Category>,
    pub trace: Vec<String>,
}

impl Hypothesis {
    pub fn ty(&self) -> SemType {
        SemType::curried(self.pending.iter().map(Category::sem_type), SemType::T)
    }

    /// Sorts of the leading abstractions, from the expected categories.
    pub fn arg_sorts(&self) -> HashMap<String, VarSort> {
        let (vars, _) = self.sem.peel_lams(self.pending.len());
        vars.into_iter()
            .zip(&self.pending)
            .map(|(v, c)| {
                let sort = match c.sem_type() {
                    SemType::E => VarSort::Entity,
                    SemType::T => VarSort::Prop,
                    SemType::Fn(..) => VarSort::Func,
                };
                (v, sort)
            })
            .collect()
    }

    /// Display names for this hypothesis, avoiding `reserved`.
    pub fn name_map<I, S>(&self, reserved: I) -> NameMap
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut m = NameMap::new(reserved);
        m.name_term(&self.sem, &self.arg_sorts());
        m
    }

    pub fn print(&self) -> String {
        self.name_map(std::iter::empty::<String>()).apply(&self.sem).to_string()
    }

    pub fn is_complete(&self) -> bool {
        self.pending.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("empty word")]
    EmptyWord,
    #[error(transparent)]
    UnknownWord(#[from] UnknownWord),
    #[error("no hypothesis can absorb `{word}`")]
    DeadEnd { word: String },
    #[error("nothing to undo")]
    NothingToUndo,
}

#[derive(Debug, Clone, PartialEq)]
struct Frame {
    words: Vec<String>,
    hyps: Vec<Hypothesis>,
    pruned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParserState {
    words: Vec<String>,
    hyps: Vec<Hypothesis>,
    /// Global index of this sentence's first word, for variable naming.
    offset: usize,
    /// Hypotheses dropped by the cap at the last step.
    pruned: usize,
    history: Vec<Frame>,
}

pub fn is_punctuation(word: &str) -> bool {
    !word.is_empty() && word.chars().all(|c| c.is_ascii_punctuation())
}

fn identity() -> Hypothesis {
    Hypothesis {
        sem: Term::lam("p_init", Term::var("p_init")),
        pending: vec![Category::S],
        trace: vec![],
    }
}

fn s_modifier() -> Category {
    Category::bwd(Category::S, Category::S)
}

fn vp_modifier() -> Category {
    Category::bwd(Category::vp(), Category::vp())
}

impl ParserState {
    pub fn new() -> Self {
        ParserState::starting_at(0)
    }

    /// Fresh sentence whose first word has global index `offset`.
    pub fn starting_at(offset: usize) -> Self {
        ParserState {
            words: vec![],
            hyps: vec![identity()],
            offset,
            pruned: 0,
            history: vec![],
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn hyps(&self) -> &[Hypothesis] {
        &self.hyps
    }

    pub fn pruned(&self) -> usize {
        self.pruned
    }

    pub fn next_index(&self) -> usize {
        self.offset + self.words.len()
    }

    pub fn can_undo(&self) -> bool {
        !self.history.is_empty()
    }

    /// `(type, term)` pairs in display order, with canonical variable names.
    pub fn hypotheses(&self) -> Vec<(SemType, Term)> {
        self.hyps
            .iter()
            .map(|h| (h.ty(), h.name_map(std::iter::empty::<String>()).apply(&h.sem)))
            .collect()
    }

    /// Hypotheses of type t.
    pub fn complete(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hyps.iter().filter(|h| h.is_complete())
    }

    /// Keeps only the hypotheses selected by `keep`. Used to block readings.
    pub fn retain(&mut self, mut keep: impl FnMut(usize, &Hypothesis) -> bool) {
        let mut i = 0;
        self.hyps.retain(|h| {
            let k = keep(i, h);
            i += 1;
            k
        });
    }

    pub fn step_word(
        &self,
        lex: &Lexicon,
        word: &str,
        cfg: &ParserConfig,
    ) -> Result<ParserState, StepError> {
        let word = word.trim();
        if word.is_empty() {
            return Err(StepError::EmptyWord);
        }
        if is_punctuation(word) {
            return Ok(self.clone());
        }
        let entries = lex.lookup(word)?;
        let index = self.next_index();
        let sentence_initial = self.words.is_empty();

        let mut sources = self.hyps.clone();
        if sentence_initial && lex.has_core(&s_modifier()) {
            sources.push(Hypothesis {
                sem: Term::lam(
                    "p_init",
                    Term::lam("q_init", Term::app1(Term::var("q_init"), Term::var("p_init"))),
                ),
                pending: vec![Category::S, s_modifier()],
                trace: vec!["s-modifier".into()],
            });
        }

        let mut out = Vec::new();
        for h in &sources {
            for (k, e) in entries.iter().enumerate() {
                let w = instantiate(e, index, k);
                combine(h, &e.cat, &w, index, lex, cfg, sentence_initial, &mut out);
            }
        }

        let mut seen = HashSet::new();
        let mut keyed: Vec<((usize, String, String), Hypothesis)> = out
            .into_iter()
            .filter(|h| {
                let pending: Vec<String> = h.pending.iter().map(|c| c.to_string()).collect();
                seen.insert((pending, alpha_key(&h.sem)))
            })
            .map(|h| {
                let pending: Vec<String> = h.pending.iter().map(|c| c.to_string()).collect();
                ((h.ty().size(), h.print(), pending.join(" ")), h)
            })
            .collect();
        if keyed.is_empty() {
            return Err(StepError::DeadEnd {
                word: word.to_string(),
            });
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let pruned = keyed.len().saturating_sub(cfg.max_hyps);
        keyed.truncate(cfg.max_hyps);

        let mut history = self.history.clone();
        history.push(Frame {
            words: self.words.clone(),
            hyps: self.hyps.clone(),
            pruned: self.pruned,
        });
        let mut words = self.words.clone();
        words.push(word.to_lowercase());
        Ok(ParserState {
            words,
            hyps: keyed.into_iter().map(|(_, h)| h).collect(),
            offset: self.offset,
            pruned,
            history,
        })
    }

    pub fn undo_word(&self) -> Result<ParserState, StepError> {
        let mut history = self.history.clone();
        let frame = history.pop().ok_or(StepError::NothingToUndo)?;
        Ok(ParserState {
            words: frame.words,
            hyps: frame.hyps,
            offset: self.offset,
            pruned: frame.pruned,
            history,
        })
    }
}

impl Default for ParserState {
    fn default() -> Self {
        ParserState::new()
    }
}

/// Lexical semantics with every variable renamed apart for word `index`.
fn instantiate(e: &LexEntry, index: usize, reading: usize) -> Term {
    let mut t = e.sem.clone();
    let suffix = if reading == 0 {
        format!("_w{index}")
    } else {
        format!("_w{index}r{reading}")
    };
    for v in e.sem.all_var_names() {
        t = t.rename_everywhere(&v, &format!("{v}{suffix}"));
    }
    t
}

#[allow(clippy::too_many_arguments)]
fn combine(
    h: &Hypothesis,
    cat: &Category,
    w: &Term,
    index: usize,
    lex: &Lexicon,
    cfg: &ParserConfig,
    sentence_initial: bool,
    out: &mut Vec<Hypothesis>,
) {
    let Some((want, rest)) = h.pending.split_first() else {
        return;
    };
    let (args, cores) = cat.rightward_spine();
    let mut push = |sem: Term, pending: Vec<Category>, rule: &str| {
        if let Ok(sem) = beta_reduce(&sem) {
            let mut trace = h.trace.clone();
            trace.push(rule.to_string());
            out.push(Hypothesis {
                sem,
                pending,
                trace,
            });
        }
    };
    for d in 0..=args.len() {
        let core = cores[d];
        let zs: Vec<String> = (0..d).map(|j| format!("a{j}_w{index}")).collect();
        let applied = Term::app(w.clone(), zs.iter().map(Term::var).collect());
        let consumed: Vec<Category> = args[..d].iter().map(|c| (*c).clone()).collect();

        if core == want {
            let sem = Term::lams(&zs, Term::app1(h.sem.clone(), applied.clone()));
            let pending = consumed.iter().chain(rest).cloned().collect();
            push(sem, pending, if d == 0 { "apply" } else { "compose" });
        }

        if !want.sem_type().ends_in_t() {
            continue;
        }
        let functor = Category::bwd(core.clone(), want.clone());
        // Verb-phrase modifiers are only anticipated for the main clause,
        // below.
        if functor == vp_modifier() {
            continue;
        }
        if !lex.has_core(&functor) {
            continue;
        }
        let v = format!("v_w{index}");
        let body = Term::app1(Term::var(&v), applied.clone());
        let mut vars = zs.clone();
        vars.push(v.clone());
        let sem = Term::lams(&vars, Term::app1(h.sem.clone(), body));
        let pending: Vec<Category> = consumed
            .iter()
            .cloned()
            .chain([functor.clone()])
            .chain(rest.iter().cloned())
            .collect();
        push(sem, pending, "predict");

        if cfg.s_modifiers && sentence_initial && functor == Category::vp() {
            let m = format!("m_w{index}");
            let body = Term::app(Term::var(&m), vec![Term::var(&v), applied.clone()]);
            let mut vars = vars.clone();
            vars.push(m);
            let sem = Term::lams(&vars, Term::app1(h.sem.clone(), body));
            let pending: Vec<Category> = consumed
                .iter()
                .cloned()
                .chain([functor.clone(), vp_modifier()])
                .chain(rest.iter().cloned())
                .collect();
            push(sem, pending, "predict-vp-modifier");
        }
    }
}
