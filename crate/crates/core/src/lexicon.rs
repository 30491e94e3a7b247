//! Lexicalised categorial grammar: words paired with categories and
//! lambda semantics.
//!
//! Categories use Lambek slash notation: `A/B` looks right for a `B` and
//! yields `A`; `B\A` looks left for a `B` and yields `A`. Slashes fold left,
//! so `(np\s)/pp/np` takes an `np`, then a `pp`, then a left `np`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::lf::{check_type, parse_lf, ParseError, SemType, Term, TypeEnv, TypeError};

pub const DEMO_LEXICON: &str = include_str!("../data/demo.lex");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    S,
    Np,
    N,
    Pp,
}

impl Atom {
    fn name(self) -> &'static str {
        match self {
            Atom::S => "s",
            Atom::Np => "np",
            Atom::N => "n",
            Atom::Pp => "pp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Fwd,
    Bwd,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Atom(Atom),
    Slash {
        result: Box<Category>,
        dir: Dir,
        arg: Box<Category>,
    },
}

impl Category {
    pub const S: Category = Category::Atom(Atom::S);
    pub const NP: Category = Category::Atom(Atom::Np);
    pub const N: Category = Category::Atom(Atom::N);
    pub const PP: Category = Category::Atom(Atom::Pp);

    pub fn fwd(result: Category, arg: Category) -> Category {
        Category::Slash {
            result: Box::new(result),
            dir: Dir::Fwd,
            arg: Box::new(arg),
        }
    }

    pub fn bwd(arg: Category, result: Category) -> Category {
        Category::Slash {
            result: Box::new(result),
            dir: Dir::Bwd,
            arg: Box::new(arg),
        }
    }

    /// `np\s`
    pub fn vp() -> Category {
        Category::bwd(Category::NP, Category::S)
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Category::Atom(_))
    }

    /// Semantic type under the category homomorphism.
    pub fn sem_type(&self) -> SemType {
        match self {
            Category::Atom(Atom::S) => SemType::T,
            Category::Atom(Atom::Np | Atom::Pp) => SemType::E,
            Category::Atom(Atom::N) => SemType::func(SemType::E, SemType::T),
            Category::Slash { result, arg, .. } => SemType::func(arg.sem_type(), result.sem_type()),
        }
    }

    /// Strips rightward arguments, outermost first. Returns the argument
    /// list and what remains after each prefix of it: `cores[d]` is the
    /// category left after consuming `d` arguments.
    pub fn rightward_spine(&self) -> (Vec<&Category>, Vec<&Category>) {
        let mut args = Vec::new();
        let mut cores = vec![self];
        let mut cur = self;
        while let Category::Slash {
            result,
            dir: Dir::Fwd,
            arg,
        } = cur
        {
            args.push(&**arg);
            cur = result;
            cores.push(cur);
        }
        (args, cores)
    }

    /// Whether this is `X\X`.
    pub fn is_left_modifier(&self) -> bool {
        matches!(self, Category::Slash { result, dir: Dir::Bwd, arg } if result == arg)
    }

    pub fn parse(text: &str) -> Result<Category, String> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut i = 0;
        let c = parse_cat(&chars, &mut i)?;
        if i != chars.len() {
            return Err(format!("unexpected `{}` in category", chars[i]));
        }
        Ok(c)
    }
}

fn parse_cat(chars: &[char], i: &mut usize) -> Result<Category, String> {
    let mut acc = parse_primary(chars, i)?;
    while *i < chars.len() && matches!(chars[*i], '/' | '\\') {
        let slash = chars[*i];
        *i += 1;
        let next = parse_primary(chars, i)?;
        acc = if slash == '/' {
            Category::fwd(acc, next)
        } else {
            Category::bwd(acc, next)
        };
    }
    Ok(acc)
}

fn parse_primary(chars: &[char], i: &mut usize) -> Result<Category, String> {
    if *i < chars.len() && chars[*i] == '(' {
        *i += 1;
        let c = parse_cat(chars, i)?;
        if *i >= chars.len() || chars[*i] != ')' {
            return Err("unclosed `(` in category".into());
        }
        *i += 1;
        return Ok(c);
    }
    let start = *i;
    while *i < chars.len() && chars[*i].is_ascii_alphabetic() {
        *i += 1;
    }
    let word: String = chars[start..*i].iter().collect();
    match word.as_str() {
        "s" => Ok(Category::S),
        "np" => Ok(Category::NP),
        "n" => Ok(Category::N),
        "pp" => Ok(Category::PP),
        "" => Err("expected a category".into()),
        other => Err(format!("unknown category atom `{other}`")),
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn part(c: &Category, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if c.is_atom() {
                write!(f, "{c}")
            } else {
                write!(f, "({c})")
            }
        }
        match self {
            Category::Atom(a) => f.write_str(a.name()),
            Category::Slash {
                result,
                dir: Dir::Fwd,
                arg,
            } => {
                if matches!(**result, Category::Slash { dir: Dir::Fwd, .. }) {
                    write!(f, "{result}")?;
                } else {
                    part(result, f)?;
                }
                f.write_str("/")?;
                part(arg, f)
            }
            Category::Slash {
                result,
                dir: Dir::Bwd,
                arg,
            } => {
                part(arg, f)?;
                f.write_str("\\")?;
                part(result, f)
            }
        }
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexEntry {
    pub word: String,
    pub cat: Category,
    pub sem: Term,
    /// 1-based source line.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: bad logical form: {source}")]
    Lf { line: usize, source: ParseError },
    #[error("line {line}: entry `{word}` does not have the type of {cat}: {source}")]
    Type {
        line: usize,
        word: String,
        cat: String,
        source: Box<TypeError>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown word `{word}`")]
pub struct UnknownWord {
    pub word: String,
    /// Known words within edit distance 2, closest first.
    pub suggestions: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    index: BTreeMap<String, Vec<usize>>,
}

impl Lexicon {
    pub fn load(source: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let syntax = |msg: &str| LexiconError::Syntax {
                line,
                msg: msg.to_string(),
            };
            let (word, rest) = text
                .split_once(':')
                .ok_or_else(|| syntax("expected `word : CATEGORY = LF`"))?;
            let (cat, lf) = rest
                .split_once('=')
                .ok_or_else(|| syntax("expected `=` before the logical form"))?;
            let word = word.trim().to_lowercase();
            if word.is_empty() || word.contains(char::is_whitespace) {
                return Err(syntax("entry word must be a single token"));
            }
            let cat = Category::parse(cat).map_err(|m| syntax(&m))?;
            let sem = parse_lf(lf.trim()).map_err(|source| LexiconError::Lf { line, source })?;
            check_type(&sem, &cat.sem_type(), &mut TypeEnv::new()).map_err(|source| {
                LexiconError::Type {
                    line,
                    word: word.clone(),
                    cat: cat.to_string(),
                    source: Box::new(source),
                }
            })?;
            lex.push(LexEntry {
                word,
                cat,
                sem,
                line,
            });
        }
        Ok(lex)
    }

    pub fn demo() -> Lexicon {
        Lexicon::load(DEMO_LEXICON).expect("demo lexicon is valid")
    }

    fn push(&mut self, e: LexEntry) {
        self.index
            .entry(e.word.clone())
            .or_default()
            .push(self.entries.len());
        self.entries.push(e);
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    /// All entries for `word` in file order.
    pub fn lookup(&self, word: &str) -> Result<Vec<&LexEntry>, UnknownWord> {
        let key = word.to_lowercase();
        match self.index.get(&key) {
            Some(ids) => Ok(ids.iter().map(|&i| &self.entries[i]).collect()),
            None => Err(UnknownWord {
                suggestions: self.suggest(&key),
                word: word.to_string(),
            }),
        }
    }

    fn suggest(&self, word: &str) -> Vec<String> {
        let mut near: Vec<(usize, &str)> = self
            .words()
            .map(|w| (strsim::levenshtein(word, w), w))
            .filter(|(d, _)| *d <= 2)
            .collect();
        near.sort();
        near.into_iter().map(|(_, w)| w.to_string()).collect()
    }

    /// Whether some entry, after consuming zero or more rightward
    /// arguments, has category `cat`.
    pub fn has_core(&self, cat: &Category) -> bool {
        self.entries
            .iter()
            .any(|e| e.cat.rightward_spine().1.contains(&cat))
    }
}
