//! Finite first-order world models.
//!
//! File format, one item per line, `#` starts a comment:
//!
//! ```text
//! entity t1
//! fact tower(t1)
//! constraint bolted : no(x,punch(x),exists(z,true,move(x,z)))
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::lf::{parse_lf, ParseError, Term};

pub const LONDON_WORLD: &str = include_str!("../data/london.world");
pub const RABBITS_WORLD: &str = include_str!("../data/rabbits.world");
pub const WORKSHOP_WORLD: &str = include_str!("../data/workshop.world");

/// Worlds shipped with the crate, by name.
pub const BUILTIN_WORLDS: [(&str, &str); 3] = [
    ("london", LONDON_WORLD),
    ("rabbits", RABBITS_WORLD),
    ("workshop", WORKSHOP_WORLD),
];

/// Built-in identity predicate.
pub const EQ: &str = "eq";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub formula: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldModel {
    entities: Vec<String>,
    facts: BTreeMap<(String, usize), BTreeSet<Vec<String>>>,
    constraints: Vec<Constraint>,
    /// Predicates used by constraints.
    constrained: BTreeSet<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared entity `{entity}`")]
    UndeclaredEntity { line: usize, entity: String },
    #[error("line {line}: bad constraint: {source}")]
    Constraint { line: usize, source: ParseError },
    #[error("line {line}: constraint `{name}` is not closed")]
    OpenConstraint { line: usize, name: String },
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl WorldModel {
    pub fn load(source: &str) -> Result<WorldModel, WorldError> {
        let mut w = WorldModel::default();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let syntax = |msg: String| WorldError::Syntax { line, msg };
            let (kw, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
            let rest = rest.trim();
            match kw {
                "entity" => {
                    if !is_ident(rest) {
                        return Err(syntax(format!("bad entity name `{rest}`")));
                    }
                    if !w.entities.iter().any(|e| e == rest) {
                        w.entities.push(rest.to_string());
                    }
                }
                "fact" => {
                    let t = parse_lf(rest).map_err(|e| syntax(e.to_string()))?;
                    let (pred, args) = match &t {
                        Term::Const(p) => (p.clone(), vec![]),
                        Term::App(h, args) => match (&**h, args.iter().all(|a| matches!(a, Term::Const(_)))) {
                            (Term::Const(p), true) => (
                                p.clone(),
                                args.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                            ),
                            _ => return Err(syntax(format!("fact must be p(a,...): `{rest}`"))),
                        },
                        _ => return Err(syntax(format!("fact must be p(a,...): `{rest}`"))),
                    };
                    if pred == EQ {
                        return Err(syntax("`eq` is built in".into()));
                    }
                    if let Some(bad) = args.iter().find(|a| !w.entities.contains(a)) {
                        return Err(WorldError::UndeclaredEntity {
                            line,
                            entity: bad.clone(),
                        });
                    }
                    w.facts.entry((pred, args.len())).or_default().insert(args);
                }
                "constraint" => {
                    let (name, lf) = rest
                        .split_once(':')
                        .ok_or_else(|| syntax("expected `constraint <name> : <LF>`".into()))?;
                    let name = name.trim();
                    if !is_ident(name) {
                        return Err(syntax(format!("bad constraint name `{name}`")));
                    }
                    let formula = parse_lf(lf.trim())
                        .map_err(|source| WorldError::Constraint { line, source })?;
                    if !formula.free_vars().is_empty() || formula.contains_qterm() || formula.contains_lam() {
                        return Err(WorldError::OpenConstraint {
                            line,
                            name: name.to_string(),
                        });
                    }
                    collect_predicates(&formula, &mut w.constrained);
                    w.constraints.push(Constraint {
                        name: name.to_string(),
                        formula,
                    });
                }
                other => return Err(syntax(format!("unknown item `{other}`"))),
            }
        }
        Ok(w)
    }

    /// Source text that loads back to an equal model.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for e in &self.entities {
            out.push_str(&format!("entity {e}\n"));
        }
        for ((p, _), tuples) in &self.facts {
            for t in tuples {
                if t.is_empty() {
                    out.push_str(&format!("fact {p}\n"));
                } else {
                    out.push_str(&format!("fact {p}({})\n", t.join(",")));
                }
            }
        }
        for c in &self.constraints {
            out.push_str(&format!("constraint {} : {}\n", c.name, c.formula));
        }
        out
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn is_entity(&self, name: &str) -> bool {
        self.entities.iter().any(|e| e == name)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Predicates with at least one fact; their extensions are closed.
    pub fn has_facts(&self, pred: &str, arity: usize) -> bool {
        self.facts.contains_key(&(pred.to_string(), arity))
    }

    /// Predicates the world knows about: those with facts, those used by
    /// constraints, and `eq`.
    pub fn declares(&self, pred: &str, arity: usize) -> bool {
        if pred == EQ && arity == 2 {
            return true;
        }
        if self.has_facts(pred, arity) {
            return true;
        }
        self.constrained.contains(&(pred.to_string(), arity))
    }

    /// Closed-world truth of a ground atom.
    pub fn holds(&self, pred: &str, args: &[String]) -> bool {
        if pred == EQ && args.len() == 2 {
            return args[0] == args[1];
        }
        self.facts
            .get(&(pred.to_string(), args.len()))
            .is_some_and(|s| s.contains(args))
    }

    /// `(name, arity)` of every predicate with facts.
    pub fn fact_predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.facts.keys().map(|(p, n)| (p.as_str(), *n))
    }

    /// Ground facts as `p(a,b)` strings, for display.
    pub fn fact_strings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for ((p, _), tuples) in &self.facts {
            for t in tuples {
                out.push(format!("{p}({})", t.join(",")));
            }
        }
        out
    }
}

fn collect_predicates(t: &Term, out: &mut BTreeSet<(String, usize)>) {
    t.visit(&mut |n| {
        if let Term::App(h, args) = n {
            if let Term::Const(p) = &**h {
                out.insert((p.clone(), args.len()));
            }
        }
    });
}
