//! Logical forms: lambda terms with in-situ quantifier terms, pronoun
//! placeholders and scoped generalized quantifiers.
//!
//! The text syntax is a plain prefix notation (`lam(x,likes(john,x))`,
//! `q(forall,x,man(x))`, `exists(z,true,show(x,w,z))`). [`Term`]'s
//! `Display` impl prints exactly that syntax and [`parse_lf`] reads it back.

mod names;
mod parse;
mod reduce;
mod types;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use names::{alpha_eq, alpha_key, NameMap, VarSort};
pub use parse::{parse_lf, LfParser, ParseError};
pub use reduce::{beta_reduce, ReduceError};
pub use types::{check_type, synth_type, SemType, TypeEnv, TypeError};

/// Generalized quantifier names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quant {
    Forall,
    Exists,
    No,
    /// Definite description; evaluated existentially.
    The,
}

impl Quant {
    pub const ALL: [Quant; 4] = [Quant::Forall, Quant::Exists, Quant::No, Quant::The];

    pub fn keyword(self) -> &'static str {
        match self {
            Quant::Forall => "forall",
            Quant::Exists => "exists",
            Quant::No => "no",
            Quant::The => "the",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Quant> {
        Quant::ALL.into_iter().find(|q| q.keyword() == s)
    }
}

impl fmt::Display for Quant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(String),
    /// Application with a flattened argument spine; see [`Term::app`].
    App(Box<Term>, Vec<Term>),
    Lam(String, Box<Term>),
    /// In-situ quantifier term: quantifier, variable and restrictor, no body.
    QTerm {
        quant: Quant,
        var: String,
        restrictor: Box<Term>,
    },
    /// Unresolved pronoun.
    Pro(String),
    Scoped {
        quant: Quant,
        var: String,
        restrictor: Box<Term>,
        body: Box<Term>,
    },
    And(Box<Term>, Box<Term>),
    Impl(Box<Term>, Box<Term>),
    True,
}

impl Term {
    pub fn cnst(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    /// Builds an application, merging nested spines so that `(f a) b` and
    /// `f(a, b)` are the same term.
    pub fn app(head: Term, args: Vec<Term>) -> Term {
        if args.is_empty() {
            return head;
        }
        match head {
            Term::App(h, mut first) => {
                first.extend(args);
                Term::App(h, first)
            }
            h => Term::App(Box::new(h), args),
        }
    }

    pub fn app1(head: Term, arg: Term) -> Term {
        Term::app(head, vec![arg])
    }

    pub fn lam(var: impl Into<String>, body: Term) -> Term {
        Term::Lam(var.into(), Box::new(body))
    }

    /// Wraps `body` in one abstraction per variable, outermost first.
    pub fn lams<S: AsRef<str>>(vars: &[S], body: Term) -> Term {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Term::lam(v.as_ref(), acc))
    }

    pub fn qterm(quant: Quant, var: impl Into<String>, restrictor: Term) -> Term {
        Term::QTerm {
            quant,
            var: var.into(),
            restrictor: Box::new(restrictor),
        }
    }

    pub fn scoped(quant: Quant, var: impl Into<String>, restrictor: Term, body: Term) -> Term {
        Term::Scoped {
            quant,
            var: var.into(),
            restrictor: Box::new(restrictor),
            body: Box::new(body),
        }
    }

    pub fn and(l: Term, r: Term) -> Term {
        Term::And(Box::new(l), Box::new(r))
    }

    pub fn implies(a: Term, c: Term) -> Term {
        Term::Impl(Box::new(a), Box::new(c))
    }

    /// Conjunction that drops `true` conjuncts.
    pub fn and_simplified(l: Term, r: Term) -> Term {
        match (l, r) {
            (Term::True, r) => r,
            (l, Term::True) => l,
            (l, r) => Term::and(l, r),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Term::True)
    }

    /// Variables free in the structural sense: `Lam` binds in its body,
    /// `QTerm` in its restrictor, `Scoped` in restrictor and body, and a
    /// pronoun placeholder owns its variable.
    pub fn raw_free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_raw_free(&mut bound, &mut out);
        out
    }

    fn collect_raw_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) | Term::True | Term::Pro(_) => {}
            Term::Var(v) => {
                if !bound.contains(&v.as_str()) {
                    out.insert(v.clone());
                }
            }
            Term::App(h, args) => {
                h.collect_raw_free(bound, out);
                for a in args {
                    a.collect_raw_free(bound, out);
                }
            }
            Term::Lam(v, b) => {
                bound.push(v);
                b.collect_raw_free(bound, out);
                bound.pop();
            }
            Term::QTerm { var, restrictor, .. } => {
                bound.push(var);
                restrictor.collect_raw_free(bound, out);
                bound.pop();
            }
            Term::Scoped {
                var,
                restrictor,
                body,
                ..
            } => {
                bound.push(var);
                restrictor.collect_raw_free(bound, out);
                body.collect_raw_free(bound, out);
                bound.pop();
            }
            Term::And(l, r) | Term::Impl(l, r) => {
                l.collect_raw_free(bound, out);
                r.collect_raw_free(bound, out);
            }
        }
    }

    /// Free variables of a logical form. In-situ quantifier and pronoun
    /// variables count as bound throughout the whole term, since their
    /// scope is not yet fixed.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let insitu = self.in_situ_vars();
        self.raw_free_vars()
            .into_iter()
            .filter(|v| !insitu.contains(v))
            .collect()
    }

    /// Variables of every `QTerm` and `Pro` node, in depth-first order.
    pub fn in_situ_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |t| match t {
            Term::QTerm { var, .. } | Term::Pro(var) if !out.contains(var) => out.push(var.clone()),
            _ => {}
        });
        out
    }

    /// Every variable name occurring anywhere (binders included).
    pub fn all_var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Var(v) | Term::Lam(v, _) | Term::Pro(v) => {
                out.insert(v.clone());
            }
            Term::QTerm { var, .. } | Term::Scoped { var, .. } => {
                out.insert(var.clone());
            }
            _ => {}
        });
        out
    }

    /// Constant names, in depth-first order without duplicates.
    pub fn constants(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |t| {
            if let Term::Const(c) = t {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        });
        out
    }

    /// Constants used as entities, i.e. not in head position of an application.
    pub fn entity_constants(&self) -> Vec<String> {
        fn go(t: &Term, out: &mut Vec<String>) {
            match t {
                Term::Const(c) => {
                    if !out.contains(c) {
                        out.push(c.clone())
                    }
                }
                Term::App(h, args) => {
                    if !matches!(**h, Term::Const(_)) {
                        go(h, out);
                    }
                    for a in args {
                        go(a, out);
                    }
                }
                _ => t.children().into_iter().for_each(|c| go(c, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Const(_) | Term::Var(_) | Term::Pro(_) | Term::True => vec![],
            Term::App(h, args) => std::iter::once(&**h).chain(args.iter()).collect(),
            Term::Lam(_, b) => vec![b],
            Term::QTerm { restrictor, .. } => vec![restrictor],
            Term::Scoped {
                restrictor, body, ..
            } => vec![restrictor, body],
            Term::And(l, r) | Term::Impl(l, r) => vec![l, r],
        }
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Rebuilds the term bottom-up, applying `f` to every node after its
    /// children have been rebuilt.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::Const(_) | Term::Var(_) | Term::Pro(_) | Term::True => self.clone(),
            Term::App(h, args) => Term::app(
                h.map_bottom_up(f),
                args.iter().map(|a| a.map_bottom_up(f)).collect(),
            ),
            Term::Lam(v, b) => Term::lam(v.clone(), b.map_bottom_up(f)),
            Term::QTerm {
                quant,
                var,
                restrictor,
            } => Term::qterm(*quant, var.clone(), restrictor.map_bottom_up(f)),
            Term::Scoped {
                quant,
                var,
                restrictor,
                body,
            } => Term::scoped(
                *quant,
                var.clone(),
                restrictor.map_bottom_up(f),
                body.map_bottom_up(f),
            ),
            Term::And(l, r) => Term::and(l.map_bottom_up(f), r.map_bottom_up(f)),
            Term::Impl(l, r) => Term::implies(l.map_bottom_up(f), r.map_bottom_up(f)),
        };
        f(rebuilt)
    }

    /// Renames every occurrence of a variable name, binders included.
    /// Only safe when `to` does not occur in the term.
    pub fn rename_everywhere(&self, from: &str, to: &str) -> Term {
        let swap = |s: &String| if s == from { to.to_string() } else { s.clone() };
        self.map_bottom_up(&mut |t| match t {
            Term::Var(v) => Term::Var(swap(&v)),
            Term::Pro(v) => Term::Pro(swap(&v)),
            Term::Lam(v, b) => Term::Lam(swap(&v), b),
            Term::QTerm {
                quant,
                var,
                restrictor,
            } => Term::QTerm {
                quant,
                var: swap(&var),
                restrictor,
            },
            Term::Scoped {
                quant,
                var,
                restrictor,
                body,
            } => Term::Scoped {
                quant,
                var: swap(&var),
                restrictor,
                body,
            },
            other => other,
        })
    }

    /// Capture-avoiding substitution of `replacement` for free occurrences
    /// of `var`.
    pub fn subst(&self, var: &str, replacement: &Term) -> Term {
        let repl_free = replacement.raw_free_vars();
        self.subst_inner(var, replacement, &repl_free)
    }

    fn subst_inner(&self, x: &str, s: &Term, s_free: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(v) if v == x => s.clone(),
            Term::Var(_) | Term::Const(_) | Term::Pro(_) | Term::True => self.clone(),
            Term::Lam(v, _) | Term::QTerm { var: v, .. } | Term::Scoped { var: v, .. }
                if v == x =>
            {
                self.clone()
            }
            Term::App(h, args) => Term::app(
                h.subst_inner(x, s, s_free),
                args.iter().map(|a| a.subst_inner(x, s, s_free)).collect(),
            ),
            Term::And(l, r) => Term::and(l.subst_inner(x, s, s_free), r.subst_inner(x, s, s_free)),
            Term::Impl(l, r) => {
                Term::implies(l.subst_inner(x, s, s_free), r.subst_inner(x, s, s_free))
            }
            Term::Lam(v, b) => {
                let (v, b) = self.freshen_binder(v, &[b], x, s_free);
                Term::lam(v, b[0].subst_inner(x, s, s_free))
            }
            Term::QTerm {
                quant,
                var,
                restrictor,
            } => {
                let (v, parts) = self.freshen_binder(var, &[restrictor], x, s_free);
                Term::qterm(*quant, v, parts[0].subst_inner(x, s, s_free))
            }
            Term::Scoped {
                quant,
                var,
                restrictor,
                body,
            } => {
                let (v, parts) = self.freshen_binder(var, &[restrictor, body], x, s_free);
                Term::scoped(
                    *quant,
                    v,
                    parts[0].subst_inner(x, s, s_free),
                    parts[1].subst_inner(x, s, s_free),
                )
            }
        }
    }

    /// Returns the binder name and scope parts to use for substitution under
    /// a binder, renaming the binder when it would capture a free variable
    /// of the replacement.
    fn freshen_binder(
        &self,
        v: &str,
        parts: &[&Term],
        x: &str,
        s_free: &BTreeSet<String>,
    ) -> (String, Vec<Term>) {
        let x_occurs = parts.iter().any(|p| p.raw_free_vars().contains(x));
        if x_occurs && s_free.contains(v) {
            let mut avoid: BTreeSet<String> = s_free.clone();
            for p in parts {
                avoid.extend(p.all_var_names());
            }
            avoid.insert(x.to_string());
            let fresh = fresh_name(v, &avoid);
            let renamed = parts
                .iter()
                .map(|p| p.subst(v, &Term::Var(fresh.clone())))
                .collect();
            (fresh, renamed)
        } else {
            (v.to_string(), parts.iter().map(|p| (*p).clone()).collect())
        }
    }

    /// Replaces the first (depth-first) free occurrence of `var`.
    pub fn replace_first_occurrence(&self, var: &str, with: &Term) -> Term {
        fn go(t: &Term, var: &str, with: &Term, done: &mut bool) -> Term {
            if *done {
                return t.clone();
            }
            match t {
                Term::Var(v) if v == var => {
                    *done = true;
                    with.clone()
                }
                Term::Lam(v, _) | Term::QTerm { var: v, .. } | Term::Scoped { var: v, .. }
                    if v == var =>
                {
                    t.clone()
                }
                Term::Var(_) | Term::Const(_) | Term::Pro(_) | Term::True => t.clone(),
                Term::App(h, args) => {
                    let h = go(h, var, with, done);
                    let args = args.iter().map(|a| go(a, var, with, done)).collect();
                    Term::app(h, args)
                }
                Term::Lam(v, b) => Term::lam(v.clone(), go(b, var, with, done)),
                Term::QTerm {
                    quant,
                    var: v,
                    restrictor,
                } => Term::qterm(*quant, v.clone(), go(restrictor, var, with, done)),
                Term::Scoped {
                    quant,
                    var: v,
                    restrictor,
                    body,
                } => {
                    let r = go(restrictor, var, with, done);
                    let b = go(body, var, with, done);
                    Term::scoped(*quant, v.clone(), r, b)
                }
                Term::And(l, r) => {
                    let l = go(l, var, with, done);
                    Term::and(l, go(r, var, with, done))
                }
                Term::Impl(l, r) => {
                    let l = go(l, var, with, done);
                    Term::implies(l, go(r, var, with, done))
                }
            }
        }
        let mut done = false;
        go(self, var, with, &mut done)
    }

    /// Strips `n` leading abstractions, returning their variables and the body.
    pub fn peel_lams(&self, n: usize) -> (Vec<String>, &Term) {
        let mut vars = Vec::new();
        let mut cur = self;
        while vars.len() < n {
            match cur {
                Term::Lam(v, b) => {
                    vars.push(v.clone());
                    cur = b;
                }
                _ => break,
            }
        }
        (vars, cur)
    }

    /// Replaces `and(x, true)` / `and(true, x)` by `x` throughout.
    pub fn simplify_true_conjuncts(&self) -> Term {
        self.map_bottom_up(&mut |t| match t {
            Term::And(l, r) => Term::and_simplified(*l, *r),
            other => other,
        })
    }

    pub fn contains_qterm(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= matches!(t, Term::QTerm { .. }));
        found
    }

    pub fn contains_pro(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= matches!(t, Term::Pro(_)));
        found
    }

    pub fn contains_lam(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= matches!(t, Term::Lam(..)));
        found
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// `base_1`, `base_2`, ... avoiding the given names.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|i| format!("{stem}_{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded name supply")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) | Term::Var(c) => f.write_str(c),
            Term::App(h, args) => {
                write!(f, "{h}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Lam(v, b) => write!(f, "lam({v},{b})"),
            Term::QTerm {
                quant,
                var,
                restrictor,
            } => write!(f, "q({quant},{var},{restrictor})"),
            Term::Pro(v) => write!(f, "pro({v})"),
            Term::Scoped {
                quant,
                var,
                restrictor,
                body,
            } => write!(f, "{quant}({var},{restrictor},{body})"),
            Term::And(l, r) => write!(f, "and({l},{r})"),
            Term::Impl(l, r) => write!(f, "impl({l},{r})"),
            Term::True => f.write_str("true"),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Canonical text of a term.
pub fn print_lf(t: &Term) -> String {
    t.to_string()
}
