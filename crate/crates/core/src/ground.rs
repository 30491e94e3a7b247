//! Grounding of closed formulas over a finite domain into propositional
//! logic, and satisfiability via a SAT solver.

use std::collections::HashMap;

use thiserror::Error;
use varisat::{ExtendFormula, Lit, Solver};

use crate::lf::{Quant, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prop {
    Const(bool),
    Atom(usize),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    pub fn negate(p: Prop) -> Prop {
        match p {
            Prop::Const(b) => Prop::Const(!b),
            Prop::Not(q) => *q,
            p => Prop::Not(Box::new(p)),
        }
    }

    pub fn and(ps: impl IntoIterator<Item = Prop>) -> Prop {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Prop::Const(true) => {}
                Prop::Const(false) => return Prop::Const(false),
                Prop::And(qs) => out.extend(qs),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Prop::Const(true),
            1 => out.pop().unwrap(),
            _ => Prop::And(out),
        }
    }

    pub fn or(ps: impl IntoIterator<Item = Prop>) -> Prop {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Prop::Const(false) => {}
                Prop::Const(true) => return Prop::Const(true),
                Prop::Or(qs) => out.extend(qs),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Prop::Const(false),
            1 => out.pop().unwrap(),
            _ => Prop::Or(out),
        }
    }

    /// Truth under an atom valuation.
    pub fn eval(&self, val: &[bool]) -> bool {
        match self {
            Prop::Const(b) => *b,
            Prop::Atom(i) => val[*i],
            Prop::Not(p) => !p.eval(val),
            Prop::And(ps) => ps.iter().all(|p| p.eval(val)),
            Prop::Or(ps) => ps.iter().any(|p| p.eval(val)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("`{0}` is not a scoped first-order formula")]
    NotAFormula(String),
    #[error("grounding exceeds {0} atoms")]
    TooLarge(usize),
}

/// Closed predicates: `Some(truth)` for atoms whose value is fixed.
pub type FixedFn<'a> = dyn Fn(&str, &[String]) -> Option<bool> + 'a;

pub struct Grounder<'a> {
    pub domain: Vec<String>,
    /// Interpretation of constants as domain elements.
    pub consts: HashMap<String, String>,
    fixed: &'a FixedFn<'a>,
    atoms: Vec<(String, Vec<String>)>,
    index: HashMap<(String, Vec<String>), usize>,
    max_atoms: usize,
}

impl<'a> Grounder<'a> {
    pub fn new(
        domain: Vec<String>,
        consts: HashMap<String, String>,
        fixed: &'a FixedFn<'a>,
        max_atoms: usize,
    ) -> Self {
        Grounder {
            domain,
            consts,
            fixed,
            atoms: Vec::new(),
            index: HashMap::new(),
            max_atoms,
        }
    }

    pub fn atoms(&self) -> &[(String, Vec<String>)] {
        &self.atoms
    }

    fn atom(&mut self, pred: &str, args: Vec<String>) -> Result<Prop, GroundError> {
        if pred == crate::world::EQ && args.len() == 2 {
            return Ok(Prop::Const(args[0] == args[1]));
        }
        if let Some(b) = (self.fixed)(pred, &args) {
            return Ok(Prop::Const(b));
        }
        let key = (pred.to_string(), args);
        if let Some(&i) = self.index.get(&key) {
            return Ok(Prop::Atom(i));
        }
        if self.atoms.len() >= self.max_atoms {
            return Err(GroundError::TooLarge(self.max_atoms));
        }
        let i = self.atoms.len();
        self.atoms.push(key.clone());
        self.index.insert(key, i);
        Ok(Prop::Atom(i))
    }

    fn value(&self, t: &Term, env: &[(String, String)]) -> Result<String, GroundError> {
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, d)| d.clone())
                .ok_or_else(|| GroundError::UnboundVariable(v.clone())),
            Term::Const(c) => self
                .consts
                .get(c)
                .cloned()
                .ok_or_else(|| GroundError::UnknownConstant(c.clone())),
            other => self.opaque(other, env),
        }
    }

    /// A proposition in argument position (`thinks(mary,sleeps(x))`) is an
    /// opaque individual named by its text after grounding its free
    /// variables and constants.
    fn opaque(&self, t: &Term, env: &[(String, String)]) -> Result<String, GroundError> {
        if t.contains_lam() || t.contains_qterm() || t.contains_pro() {
            return Err(GroundError::NotAFormula(t.to_string()));
        }
        let free = t.free_vars();
        let mut missing = None;
        let closed = t.map_bottom_up(&mut |n| match n {
            Term::Var(v) if free.contains(&v) => match env.iter().rev().find(|(n, _)| *n == v) {
                Some((_, d)) => Term::Const(d.clone()),
                None => {
                    missing.get_or_insert(v.clone());
                    Term::Var(v)
                }
            },
            Term::Const(c) => Term::Const(self.consts.get(&c).cloned().unwrap_or(c)),
            other => other,
        });
        match missing {
            Some(v) => Err(GroundError::UnboundVariable(v)),
            None => Ok(format!("[{closed}]")),
        }
    }

    pub fn ground(&mut self, f: &Term) -> Result<Prop, GroundError> {
        let mut env = Vec::new();
        self.go(f, &mut env)
    }

    fn go(&mut self, f: &Term, env: &mut Vec<(String, String)>) -> Result<Prop, GroundError> {
        match f {
            Term::True => Ok(Prop::Const(true)),
            Term::Const(p) => self.atom(p, vec![]),
            Term::App(h, args) => {
                let Term::Const(p) = &**h else {
                    return Err(GroundError::NotAFormula(f.to_string()));
                };
                let vals = args
                    .iter()
                    .map(|a| self.value(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                self.atom(p, vals)
            }
            Term::And(l, r) => Ok(Prop::and([self.go(l, env)?, self.go(r, env)?])),
            Term::Impl(a, c) => Ok(Prop::or([Prop::negate(self.go(a, env)?), self.go(c, env)?])),
            Term::Scoped {
                quant,
                var,
                restrictor,
                body,
            } => {
                let mut cases = Vec::new();
                for d in self.domain.clone() {
                    env.push((var.clone(), d));
                    let r = self.go(restrictor, env);
                    let b = r.and_then(|r| Ok((r, self.go(body, env)?)));
                    env.pop();
                    cases.push(b?);
                }
                Ok(match quant {
                    Quant::Exists | Quant::The => Prop::or(cases.into_iter().map(|(r, b)| Prop::and([r, b]))),
                    Quant::Forall => Prop::and(cases.into_iter().map(|(r, b)| Prop::or([Prop::negate(r), b]))),
                    Quant::No => Prop::negate(Prop::or(cases.into_iter().map(|(r, b)| Prop::and([r, b])))),
                })
            }
            Term::Var(_) | Term::Lam(..) | Term::QTerm { .. } | Term::Pro(_) => {
                Err(GroundError::NotAFormula(f.to_string()))
            }
        }
    }
}

/// A satisfying valuation of all `props` over `n_atoms` atoms, if any.
pub fn solve(props: &[Prop], n_atoms: usize) -> Option<Vec<bool>> {
    let whole = Prop::and(props.iter().cloned());
    match whole {
        Prop::Const(false) => return None,
        Prop::Const(true) => return Some(vec![false; n_atoms]),
        _ => {}
    }
    let mut solver = Solver::new();
    let atoms: Vec<Lit> = (0..n_atoms).map(|_| solver.new_lit()).collect();
    let root = tseitin(&whole, &atoms, &mut solver);
    solver.add_clause(&[root]);
    if !solver.solve().expect("solver without assumptions cannot fail") {
        return None;
    }
    let model = solver.model().expect("satisfiable");
    let mut val = vec![false; n_atoms];
    for lit in model {
        // Atom literals were allocated first.
        let i = lit.var().index();
        if i < n_atoms {
            val[i] = lit.is_positive();
        }
    }
    debug_assert!(whole.eval(&val));
    Some(val)
}

fn tseitin(p: &Prop, atoms: &[Lit], s: &mut Solver) -> Lit {
    match p {
        Prop::Atom(i) => atoms[*i],
        Prop::Not(q) => !tseitin(q, atoms, s),
        Prop::Const(b) => {
            let l = s.new_lit();
            s.add_clause(&[if *b { l } else { !l }]);
            l
        }
        Prop::And(qs) => {
            let ls: Vec<Lit> = qs.iter().map(|q| tseitin(q, atoms, s)).collect();
            let x = s.new_lit();
            for &l in &ls {
                s.add_clause(&[!x, l]);
            }
            let mut big: Vec<Lit> = ls.iter().map(|&l| !l).collect();
            big.push(x);
            s.add_clause(&big);
            x
        }
        Prop::Or(qs) => {
            let ls: Vec<Lit> = qs.iter().map(|q| tseitin(q, atoms, s)).collect();
            let x = s.new_lit();
            for &l in &ls {
                s.add_clause(&[x, !l]);
            }
            let mut big = ls.clone();
            big.push(!x);
            s.add_clause(&big);
            x
        }
    }
}
