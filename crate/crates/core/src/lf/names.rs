use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::Term;

/// Canonical string for alpha-equivalence: bound and in-situ variables are
/// numbered in traversal order, free variables and constants kept.
pub fn alpha_key(t: &Term) -> String {
    let mut insitu = HashMap::new();
    for (i, v) in t.in_situ_vars().into_iter().enumerate() {
        insitu.insert(v, format!("#q{i}"));
    }
    let mut cx = KeyCx {
        insitu,
        env: Vec::new(),
        next: 0,
    };
    cx.go(t).to_string()
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha_key(a) == alpha_key(b)
}

struct KeyCx {
    insitu: HashMap<String, String>,
    env: Vec<(String, String)>,
    next: usize,
}

impl KeyCx {
    fn lookup(&self, v: &str) -> String {
        if let Some((_, n)) = self.env.iter().rev().find(|(o, _)| o == v) {
            return n.clone();
        }
        self.insitu.get(v).cloned().unwrap_or_else(|| v.to_string())
    }

    fn bind(&mut self, v: &str) -> String {
        let n = format!("#b{}", self.next);
        self.next += 1;
        self.env.push((v.to_string(), n.clone()));
        n
    }

    fn go(&mut self, t: &Term) -> Term {
        match t {
            Term::Const(_) | Term::True => t.clone(),
            Term::Var(v) => Term::Var(self.lookup(v)),
            Term::Pro(v) => Term::Pro(self.lookup(v)),
            Term::App(h, args) => {
                let h = self.go(h);
                Term::app(h, args.iter().map(|a| self.go(a)).collect())
            }
            Term::Lam(v, b) => {
                let n = self.bind(v);
                let b = self.go(b);
                self.env.pop();
                Term::lam(n, b)
            }
            Term::QTerm {
                quant,
                var,
                restrictor,
            } => {
                let n = self.lookup(var);
                Term::qterm(*quant, n, self.go(restrictor))
            }
            Term::Scoped {
                quant,
                var,
                restrictor,
                body,
            } => {
                let n = self.bind(var);
                let r = self.go(restrictor);
                let b = self.go(body);
                self.env.pop();
                Term::scoped(*quant, n, r, b)
            }
            Term::And(l, r) => {
                let l = self.go(l);
                Term::and(l, self.go(r))
            }
            Term::Impl(l, r) => {
                let l = self.go(l);
                Term::implies(l, self.go(r))
            }
        }
    }
}

/// Which name pool a variable draws from when printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarSort {
    /// x, y, z, u, v, x1, ...
    Entity,
    /// p, p1, ...
    Prop,
    /// P, Q, R, S, U, V, P1, ...
    Func,
    /// w, w1, ... for discourse referents carried in the context.
    Context,
}

impl VarSort {
    fn stems(self) -> &'static [&'static str] {
        match self {
            VarSort::Entity => &["x", "y", "z", "u", "v"],
            VarSort::Prop => &["p"],
            VarSort::Func => &["P", "Q", "R", "S", "U", "V"],
            VarSort::Context => &["w"],
        }
    }
}

/// Display names for internal variable names.
///
/// Internal names are long and unique (`x_w3`, `v_w2`); the map assigns
/// short pool names in order of first appearance so printed forms are
/// stable across runs. A map can be extended incrementally and reused for
/// every term derived from the same hypothesis.
#[derive(Debug, Clone, Default)]
pub struct NameMap {
    map: BTreeMap<String, String>,
    taken: BTreeSet<String>,
}

impl NameMap {
    /// `reserved` names are never handed out (constants, context variables).
    pub fn new<I, S>(reserved: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NameMap {
            map: BTreeMap::new(),
            taken: reserved.into_iter().map(Into::into).collect(),
        }
    }

    pub fn reserve(&mut self, name: impl Into<String>) {
        self.taken.insert(name.into());
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.map.get(var).map(String::as_str)
    }

    /// Maps `var` to a fixed display name.
    pub fn pin(&mut self, var: impl Into<String>, name: impl Into<String>) {
        let name = name.into();
        self.taken.insert(name.clone());
        self.map.insert(var.into(), name);
    }

    /// Prints `var` as itself without reserving the name, for variables
    /// bound in a different scope than any the map will name.
    pub fn keep(&mut self, var: impl Into<String>) {
        let var = var.into();
        self.map.insert(var.clone(), var);
    }

    /// Names `var` from its pool unless it already has a name.
    pub fn assign(&mut self, var: &str, sort: VarSort) -> String {
        if let Some(n) = self.map.get(var) {
            return n.clone();
        }
        let stems = sort.stems();
        let name = (0..)
            .flat_map(|round| {
                stems.iter().map(move |s| {
                    if round == 0 {
                        s.to_string()
                    } else {
                        format!("{s}{round}")
                    }
                })
            })
            .find(|n| !self.taken.contains(n))
            .expect("unbounded name supply");
        self.pin(var, name.clone());
        name
    }

    /// Names every variable of `t` not yet named. Function- and
    /// proposition-sorted binders are named at the binder; entity
    /// variables at their first use, so that reading order decides.
    /// `sorts` overrides the sort of specific binders; otherwise a lambda
    /// variable used as an applied head is a function and anything else
    /// an entity.
    pub fn name_term(&mut self, t: &Term, sorts: &HashMap<String, VarSort>) {
        for c in t.constants() {
            self.taken.insert(c);
        }
        let mut heads = BTreeSet::new();
        t.visit(&mut |n| {
            if let Term::App(h, _) = n {
                if let Term::Var(v) = &**h {
                    heads.insert(v.clone());
                }
            }
        });
        let sort_of = |v: &str| {
            sorts.get(v).copied().unwrap_or(if heads.contains(v) {
                VarSort::Func
            } else {
                VarSort::Entity
            })
        };
        let mut binders = Vec::new();
        self.walk(t, &sort_of, &mut binders);
        // Vacuous binders.
        for v in binders {
            self.assign(&v, sort_of(&v));
        }
    }

    fn walk(&mut self, t: &Term, sort_of: &impl Fn(&str) -> VarSort, binders: &mut Vec<String>) {
        match t {
            Term::Var(v) | Term::Pro(v) => {
                self.assign(v, sort_of(v));
            }
            Term::QTerm { var, .. } => {
                self.assign(var, sort_of(var));
            }
            Term::Lam(v, _) | Term::Scoped { var: v, .. } => {
                let s = sort_of(v);
                if s != VarSort::Entity || matches!(t, Term::Scoped { .. }) {
                    self.assign(v, s);
                } else {
                    binders.push(v.clone());
                }
            }
            _ => {}
        }
        for c in t.children() {
            self.walk(c, sort_of, binders);
        }
    }

    /// Renames every mapped variable; unmapped names pass through.
    pub fn apply(&self, t: &Term) -> Term {
        let n = |v: &String| self.map.get(v).cloned().unwrap_or_else(|| v.clone());
        t.map_bottom_up(&mut |node| match node {
            Term::Var(v) => Term::Var(n(&v)),
            Term::Pro(v) => Term::Pro(n(&v)),
            Term::Lam(v, b) => Term::Lam(n(&v), b),
            Term::QTerm {
                quant,
                var,
                restrictor,
            } => Term::QTerm {
                quant,
                var: n(&var),
                restrictor,
            },
            Term::Scoped {
                quant,
                var,
                restrictor,
                body,
            } => Term::Scoped {
                quant,
                var: n(&var),
                restrictor,
                body,
            },
            other => other,
        })
    }

    /// Names any new variables of `t` and prints it.
    pub fn print(&mut self, t: &Term, sorts: &HashMap<String, VarSort>) -> String {
        self.name_term(t, sorts);
        self.apply(t).to_string()
    }
}
