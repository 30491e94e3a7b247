//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use rand::rngs::StdRng;
use rand::Rng;

use incr_core::lexicon::{Category, Dir, Lexicon};
use incr_core::lf::{alpha_key, beta_reduce, Quant, Term};
use incr_core::world::WorldModel;

pub const CORPUS: &str = include_str!("../../data/corpus.txt");

/// Discourses of the corpus, one per line, as word lists.
pub fn discourses() -> Vec<Vec<String>> {
    CORPUS
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

/// Individual sentences of the corpus, without boundaries.
pub fn sentences() -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for d in discourses() {
        let mut cur = Vec::new();
        for w in d {
            if w == "." {
                out.push(std::mem::take(&mut cur));
            } else {
                cur.push(w);
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

/// Renames every variable of a lexical term apart for word `i`.
fn apart(t: &Term, i: usize) -> Term {
    let mut out = t.clone();
    for v in t.all_var_names() {
        out = out.rename_everywhere(&v, &format!("{v}_o{i}"));
    }
    out
}

/// Alpha-keys of all sentence meanings found by forward and backward
/// application over every bracketing.
#[allow(clippy::needless_range_loop)]
pub fn cky(lex: &Lexicon, words: &[String]) -> BTreeSet<String> {
    let n = words.len();
    let mut chart: Vec<Vec<Vec<(Category, Term)>>> = vec![vec![vec![]; n + 1]; n + 1];
    for (i, w) in words.iter().enumerate() {
        for e in lex.lookup(w).unwrap() {
            chart[i][i + 1].push((e.cat.clone(), apart(&e.sem, i)));
        }
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut cell = Vec::new();
            for k in i + 1..j {
                for (lc, ls) in &chart[i][k] {
                    for (rc, rs) in &chart[k][j] {
                        if let Category::Slash { result, dir: Dir::Fwd, arg } = lc {
                            if **arg == *rc {
                                cell.push(((**result).clone(), Term::app1(ls.clone(), rs.clone())));
                            }
                        }
                        if let Category::Slash { result, dir: Dir::Bwd, arg } = rc {
                            if **arg == *lc {
                                cell.push(((**result).clone(), Term::app1(rs.clone(), ls.clone())));
                            }
                        }
                    }
                }
            }
            chart[i][j] = cell;
        }
    }
    chart[0][n]
        .iter()
        .filter(|(c, _)| *c == Category::S)
        .map(|(_, t)| alpha_key(&beta_reduce(t).unwrap()))
        .collect()
}

/// A finite model over domain `0..n`.
#[derive(Debug, Clone)]
pub struct Model {
    pub n: usize,
    pub consts: HashMap<String, usize>,
    pub ext: HashMap<(String, usize), BTreeSet<Vec<usize>>>,
}

impl Model {
    /// The same model as a world file; `sig` predicates are declared via a
    /// vacuous constraint so empty extensions are still known.
    pub fn to_world(&self, sig: &[(&str, usize)]) -> WorldModel {
        let name = |i: usize| format!("e{i}");
        let mut src = String::new();
        for i in 0..self.n {
            src.push_str(&format!("entity {}\n", name(i)));
        }
        for ((p, _), tuples) in &self.ext {
            for t in tuples {
                if t.is_empty() {
                    src.push_str(&format!("fact {p}\n"));
                } else {
                    src.push_str(&format!("fact {p}({})\n", t.iter().map(|i| name(*i)).join(",")));
                }
            }
        }
        for (p, ar) in sig {
            let vars: Vec<String> = (0..*ar).map(|i| format!("v{i}")).collect();
            let mut body = if *ar == 0 {
                p.to_string()
            } else {
                format!("{p}({})", vars.join(","))
            };
            body = format!("impl({body},true)");
            for v in vars.iter().rev() {
                body = format!("forall({v},true,{body})");
            }
            src.push_str(&format!("constraint sig_{p} : {body}\n"));
        }
        WorldModel::load(&src).unwrap()
    }
}

/// Every model of size `n` over `sig`, with constants `consts` denoting
/// every combination of elements.
pub fn all_models(sig: &[(&str, usize)], consts: &[&str], n: usize) -> Vec<Model> {
    let mut slots: Vec<(String, usize, Vec<usize>)> = Vec::new();
    for (p, ar) in sig {
        if *ar == 0 {
            slots.push((p.to_string(), 0, vec![]));
            continue;
        }
        for t in (0..*ar).map(|_| 0..n).multi_cartesian_product() {
            slots.push((p.to_string(), *ar, t));
        }
    }
    assert!(slots.len() <= 16, "{} ground atoms is too many to enumerate", slots.len());
    let mut out = Vec::new();
    let denotations: Vec<Vec<usize>> = if consts.is_empty() {
        vec![vec![]]
    } else {
        consts.iter().map(|_| 0..n).multi_cartesian_product().collect()
    };
    for bits in 0u64..(1u64 << slots.len()) {
        for den in &denotations {
            let mut ext: HashMap<(String, usize), BTreeSet<Vec<usize>>> = HashMap::new();
            for (i, (p, ar, t)) in slots.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    ext.entry((p.clone(), *ar)).or_default().insert(t.clone());
                }
            }
            out.push(Model {
                n,
                consts: consts.iter().map(|c| c.to_string()).zip(den.iter().copied()).collect(),
                ext,
            });
        }
    }
    out
}

impl Model {
    fn key_under(&self, perm: &[usize]) -> Vec<(String, usize, Vec<Vec<usize>>)> {
        let mut key: Vec<_> = self
            .ext
            .iter()
            .map(|((p, ar), ts)| {
                let mut ts: Vec<Vec<usize>> = ts.iter().map(|t| t.iter().map(|i| perm[*i]).collect()).collect();
                ts.sort();
                (p.clone(), *ar, ts)
            })
            .collect();
        key.sort();
        key
    }
}

/// One model of size `n` per isomorphism class. Closed formulas without
/// constants cannot tell isomorphic models apart.
pub fn models_up_to_iso(sig: &[(&str, usize)], n: usize) -> Vec<Model> {
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    all_models(sig, &[], n)
        .into_iter()
        .filter(|m| {
            let own = m.key_under(&perms[0]);
            perms[1..].iter().all(|p| own <= m.key_under(p))
        })
        .collect()
}

/// A random model of size `n` over `sig`.
pub fn random_model(rng: &mut StdRng, sig: &[(&str, usize)], n: usize) -> Model {
    let mut ext: HashMap<(String, usize), BTreeSet<Vec<usize>>> = HashMap::new();
    for (p, ar) in sig {
        for t in (0..*ar).map(|_| 0..n).multi_cartesian_product() {
            if rng.random_bool(0.5) {
                ext.entry((p.to_string(), *ar)).or_default().insert(t);
            }
        }
    }
    Model {
        n,
        consts: HashMap::new(),
        ext,
    }
}

/// Textbook Tarskian truth.
pub fn classical(f: &Term, m: &Model, env: &mut BTreeMap<String, usize>) -> bool {
    match f {
        Term::True => true,
        Term::Const(p) => m.ext.get(&(p.clone(), 0)).is_some_and(|s| s.contains(&vec![])),
        Term::App(h, args) => {
            let Term::Const(p) = &**h else { panic!("not first order: {f}") };
            let vals: Vec<usize> = args
                .iter()
                .map(|a| match a {
                    Term::Var(v) => env[v],
                    Term::Const(c) => m.consts[c],
                    other => panic!("bad argument {other}"),
                })
                .collect();
            if p == "eq" && vals.len() == 2 {
                return vals[0] == vals[1];
            }
            m.ext.get(&(p.clone(), vals.len())).is_some_and(|s| s.contains(&vals))
        }
        Term::And(l, r) => classical(l, m, env) && classical(r, m, env),
        Term::Impl(a, c) => !classical(a, m, env) || classical(c, m, env),
        Term::Scoped {
            quant,
            var,
            restrictor,
            body,
        } => {
            let saved = env.get(var).copied();
            let mut sat = Vec::new();
            for d in 0..m.n {
                env.insert(var.clone(), d);
                sat.push((classical(restrictor, m, env), classical(body, m, env)));
            }
            match saved {
                Some(d) => env.insert(var.clone(), d),
                None => env.remove(var),
            };
            match quant {
                Quant::Exists | Quant::The => sat.iter().any(|(r, b)| *r && *b),
                Quant::Forall => sat.iter().all(|(r, b)| !*r || *b),
                Quant::No => !sat.iter().any(|(r, b)| *r && *b),
            }
        }
        other => panic!("not a formula: {other}"),
    }
}

/// Predicates and arities of a formula. A bare constant is a nullary
/// predicate unless it occurs as an argument.
pub fn signature(t: &Term) -> Vec<(String, usize)> {
    let args = arg_constants(t);
    let mut out = BTreeSet::new();
    t.visit(&mut |n| match n {
        Term::App(h, a) => {
            if let Term::Const(p) = &**h {
                out.insert((p.clone(), a.len()));
            }
        }
        Term::Const(c) if !args.contains(c) => {
            out.insert((c.clone(), 0));
        }
        _ => {}
    });
    let heads: BTreeSet<String> = out.iter().filter(|(_, n)| *n > 0).map(|(p, _)| p.clone()).collect();
    out.into_iter().filter(|(p, n)| *n > 0 || !heads.contains(p)).collect()
}

/// Constants in argument positions.
pub fn arg_constants(t: &Term) -> Vec<String> {
    let mut out = Vec::new();
    t.visit(&mut |n| {
        if let Term::App(_, args) = n {
            for a in args {
                if let Term::Const(c) = a {
                    if !out.contains(c) {
                        out.push(c.clone());
                    }
                }
            }
        }
    });
    out
}

/// Entailment by enumerating every model of size `1..=k`.
pub fn brute_entails(a: &Term, b: &Term, k: usize) -> bool {
    let both = Term::and(a.clone(), b.clone());
    let sig: Vec<(String, usize)> = signature(&both).into_iter().filter(|(p, _)| p != "eq").collect();
    let sig_ref: Vec<(&str, usize)> = sig.iter().map(|(p, n)| (p.as_str(), *n)).collect();
    let consts = arg_constants(&both);
    let consts_ref: Vec<&str> = consts.iter().map(String::as_str).collect();
    for n in 1..=k {
        for m in all_models(&sig_ref, &consts_ref, n) {
            let mut env = BTreeMap::new();
            if classical(a, &m, &mut env) && !classical(b, &m, &mut env) {
                return false;
            }
        }
    }
    true
}

/// Signature of the random formulas.
pub const RANDOM_SIG: [(&str, usize); 2] = [("p", 1), ("r", 2)];

/// Random closed first-order formula over `p/1` and `r/2`.
pub fn random_formula(rng: &mut StdRng, depth: usize, bound: &mut Vec<String>) -> Term {
    let atom = |rng: &mut StdRng, bound: &[String]| -> Term {
        if bound.is_empty() {
            return Term::True;
        }
        let pick = |rng: &mut StdRng| Term::var(bound[rng.random_range(0..bound.len())].clone());
        if rng.random_bool(0.5) {
            Term::app(Term::cnst("p"), vec![pick(rng)])
        } else {
            Term::app(Term::cnst("r"), vec![pick(rng), pick(rng)])
        }
    };
    if depth == 0 {
        return atom(rng, bound);
    }
    match rng.random_range(0..6) {
        0 => atom(rng, bound),
        1 => Term::and(random_formula(rng, depth - 1, bound), random_formula(rng, depth - 1, bound)),
        2 => Term::implies(random_formula(rng, depth - 1, bound), random_formula(rng, depth - 1, bound)),
        _ => {
            let v = format!("x{}", bound.len());
            bound.push(v.clone());
            let r = if rng.random_bool(0.4) {
                Term::True
            } else {
                random_formula(rng, depth - 1, bound)
            };
            let b = random_formula(rng, depth - 1, bound);
            bound.pop();
            let q = [Quant::Exists, Quant::Forall, Quant::No, Quant::The][rng.random_range(0..4)];
            Term::scoped(q, v, r, b)
        }
    }
}

struct Q {
    quant: Quant,
    var: String,
    restrictor: Term,
}

fn top_qterms(t: &Term, out: &mut Vec<Q>) {
    match t {
        Term::QTerm {
            quant,
            var,
            restrictor,
        } => out.push(Q {
            quant: *quant,
            var: var.clone(),
            restrictor: (**restrictor).clone(),
        }),
        _ => t.children().into_iter().for_each(|c| top_qterms(c, out)),
    }
}

fn strip_qterms(t: &Term, vars: &[String]) -> Term {
    t.map_bottom_up(&mut |n| match n {
        Term::QTerm { var, .. } if vars.contains(&var) => Term::Var(var),
        other => other,
    })
}

/// Readings by generating every discharge order and filtering out those
/// violating the free-variable constraint or a preference pair
/// `(outer, inner)`. Restrictor conjuncts are scoped on their own.
pub fn oracle_scopings(body: &Term, pairs: &[(String, String)]) -> Vec<String> {
    let mut out: Vec<String> = oracle_terms(body, pairs).into_iter().map(|t| t.to_string()).collect();
    out.sort();
    out
}

/// Every quantifier term, nested ones included.
pub fn count_qterms(t: &Term) -> usize {
    let mut n = 0;
    t.visit(&mut |s| n += matches!(s, Term::QTerm { .. }) as usize);
    n
}

fn oracle_restrictor(r: &Term, pairs: &[(String, String)]) -> Vec<Term> {
    match r {
        Term::And(a, b) if r.contains_qterm() => {
            let mut out = Vec::new();
            for x in oracle_restrictor(a, pairs) {
                for y in oracle_restrictor(b, pairs) {
                    out.push(Term::and(x.clone(), y));
                }
            }
            out
        }
        _ => oracle_terms(r, pairs),
    }
}

fn oracle_terms(body: &Term, pairs: &[(String, String)]) -> Vec<Term> {
    let mut qs = Vec::new();
    top_qterms(body, &mut qs);
    let vars: Vec<String> = qs.iter().map(|q| q.var.clone()).collect();
    let core = strip_qterms(body, &vars);
    let mut out = Vec::new();
    for perm in (0..qs.len()).permutations(qs.len()) {
        let ok = perm.iter().enumerate().all(|(i, &a)| {
            perm[i + 1..].iter().all(|&b| {
                let outer_mentions_inner = qs[a].restrictor.raw_free_vars().contains(&qs[b].var);
                let pref_violated = pairs.iter().any(|(o, n)| *o == qs[b].var && *n == qs[a].var);
                !outer_mentions_inner && !pref_violated
            })
        });
        if !ok {
            continue;
        }
        let restrictors: Vec<Vec<Term>> = perm.iter().map(|&i| oracle_restrictor(&qs[i].restrictor, pairs)).collect();
        let choices: Vec<Vec<Term>> = if restrictors.is_empty() {
            vec![vec![]]
        } else {
            restrictors.into_iter().multi_cartesian_product().collect()
        };
        for rs in choices {
            let mut f = core.clone();
            for (&i, r) in perm.iter().zip(rs).rev() {
                f = Term::scoped(qs[i].quant, qs[i].var.clone(), r, f);
            }
            out.push(f);
        }
    }
    out
}
