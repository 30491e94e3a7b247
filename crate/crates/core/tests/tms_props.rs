//! Entailment against model enumeration, and the record store under
//! random assert/retract sequences.

mod support;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use incr_core::lf::{alpha_key, parse_lf, Term};
use incr_core::tms::{entails, Countermodel, EntailmentBudget, SourceId, Tms};
use support::{brute_entails, classical, random_formula, Model};

fn ent(a: &Term, b: &Term, k: usize) -> incr_core::tms::Entailment {
    entails(a, b, k, EntailmentBudget::default()).unwrap()
}

/// The countermodel read back as a model.
fn to_model(cm: &Countermodel) -> Model {
    let index: HashMap<&str, usize> = cm.domain.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let mut ext: HashMap<(String, usize), BTreeSet<Vec<usize>>> = HashMap::new();
    for f in &cm.facts {
        let (p, args) = match f.split_once('(') {
            Some((p, rest)) => (
                p.to_string(),
                rest.trim_end_matches(')').split(',').map(|a| index[a]).collect::<Vec<_>>(),
            ),
            None => (f.clone(), vec![]),
        };
        ext.entry((p, args.len())).or_default().insert(args);
    }
    Model {
        n: cm.domain.len(),
        consts: cm.constants.iter().map(|(c, d)| (c.clone(), index[d.as_str()])).collect(),
        ext,
    }
}

fn check_against_oracle(a: &Term, b: &Term, k: usize) -> Result<(), TestCaseError> {
    let e = ent(a, b, k);
    prop_assert_eq!(e.holds, brute_entails(a, b, k), "{} |= {}", a, b);
    if let Some(cm) = &e.countermodel {
        prop_assert!(!e.holds);
        let m = to_model(cm);
        prop_assert!(m.n <= k);
        prop_assert!(classical(a, &m, &mut BTreeMap::new()), "{} false in {}", a, cm);
        prop_assert!(!classical(b, &m, &mut BTreeMap::new()), "{} true in {}", b, cm);
    } else {
        prop_assert!(e.holds);
    }
    Ok(())
}

fn formula(rng: &mut StdRng, depth: usize) -> Term {
    random_formula(rng, depth, &mut vec![])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entailment_matches_model_enumeration(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = formula(&mut rng, 3);
        let b = if rng.random_bool(0.3) { Term::and(a.clone(), formula(&mut rng, 2)) } else { formula(&mut rng, 3) };
        check_against_oracle(&a, &b, 2)?;
        check_against_oracle(&b, &a, 2)?;
    }

    #[test]
    fn entailment_is_reflexive_and_transitive(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = formula(&mut rng, 3);
        let b = formula(&mut rng, 3);
        let c = formula(&mut rng, 3);
        prop_assert!(ent(&a, &a, 2).holds);
        if ent(&a, &b, 2).holds && ent(&b, &c, 2).holds {
            prop_assert!(ent(&a, &c, 2).holds);
        }
        // Strengthening the premise keeps entailments.
        prop_assert!(ent(&Term::and(a.clone(), b.clone()), &a, 2).holds);
    }
}

#[test]
fn constants_are_interpreted_freely() {
    let cases = [
        ("intr(mary,john,sue)", "exists(x,true,exists(y,true,intr(mary,x,y)))", true),
        ("intr(mary,john,sue)", "intr(mary,sue,john)", false),
        ("and(likes(john,mary),likes(mary,john))", "exists(x,likes(x,x),true)", false),
        ("forall(x,true,likes(x,mary))", "likes(mary,mary)", true),
        ("no(x,true,exists(y,true,intr(mary,x,y)))", "exists(x,true,exists(y,true,intr(mary,x,y)))", false),
        ("and(p,impl(p,q))", "q", true),
    ];
    for (a, b, want) in cases {
        let (a, b) = (parse_lf(a).unwrap(), parse_lf(b).unwrap());
        for k in 1..=2 {
            check_against_oracle(&a, &b, k).unwrap();
        }
        assert_eq!(ent(&a, &b, 3).holds, want, "{a} |= {b}");
    }
}

/// Propositional pool for record-store sequences.
const POOL: [&str; 8] = ["p", "q", "r", "impl(p,q)", "impl(q,r)", "impl(r,s)", "impl(s,p)", "and(p,q)"];

/// Modus ponens closure of the base propositions, by key.
fn mp_closure(base: &[Term]) -> BTreeSet<String> {
    let mut props: Vec<Term> = base.to_vec();
    loop {
        let keys: BTreeSet<String> = props.iter().map(alpha_key).collect();
        let new: Vec<Term> = props
            .iter()
            .filter_map(|t| match t {
                Term::Impl(a, c) if keys.contains(&alpha_key(a)) && !keys.contains(&alpha_key(c)) => {
                    Some((**c).clone())
                }
                _ => None,
            })
            .collect();
        if new.is_empty() {
            return keys;
        }
        props.extend(new);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn records_never_dangle(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut db = Tms::new(1);
        let mut live: Vec<(SourceId, Term)> = Vec::new();
        for _ in 0..rng.random_range(1..25) {
            if !live.is_empty() && rng.random_bool(0.35) {
                let (id, _) = live.remove(rng.random_range(0..live.len()));
                let gone = db.retract(id).unwrap();
                prop_assert!(gone.iter().all(|r| r.sources.contains(&id)));
            } else {
                let t = parse_lf(POOL[rng.random_range(0..POOL.len())]).unwrap();
                let out = db.assert_prop(t.clone(), None).unwrap();
                prop_assert!(out.retracted.is_none());
                live.push((out.id, t));
            }
            let ids: BTreeSet<SourceId> = live.iter().map(|(i, _)| *i).collect();
            for r in db.records() {
                prop_assert!(r.sources.is_subset(&ids), "{:?} with live {:?}", r, ids);
                prop_assert_eq!(r.derived, r.sources.len() > 1);
            }
            for (id, t) in &live {
                prop_assert_eq!(&db.record(*id).unwrap().prop, t);
            }
            let base: Vec<Term> = live.iter().map(|(_, t)| t.clone()).collect();
            let stored: BTreeSet<String> = db.records().iter().map(|r| alpha_key(&r.prop)).collect();
            prop_assert_eq!(stored, mp_closure(&base));
        }
    }
}

#[test]
fn retraction_after_refutation_carries_a_countermodel() {
    let mut db = Tms::new(3);
    let some = db
        .assert_prop(parse_lf("exists(x,true,exists(y,true,intr(mary,x,y)))").unwrap(), None)
        .unwrap();
    db.assert_prop(parse_lf("impl(exists(x,true,exists(y,true,intr(mary,x,y))),busy(mary))").unwrap(), None)
        .unwrap();
    assert!(db.records().iter().any(|r| r.derived));
    let none = parse_lf("no(x,true,exists(y,true,intr(mary,x,y)))").unwrap();
    let out = db.assert_prop(none.clone(), Some(some.id)).unwrap();
    let (id, cm) = out.retracted.unwrap();
    assert_eq!(id, some.id);
    assert!(classical(&none, &to_model(&cm), &mut BTreeMap::new()));
    assert!(out.removed.iter().any(|r| r.derived));
    assert!(db.records().iter().all(|r| !r.sources.contains(&some.id)));
}
