//! Acceptance run: one line per criterion, non-zero exit if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use incr_core::closure::{close_existentially, UnscopedProp};
use incr_core::evaluator::{evaluate, Assignment};
use incr_core::lexicon::Lexicon;
use incr_core::lf::{alpha_eq, parse_lf, LfParser, Term};
use incr_core::parser::{ParserConfig, ParserState};
use incr_core::report::StateReport;
use incr_core::scoper::{enumerate_scopings, persist_preference, ScopedReading};
use incr_core::session::{Session, SessionConfig};
use incr_core::tms::{SourceId, Tms};
use incr_core::world::{WorldModel, LONDON_WORLD, RABBITS_WORLD, WORKSHOP_WORLD};
use support::{
    all_models, brute_entails, classical, count_qterms, discourses, models_up_to_iso, oracle_scopings,
    random_formula, sentences, RANDOM_SIG,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn session(world: &str) -> Session {
    session_with(world, false)
}

fn session_with(world: &str, s_modifiers: bool) -> Session {
    Session::new(
        Arc::new(Lexicon::demo()),
        Arc::new(WorldModel::load(world).unwrap()),
        SessionConfig {
            parser: ParserConfig {
                s_modifiers,
                ..ParserConfig::default()
            },
            domain_k: 3,
        },
    )
}

fn feed(s: &mut Session, text: &str) -> Result<StateReport, String> {
    let mut last = s.snapshot();
    for w in text.split_whitespace() {
        last = s.feed_word(w).map_err(|e| format!("`{w}`: {e}"))?.clone();
    }
    Ok(last)
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("took {took:.2?}, limit {limit:.0?}"))
    }
}

const OUTPUT1: &str = "exists(w,true,and(and(tower(w),has(london,w)),forall(x,parent(x),exists(z,true,show(x,w,z)))))";
const OUTPUT2: &str = "exists(w,true,exists(z,true,and(and(tower(w),has(london,w)),forall(x,parent(x),show(x,w,z)))))";

fn worked_example() -> Outcome {
    let start = Instant::now();
    let mut s = session(LONDON_WORLD);
    let r = feed(&mut s, "london has a tower . every parent shows it")?;
    within(start, Duration::from_secs(1))?;
    let p = &r.pipeline[0];
    let want = [
        ("lambda", p.lambda.as_str(), "lam(z,show(q(forall,x,parent(x)),pro(y),z))"),
        (
            "closure",
            p.closure.as_deref().unwrap_or(""),
            "show(q(forall,x,parent(x)),pro(y),q(exists,z,true))",
        ),
        (
            "coindexing",
            p.coindexed.first().map_or("", String::as_str),
            "show(q(forall,x,parent(x)),w,q(exists,z,true))",
        ),
        (
            "scoping 1",
            p.scopings.first().map_or("", String::as_str),
            "forall(x,parent(x),exists(z,true,show(x,w,z)))",
        ),
        (
            "scoping 2",
            p.scopings.get(1).map_or("", String::as_str),
            "exists(z,true,forall(x,parent(x),show(x,w,z)))",
        ),
        ("context 1", p.contexts.first().map_or("", String::as_str), OUTPUT1),
        ("context 2", p.contexts.get(1).map_or("", String::as_str), OUTPUT2),
    ];
    for (stage, got, want) in want {
        ensure!(got == want, "{stage}: got {got}, want {want}");
    }
    // The coindexing with the tower has exactly the two scopings.
    let first: Vec<&str> = r
        .readings
        .iter()
        .filter(|x| x.hypothesis == 0 && x.candidate == 0)
        .map(|x| x.lf.as_str())
        .collect();
    ensure!(first == [&p.scopings[0], &p.scopings[1]], "readings {first:?}");
    Ok(format!("{:.0?}", start.elapsed()))
}

/// Hypotheses other than the sentence-modifier wrap.
fn main_hyps(r: &StateReport) -> Vec<Term> {
    r.hypotheses
        .iter()
        .filter(|h| !h.ty.ends_with("(t->t)->t"))
        .map(|h| parse_lf(&h.lf).unwrap())
        .collect()
}

fn introduced_table() -> Outcome {
    let start = Instant::now();
    let table = [
        ("mary", "lam(P,P(mary))"),
        ("introduced", "lam(x,lam(y,intr(mary,x,y)))"),
        ("john", "lam(y,intr(mary,john,y))"),
        ("to", "lam(y,intr(mary,john,y))"),
        ("sue", "intr(mary,john,sue)"),
    ];
    let mut s = session(LONDON_WORLD);
    for (word, want) in table {
        let r = s.feed_word(word).map_err(|e| e.to_string())?;
        let got = main_hyps(r);
        ensure!(got.len() == 1, "{word}: {} hypotheses", got.len());
        ensure!(alpha_eq(&got[0], &parse_lf(want).unwrap()), "{word}: got {}, want {want}", got[0]);
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{:.0?}", start.elapsed()))
}

fn printed_hyps(r: &StateReport) -> Vec<String> {
    r.hypotheses.iter().map(|h| format!("{} : {}", h.lf, h.ty)).collect()
}

fn mary_thinks_john() -> Outcome {
    let off = feed(&mut session(LONDON_WORLD), "mary thinks john")?;
    let two = [
        "lam(P,thinks(mary,P(john))) : (e->t)->t",
        "lam(P,lam(Q,Q(thinks(mary,P(john))))) : (e->t)->(t->t)->t",
    ];
    ensure!(printed_hyps(&off) == two, "off: {:?}", printed_hyps(&off));
    let on = feed(&mut session_with(LONDON_WORLD, true), "mary thinks john")?;
    let four = [
        two[0],
        two[1],
        "lam(P,lam(Q,Q(lam(x,thinks(x,P(john))),mary))) : (e->t)->((e->t)->e->t)->t",
        "lam(P,lam(Q,lam(R,R(Q(lam(x,thinks(x,P(john))),mary))))) : (e->t)->((e->t)->e->t)->(t->t)->t",
    ];
    ensure!(printed_hyps(&on) == four, "on: {:?}", printed_hyps(&on));
    let mut prefixes = 0;
    let mut widest = 0;
    for s_modifiers in [false, true] {
        let cfg = ParserConfig {
            s_modifiers,
            ..ParserConfig::default()
        };
        let lex = Lexicon::demo();
        for sentence in sentences() {
            let mut st = ParserState::new();
            for w in &sentence {
                st = st.step_word(&lex, w, &cfg).map_err(|e| format!("{sentence:?}: {e}"))?;
                ensure!(st.hyps().len() <= 16, "{} hypotheses after `{w}` in {sentence:?}", st.hyps().len());
                widest = widest.max(st.hyps().len());
                prefixes += 1;
            }
        }
    }
    Ok(format!("2 and 4 hypotheses; at most {widest} over {prefixes} prefixes"))
}

fn retraction() -> Outcome {
    // In a session: the "noone" reading retracts the prefix proposition.
    let mut s = session(LONDON_WORLD);
    let r = feed(&mut s, "mary introduced")?;
    let prefix = r
        .propositions
        .iter()
        .find(|p| p.lf == "exists(x,true,exists(y,true,intr(mary,x,y)))")
        .ok_or("prefix proposition not asserted")?;
    let tag = prefix.sources[0].clone();
    let r = feed(&mut s, "noone to anybody")?;
    ensure!(
        r.events.iter().any(|e| e.text.starts_with(&format!("RETRACT {tag} REASON entailment-failure"))),
        "no retraction of {tag}: {:?}",
        r.events
    );
    ensure!(
        r.propositions.iter().all(|p| !p.sources.contains(&tag)),
        "{tag} still supports {:?}",
        r.propositions
    );
    // The entailment failure agrees with brute force over small models.
    let noone = parse_lf("no(x,true,exists(y,true,intr(mary,x,y)))").unwrap();
    let some = parse_lf("exists(x,true,exists(y,true,intr(mary,x,y)))").unwrap();
    ensure!(!brute_entails(&noone, &some, 2), "oracle finds entailment");

    // Conclusions drawn from the retracted source go with it.
    let mut db = Tms::new(2);
    let u1 = db.assert_prop(some.clone(), None).unwrap().id;
    let rule = Term::implies(some.clone(), parse_lf("met(mary)").unwrap());
    let u2 = db.assert_prop(rule, None).unwrap();
    ensure!(u2.derived.len() == 1, "no conclusion from {u1}");
    let out = db.assert_prop(noone, Some(u1)).unwrap();
    ensure!(out.retracted.as_ref().map(|r| r.0) == Some(u1), "{u1} kept");
    ensure!(out.removed.len() == 2, "removed {:?}", out.removed);
    ensure!(db.records().iter().all(|r| !r.sources.contains(&u1)), "{u1} dangling");

    // (P->Q,{u4}), (P,{u5}) gives (Q,{u4,u5}); retracting u5 removes Q.
    let mut db = Tms::starting_at(4, 1);
    let u4 = db.assert_prop(parse_lf("impl(p,q)").unwrap(), None).unwrap().id;
    let out = db.assert_prop(parse_lf("p").unwrap(), None).unwrap();
    let u5 = out.id;
    ensure!((u4, u5) == (SourceId(4), SourceId(5)), "tags {u4}, {u5}");
    let derived: Vec<String> = out
        .derived
        .iter()
        .map(|r| {
            let tags: Vec<String> = r.sources.iter().map(ToString::to_string).collect();
            format!("({},{{{}}})", r.prop, tags.join(","))
        })
        .collect();
    ensure!(derived == ["(q,{u4,u5})"], "derived {derived:?}");
    db.retract(u5).map_err(|e| e.to_string())?;
    let left: Vec<String> = db.records().iter().map(|r| r.prop.to_string()).collect();
    ensure!(left == ["impl(p,q)"], "left {left:?}");
    Ok(format!("{tag} retracted; (q,{{u4,u5}}) derived and retracted"))
}

fn printed(rs: &[ScopedReading]) -> Vec<String> {
    let mut out: Vec<String> = rs.iter().map(|r| r.formula.to_string()).collect();
    out.sort();
    out
}

fn pairs_of(order: &[String]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, a) in order.iter().enumerate() {
        for b in &order[i + 1..] {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

fn scoping_oracle() -> Outcome {
    const NODE: &str = "s0";
    let start = Instant::now();
    let lex = Lexicon::demo();
    let cfg = ParserConfig::default();
    let mut plain = 0;
    let mut narrowed_checks = 0;
    for sentence in sentences() {
        let mut st = ParserState::new();
        let mut prefixes: Vec<Vec<UnscopedProp>> = Vec::new();
        for w in &sentence {
            st = st.step_word(&lex, w, &cfg).map_err(|e| e.to_string())?;
            prefixes.push(
                st.hyps()
                    .iter()
                    .filter_map(|h| close_existentially(h).ok())
                    .filter(|p| count_qterms(&p.body) <= 4)
                    .collect(),
            );
        }
        for (i, props) in prefixes.iter().enumerate() {
            for p in props {
                let got = enumerate_scopings(&p.body, &[], NODE);
                ensure!(printed(&got) == oracle_scopings(&p.body, &[]), "{}", p.body);
                plain += 1;
                // Commit to each reading; later prefixes give its consistent extensions.
                for chosen in &got {
                    let prefs = persist_preference(&[], NODE, chosen, &got, |v| !p.introduced.iter().any(|x| x == v))
                        .map_err(|e| e.to_string())?;
                    let pairs = pairs_of(&prefs[0].discharged);
                    for later in prefixes[i..].iter().flatten() {
                        let narrowed = enumerate_scopings(&later.body, &prefs, NODE);
                        ensure!(
                            printed(&narrowed) == oracle_scopings(&later.body, &pairs),
                            "{} under {:?}",
                            later.body,
                            prefs[0].discharged
                        );
                        narrowed_checks += 1;
                    }
                }
            }
        }
    }
    // Jungle path: the man-wide reading persists as quantifiers arrive.
    let prefix = parse_lf("mugged_every(q(exists,x,man(x)),q(forall,y,and(second(y),eleven(y))))").unwrap();
    let readings = enumerate_scopings(&prefix, &[], NODE);
    ensure!(readings.len() == 2, "{} readings of the prefix", readings.len());
    let man_wide = readings.iter().find(|r| r.order == ["x", "y"]).ok_or("no man-wide reading")?;
    let prefs = persist_preference(&[], NODE, man_wide, &readings, |_| true).map_err(|e| e.to_string())?;
    let longer =
        parse_lf("in(mugged_every(q(exists,x,man(x)),q(forall,y,and(second(y),eleven(y)))),q(the,z,city(z)))").unwrap();
    let narrowed = enumerate_scopings(&longer, &prefs, NODE);
    let orders: Vec<String> = narrowed.iter().map(|r| r.order.join("")).collect();
    ensure!(orders == ["xyz", "xzy", "zxy"], "jungle orders {orders:?}");
    ensure!(
        printed(&narrowed) == oracle_scopings(&longer, &pairs_of(&prefs[0].discharged)),
        "jungle path differs from oracle"
    );
    within(start, Duration::from_secs(5))?;
    Ok(format!(
        "{plain} propositions, {narrowed_checks} committed extensions, {:.0?}",
        start.elapsed()
    ))
}

fn evaluator_oracle() -> Outcome {
    let worlds: Vec<_> = (1..=3)
        .flat_map(|n| models_up_to_iso(&RANDOM_SIG, n))
        .map(|m| {
            let w = m.to_world(&RANDOM_SIG);
            (m, w)
        })
        .collect();
    let mut rng = StdRng::seed_from_u64(0xacce);
    for _ in 0..500 {
        let f = random_formula(&mut rng, 4, &mut vec![]);
        for (m, w) in &worlds {
            let want = classical(&f, m, &mut BTreeMap::new());
            let got = evaluate(&f, w, &Assignment::new()).map_err(|e| format!("{f}: {e}"))?;
            ensure!(got == want, "{f} in {m:?}: dynamic {got}, classical {want}");
        }
    }
    // "if a farmer owns a donkey he beats it" and "he beats it if a farmer owns a donkey".
    let sig = [("farmer", 1), ("donkey", 1), ("owns", 2), ("beats", 2)];
    let open = LfParser::new().free_vars(["x", "y"]);
    let ante = open.parse("exists(x,farmer(x),exists(y,donkey(y),owns(x,y)))").unwrap();
    let cons = open.parse("beats(x,y)").unwrap();
    let orders = [
        ("antecedent first", vec![ante.clone(), cons.clone()], true),
        ("consequent first", vec![cons, ante], false),
    ];
    let oracle = parse_lf("forall(x,farmer(x),forall(y,and(donkey(y),owns(x,y)),beats(x,y)))").unwrap();
    let mut models = 0;
    for n in 1..=2 {
        for m in all_models(&sig, &[], n) {
            let w = m.to_world(&sig);
            let want = classical(&oracle, &m, &mut BTreeMap::new());
            for (name, clauses, antecedent_first) in &orders {
                let (a, c) = if *antecedent_first {
                    (&clauses[0], &clauses[1])
                } else {
                    (&clauses[1], &clauses[0])
                };
                let f = Term::implies(a.clone(), c.clone());
                let got = evaluate(&f, &w, &Assignment::new()).map_err(|e| format!("{name}: {e}"))?;
                ensure!(got == want, "{name} in {m:?}");
            }
            models += 1;
        }
    }
    Ok(format!(
        "500 formulas x {} models; donkey on {models} models",
        worlds.len()
    ))
}

fn rabbit_in_none_of_the_boxes() -> Outcome {
    let world = WorldModel::load(RABBITS_WORLD).unwrap();
    // Rabbits that no box contains, read off the facts.
    let ents = world.entities();
    let want: BTreeSet<String> = ents
        .iter()
        .filter(|r| world.holds("rabbit", &[r.to_string()]))
        .filter(|r| {
            !ents
                .iter()
                .any(|b| world.holds("box", std::slice::from_ref(b)) && world.holds("in", &[r.to_string(), b.clone()]))
        })
        .cloned()
        .collect();
    let r = feed(&mut session(RABBITS_WORLD), "the rabbit in none of the boxes")?;
    let subject = r.referents.first().ok_or("no referent for the description")?;
    let got: BTreeSet<String> = subject.entities.iter().cloned().collect();
    ensure!(got == want, "resolved to {got:?}, want {want:?}");
    ensure!(got.len() == 1, "not unique: {got:?}");
    Ok(format!("{} -> {{{}}}", subject.marker, got.into_iter().collect::<Vec<_>>().join(",")))
}

fn punch_blocks() -> Outcome {
    let script = "put the punch onto the plate";
    let mut child = Command::new(env!("CARGO_BIN_EXE_incr"))
        .args(["--world", "workshop"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure!(out.status.code() == Some(3), "exit {:?}: {stderr}", out.status.code());
    let sections = stdout.matches("\n== ").count() + stdout.starts_with("== ") as usize;
    ensure!(sections < script.split_whitespace().count(), "blocked only after {sections} words");
    let blocked = stdout
        .lines()
        .find_map(|l| l.trim().strip_prefix("BLOCKED "))
        .ok_or("no BLOCKED event")?
        .to_string();
    ensure!(
        WorldModel::load(WORKSHOP_WORLD)
            .unwrap()
            .constraints()
            .iter()
            .any(|c| c.name == blocked),
        "`{blocked}` is not a world constraint"
    );
    ensure!(stderr.contains(&blocked), "stderr does not name `{blocked}`");
    Ok(format!("exit 3 after {sections} of 6 words, constraint {blocked}"))
}

fn replay_determinism() -> Outcome {
    let worlds = [LONDON_WORLD, RABBITS_WORLD, WORKSHOP_WORLD];
    let corpus = discourses();
    let mut rng = StdRng::seed_from_u64(9);
    let mut snapshots = 0;
    for run in 0..200 {
        let world = worlds[rng.random_range(0..worlds.len())];
        let words = &corpus[rng.random_range(0..corpus.len())];
        let mut s = session(world);
        for _ in 0..rng.random_range(1..30) {
            let n = s.words().len();
            if rng.random_range(0..10) < 3 && s.can_undo() {
                s.undo_word().map_err(|e| e.to_string())?;
            } else if n < words.len() {
                // Blocked or dead-end steps leave the session as it was.
                let _ = s.feed_word(&words[n]);
            }
            let mut fresh = session(world);
            for w in s.words() {
                fresh.feed_word(w).map_err(|e| format!("run {run}: replay of `{w}`: {e}"))?;
            }
            let live = serde_json::to_string(&s.snapshot()).unwrap();
            let replayed = serde_json::to_string(&fresh.snapshot()).unwrap();
            ensure!(live == replayed, "run {run} differs after {:?}", s.words());
            snapshots += 1;
        }
    }
    Ok(format!("200 runs, {snapshots} snapshots"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("worked example", worked_example),
        ("word-by-word table", introduced_table),
        ("mary thinks john", mary_thinks_john),
        ("retraction", retraction),
        ("scoping oracle", scoping_oracle),
        ("evaluator oracle", evaluator_oracle),
        ("non-eliminative reference", rabbit_in_none_of_the_boxes),
        ("mid-VP interruption", punch_blocks),
        ("replay/undo determinism", replay_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
