//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use dialplan_cli::{run, scale, Io};
use dialplan_core::compiler::{compile, GOAL};
use dialplan_core::determiners::{Counting, Registry, Scripted};
use dialplan_core::effects::{enumerate_realizations, resolve};
use dialplan_core::executor::{determine, Schedule};
use dialplan_core::fixtures;
use dialplan_core::normal::{diff, signature};
use dialplan_core::pddl::{parse_domain, parse_problem, ActionDef, Effect, NodePath};
use dialplan_core::planner::{parse_path_key, solve, validate_plan, PlanError};
use dialplan_core::session::{build_engine, Session, Status};
use dialplan_core::spec::load_spec;
use dialplan_core::trace::StepRecord;
use dialplan_sim::{fixtures as trees, run_bench, StrategyKind as K};
use dialplan_testkit::effects::{count, depth, random_full_choice, random_tree, walk};
use dialplan_testkit::fond::{random_problem, strong_cyclic_solvable};
use dialplan_testkit::scenario::{check_invariants, counting, CAR_INSPECTION_SCRIPT};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden() -> Check {
    let t = Instant::now();
    let spec = load_spec(fixtures::car_inspection(4)).map_err(|e| e.to_string())?;
    let c = compile(&spec).map_err(|e| e.to_string())?;
    let want = parse_domain(fixtures::CAR_INSPECTION_DOMAIN).map_err(|e| e.to_string())?;
    let wantp = parse_problem(fixtures::CAR_INSPECTION_PROBLEM).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed().as_secs_f64();

    let d = diff(&signature(&want).map_err(|e| e.to_string())?, &signature(&c.domain).map_err(|e| e.to_string())?);
    ensure(d.is_empty(), || format!("{} differences, first: {}", d.len(), d[0]))?;
    ensure(c.domain.predicates.len() == 24, || format!("{} predicates", c.domain.predicates.len()))?;
    ensure(c.domain.actions.len() == 7, || format!("{} actions", c.domain.actions.len()))?;
    let set = |s: &indexmap::IndexSet<String>| s.iter().cloned().collect::<BTreeSet<_>>();
    ensure(set(&c.problem.init) == set(&wantp.init), || "init differs".into())?;
    ensure(c.problem.init.len() == 9, || format!("{} init fluents", c.problem.init.len()))?;
    ensure(set(&c.problem.goal) == BTreeSet::from([GOAL.to_string()]), || "goal differs".into())?;
    ensure(elapsed < 1.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!("24 predicates, 7 actions, 9 init fluents, exact match in {elapsed:.3} s"))
}

fn scale_up() -> Check {
    let rows = scale::scale_up().map_err(|f| f.message)?;
    let vars: Vec<usize> = rows.iter().map(|r| r.variables).collect();
    let acts: Vec<usize> = rows.iter().map(|r| r.actions).collect();
    ensure(vars == [5, 6, 7, 8], || format!("variables {vars:?}"))?;
    ensure(acts == [4, 5, 6, 7], || format!("actions {acts:?}"))?;
    ensure(rows.iter().all(|r| r.valid), || "invalid controller".into())?;
    ensure(rows.windows(2).all(|w| w[0].nodes <= w[1].nodes), || "node counts decrease".into())?;
    let slowest = rows.iter().map(|r| r.solve_secs_wallclock).fold(0.0, f64::max);
    ensure(slowest < 5.0, || format!("slowest instance {slowest:.3} s"))?;
    let ne: Vec<String> = rows.iter().map(|r| format!("{}/{}", r.nodes, r.edges)).collect();
    Ok(format!("nodes/edges {} (reference 7/14 15/44 31/114 63/272), slowest {slowest:.4} s", ne.join(" ")))
}

fn planner_soundness() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut yes, mut no) = (0, 0);
    for i in 0..500 {
        let (d, p) = random_problem(&mut rng);
        let expected = strong_cyclic_solvable(&d, &p);
        match solve(&d, &p) {
            Ok(c) => {
                ensure(expected, || format!("instance {i}: solved but oracle says unsolvable"))?;
                let v = validate_plan(&d, &p, &c);
                ensure(v.valid, || format!("instance {i}: {:?}", v.failures))?;
                yes += 1;
            }
            Err(PlanError::Unsolvable) => {
                ensure(!expected, || format!("instance {i}: unsolvable but oracle has a plan"))?;
                no += 1;
            }
            Err(e) => return Err(format!("instance {i}: {e}")),
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("500 instances ({yes} solvable, {no} unsolvable), 0 mismatches in {secs:.2} s"))
}

fn scripted_registry(e: &Effect, choice: &BTreeMap<NodePath, usize>, action: &str) -> Registry {
    let mut reg = Registry::new();
    for (path, o) in e.oneofs() {
        reg.insert(o.key(action, &path), Arc::new(Scripted::new([o.outcome_label(choice[&path]).into_owned()])));
    }
    reg
}

fn realization_algebra() -> Check {
    let mut realizations = 0u128;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_tree(&mut rng, 4);
        ensure(depth(&e) <= 4, || format!("tree {seed} too deep"))?;
        let rs = enumerate_realizations(&e).map_err(|x| format!("tree {seed}: {x}"))?;
        ensure(rs.len() as u128 == count(&e), || format!("tree {seed}: {} realizations, recursion says {}", rs.len(), count(&e)))?;
        realizations += rs.len() as u128;

        let full = random_full_choice(&mut rng, &e);
        let expected = resolve(&e, &full).map_err(|x| format!("tree {seed}: {x}"))?;
        let (adds, dels, _) = walk(&e, &full);
        ensure(expected.adds == adds && expected.dels == dels, || format!("tree {seed}: resolve disagrees with walk"))?;

        let action = ActionDef { name: "act".into(), precondition: Default::default(), effect: e.clone() };
        for schedule in [Schedule::Sequential, Schedule::Parallel] {
            let reg = scripted_registry(&e, &full, "act");
            let d = determine(&action, &reg, &Default::default(), &Value::Null, &Default::default(), schedule)
                .map_err(|x| format!("tree {seed}: {x}"))?;
            ensure(d.realization.adds == expected.adds && d.realization.dels == expected.dels, || {
                format!("tree {seed} ({schedule:?}): determination differs from resolve")
            })?;
        }
    }
    Ok(format!("200 trees, {realizations} realizations, 0 mismatches"))
}

fn simulation() -> Check {
    let t = Instant::now();
    let n = 100_000;
    let flat = run_bench(&trees::named("flat").expect("bundled"), n, 1);
    let deep = run_bench(&trees::named("deep-chain").expect("bundled"), n, 2);
    let general = run_bench(&trees::named("general").expect("bundled"), n, 3);

    ensure(flat.samples[&K::ParallelFlat] == flat.samples[&K::ParallelNested], || "(a) flat parallel vectors differ".into())?;
    ensure(flat.samples[&K::SequentialFlat] == flat.samples[&K::SequentialNested], || "(a) flat sequential vectors differ".into())?;
    ensure(deep.samples[&K::SequentialNested] == deep.samples[&K::ParallelNested], || "(b) deep-chain nested vectors differ".into())?;
    let (pn, pf, sf) = (general.mean(K::ParallelNested), general.mean(K::ParallelFlat), general.mean(K::SequentialFlat));
    ensure(pn < pf && pf < sf, || format!("(c) means pn {pn:.3} pf {pf:.3} sf {sf:.3}"))?;
    for (name, r) in [("flat", &flat), ("deep-chain", &deep), ("general", &general)] {
        let s = &r.samples;
        let pairs = [(K::SequentialFlat, K::ParallelFlat), (K::SequentialNested, K::ParallelNested)];
        for (seq, par) in pairs {
            let bad = s[&seq].iter().zip(&s[&par]).position(|(a, b)| a < b);
            ensure(bad.is_none(), || format!("(d) {name} trial {}: {seq} < {par}", bad.unwrap_or_default()))?;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("n={n}; general means pn {pn:.3} < pf {pf:.3} < sf {sf:.3}; orderings hold on all trials; {secs:.2} s"))
}

struct Conversation {
    records: Vec<StepRecord>,
    counters: Vec<(String, Arc<std::sync::atomic::AtomicUsize>)>,
}

fn conversation(dir: &std::path::Path) -> Result<Conversation, String> {
    let mut engine = build_engine(&load_spec(fixtures::car_inspection(4)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (reg, counters) = counting(&engine.registry);
    engine.registry = reg;
    let engine = Arc::new(engine);
    let log = dir.join("trace.jsonl");
    let sink = File::create(&log).map_err(|e| e.to_string())?;
    let mut s = Session::new(engine.clone()).with_sink(Box::new(sink));
    let mut status = s.run().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for text in CAR_INSPECTION_SCRIPT {
        ensure(matches!(status, Status::Awaiting { .. }), || "conversation ended before the script".into())?;
        status = s.reply(text).map_err(|e| e.to_string())?;
        // every intermediate snapshot, re-derived from the trace prefix
        for k in checked..=s.trace().len() {
            let snap = dialplan_core::trace::snapshot_at(&engine, s.trace(), k).map_err(|d| d.message)?;
            check_invariants(&engine, &snap).map_err(|e| format!("after step {k}: {e}"))?;
        }
        checked = s.trace().len();
    }
    ensure(status == Status::Complete, || format!("ended in {status:?}"))?;
    ensure(s.snapshot().state.contains(GOAL), || "GOAL not reached".into())?;
    Ok(Conversation { records: s.trace().to_vec(), counters })
}

fn end_to_end(dir: &std::path::Path, conv: &Conversation) -> Check {
    let outcomes: Vec<&str> = conv.records.iter().map(|r| r.outcome.as_str()).collect();
    ensure(outcomes.iter().any(|o| o.contains("initiative-switch")), || "no initiative switch".into())?;
    let fallbacks = outcomes.iter().filter(|o| o.contains("fallback")).count();
    ensure(fallbacks > 0, || "no fallback outcome".into())?;

    let log = dir.join("trace.jsonl");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        ["dialplan", "replay", "builtin:car-inspection-4", log.to_str().expect("utf-8 path"), "--json"],
        Io { input: &mut &b""[..], out: &mut out, err: &mut err },
    );
    let report: Value = serde_json::from_slice(&out).map_err(|e| format!("replay output: {e}; stderr {}", String::from_utf8_lossy(&err)))?;
    ensure(code == 0 && report["verdict"] == "consistent", || format!("replay verdict {}", report["verdict"]))?;
    let divergences = report["divergences"].as_array().map_or(usize::MAX, Vec::len);
    ensure(divergences == 0, || format!("{divergences} divergences"))?;
    Ok(format!(
        "{} steps to GOAL, {fallbacks} fallback outcomes, invariants hold at every step, replay consistent with 0 divergences",
        conv.records.len()
    ))
}

fn laziness(conv: &Conversation) -> Check {
    let mut reached: BTreeMap<String, usize> = BTreeMap::new();
    for r in &conv.records {
        for step in parse_path_key(&r.outcome)? {
            *reached.entry(step.oneof).or_default() += 1;
        }
    }
    let mut idle = 0;
    for (key, n) in &conv.counters {
        let calls = n.load(Ordering::SeqCst);
        let want = reached.get(key).copied().unwrap_or(0);
        ensure(calls == want, || format!("{key}: {calls} calls, reached {want} times"))?;
        idle += usize::from(calls == 0);
    }
    ensure(idle > 0, || "every determiner ran".into())?;

    // nested: the inner oneof sits under the branch that is not taken
    let d = parse_domain(fixtures::BOOK_HOTEL).map_err(|e| e.to_string())?;
    let a = &d.actions[0];
    let choice: BTreeMap<NodePath, usize> =
        [(NodePath(vec![1]), 0), (NodePath(vec![2]), 0), (NodePath(vec![2, 1, 1]), 1)].into_iter().collect();
    for schedule in [Schedule::Sequential, Schedule::Parallel] {
        let mut reg = Registry::new();
        let mut counts = BTreeMap::new();
        for (path, o) in a.effect.oneofs() {
            let (c, n) = Counting::new(Arc::new(Scripted::new([o.outcome_label(choice[&path]).into_owned()])));
            reg.insert(o.key(&a.name, &path), Arc::new(c));
            counts.insert(path, n);
        }
        determine(a, &reg, &Default::default(), &Value::Null, &Default::default(), schedule).map_err(|e| e.to_string())?;
        let inner = counts[&NodePath(vec![2, 1, 1])].load(Ordering::SeqCst);
        ensure(inner == 0, || format!("{schedule:?}: unselected nested determiner ran {inner} times"))?;
    }
    Ok(format!("{idle} of {} determiners never reached and never invoked; nested unselected determiner idle", conv.counters.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let conv = conversation(dir.path());
    let results: Vec<(&str, Check)> = vec![
        ("golden compilation", golden()),
        ("scale-up harness", scale_up()),
        ("planner soundness", planner_soundness()),
        ("realization algebra", realization_algebra()),
        ("simulation study", simulation()),
        ("end-to-end execution", conv.as_ref().map_err(Clone::clone).and_then(|c| end_to_end(dir.path(), c))),
        ("determination laziness", conv.as_ref().map_err(Clone::clone).and_then(laziness)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
