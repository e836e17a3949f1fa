use std::sync::Arc;

use dialplan_core::compiler::{compile, GOAL};
use dialplan_core::determiners::{Failing, Registry, Scripted, Selection};
use dialplan_core::executor::{
    check_alignment, determine, filter_context, Context, Engine, ExecError, Exchange, Schedule,
};
use dialplan_core::fixtures;
use dialplan_core::manifest::{ActionBinding, Callback, ExecutionManifest};
use dialplan_core::pddl::{parse_domain, ActionDef, Effect, Literal, ProblemDef};
use dialplan_core::planner::solve;
use dialplan_core::session::{build_engine, Session};
use dialplan_core::spec::{load_spec, ActionKind};
use indexmap::IndexMap;
use serde_json::{json, Value};

fn ctx(entries: &[(&str, Value)]) -> Context {
    entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn trip() -> Engine {
    build_engine(&load_spec(fixtures::TRIP_BOOKING).unwrap()).unwrap()
}

fn car() -> Engine {
    build_engine(&load_spec(fixtures::car_inspection(4)).unwrap()).unwrap()
}

#[test]
fn filter_keeps_only_positive_precondition_fluents() {
    let e = trip();
    let a = e.domain.action("check-availability").unwrap();
    let c = ctx(&[
        ("have_dst", json!("Paris")),
        ("have_dates", json!("May 3-7")),
        ("have_name", json!("Ada")),
        ("maybe-have_src", json!("Boston")),
        ("have_temperature", json!(72)),
    ]);
    let f = filter_context(a, &c, &e.manifest).unwrap();
    assert_eq!(f, ctx(&[("have_dst", json!("Paris")), ("have_dates", json!("May 3-7"))]));
}

#[test]
fn empty_precondition_filters_to_nothing() {
    let e = trip();
    let a = ActionDef { name: "noop".into(), precondition: Default::default(), effect: Effect::And(vec![]) };
    assert!(filter_context(&a, &ctx(&[("have_dst", json!("x"))]), &e.manifest).unwrap().is_empty());
}

#[test]
fn negated_fluents_contribute_nothing() {
    let e = trip();
    let a = e.domain.action("slotfill-name").unwrap();
    assert!(a.precondition.contains(&Literal::neg("have_name")));
    let c = ctx(&[("have_dst", json!("Paris")), ("have_temperature", json!(72))]);
    let f = filter_context(a, &c, &e.manifest).unwrap();
    assert!(f.keys().all(|k| a.precondition.contains(&Literal::pos(k.as_str()))));
    assert!(!f.contains_key("have_name"));
}

#[test]
fn missing_value_for_required_fluent_is_an_invariant_failure() {
    let e = trip();
    let a = e.domain.action("check-availability").unwrap();
    let err = filter_context(a, &ctx(&[("have_dst", json!("Paris"))]), &e.manifest).unwrap_err();
    assert!(matches!(err, ExecError::Alignment(_)));
}

#[test]
fn single_leaf_needs_no_determiner() {
    let a = ActionDef { name: "a".into(), precondition: Default::default(), effect: Effect::Lit(Literal::pos("f")) };
    for s in [Schedule::Sequential, Schedule::Parallel] {
        let d = determine(&a, &Registry::new(), &IndexMap::new(), &Value::Null, &Default::default(), s).unwrap();
        assert_eq!(d.realization.adds.iter().collect::<Vec<_>>(), ["f"]);
        assert!(d.realization.choice.is_empty());
    }
}

fn hotel_engine(reg: Registry, schedule: Schedule) -> Engine {
    let domain = parse_domain(fixtures::BOOK_HOTEL).unwrap();
    let problem = ProblemDef {
        name: "p".into(),
        domain: "hotel".into(),
        init: ["account_accessible".to_string()].into_iter().collect(),
        goal: ["attempted_hotel_booking".to_string()].into_iter().collect(),
    };
    let controller = solve(&domain, &problem).unwrap();
    let manifest = ExecutionManifest {
        agent: "hotel".into(),
        domain: "hotel".into(),
        actions: [(
            "book_hotel".to_string(),
            ActionBinding { name: "book_hotel".into(), kind: ActionKind::Web, callback: Callback::Internal },
        )]
        .into_iter()
        .collect(),
        determiners: IndexMap::new(),
        variables: [("hotel_booking_pending".to_string(), "booking".to_string())].into_iter().collect(),
        initial_context: IndexMap::new(),
    };
    Engine { domain, problem, controller, manifest, registry: reg, schedule }
}

fn scripted(label: &str) -> Arc<Scripted> {
    Arc::new(Scripted::new([label.to_string()]))
}

#[test]
fn book_hotel_determination_matches_resolve() {
    for schedule in [Schedule::Sequential, Schedule::Parallel] {
        let mut reg = Registry::new();
        reg.insert("book_hotel/1", Arc::new(Scripted::with_values([Selection {
            outcome: "o1".into(),
            values: [("booking".to_string(), json!("Checking Availability"))].into_iter().collect(),
        }])));
        reg.insert("book_hotel/2", scripted("o0"));
        let e = hotel_engine(reg, schedule);
        let mut s = Session::new(Arc::new(e));
        let rec = s.commit(&mut |_| Ok(Exchange::default())).unwrap().clone();
        assert_eq!(rec.adds, ["attempted_hotel_booking", "hotel_booking_pending"]);
        assert_eq!(rec.dels, ["account_accessible", "hotel_booking_confirmed"]);
        assert_eq!(rec.context["hotel_booking_pending"], Some(json!("Checking Availability")));
        assert_eq!(s.snapshot().context["hotel_booking_pending"], json!("Checking Availability"));
        assert!(s.is_complete());
    }
}

#[test]
fn failing_determiner_aborts_the_whole_step() {
    for schedule in [Schedule::Sequential, Schedule::Parallel] {
        let mut reg = Registry::new();
        reg.insert("book_hotel/1", scripted("o0"));
        reg.insert("book_hotel/2", Arc::new(Failing("service timeout".into())));
        let mut s = Session::new(Arc::new(hotel_engine(reg, schedule)));
        let before = serde_json::to_string(s.snapshot()).unwrap();
        let mut calls = 0;
        let err = s
            .commit(&mut |_| {
                calls += 1;
                Ok(Exchange::default())
            })
            .unwrap_err();
        assert!(err.to_string().contains("service timeout"), "{err}");
        assert_eq!(calls, 1);
        assert_eq!(serde_json::to_string(s.snapshot()).unwrap(), before);
        assert!(s.trace().is_empty());
    }
}

#[test]
fn callback_failure_leaves_snapshot_unchanged() {
    let mut s = Session::new(Arc::new(car()));
    let before = s.snapshot().clone();
    let err = s.commit(&mut |_| Err("connection refused".into())).unwrap_err();
    assert!(err.to_string().contains("connection refused"));
    assert_eq!(s.snapshot(), &before);
}

#[test]
fn check_the_oil_from_start() {
    let mut s = Session::new(Arc::new(car()));
    s.run().unwrap();
    s.reply("check the oil").unwrap();
    let rec = &s.trace()[0];
    assert_eq!(
        rec.outcome,
        "resolve-start_conversation=start_conversation_oil__check-oil_status-eq-found"
    );
    assert!(rec.state.contains("have_oil_status"));
    assert!(rec.state.contains("STARTED"));
    assert_eq!(s.snapshot().context["have_oil_status"], json!("found"));
}

#[test]
fn state_message_fallback_drops_message() {
    let mut s = Session::new(Arc::new(car()));
    s.run().unwrap();
    s.reply("you ask").unwrap();
    s.reply("passed").unwrap();
    let t = s.trace();
    let i = t.iter().position(|r| r.action.ends_with("state-message")).unwrap();
    assert!(t[i - 1].state.contains("have_message"));
    assert!(t[i].outcome.ends_with("state-message-outcome-fallback__"));
    assert!(!t[i].state.contains("have_message"));
    assert_eq!(t[i].context.get("have_message"), Some(&None));
    check_alignment(&s.snapshot().state, &s.snapshot().context, &s.engine().manifest).unwrap();
}

#[test]
fn goal_node_refuses_to_step() {
    let mut s = Session::new(Arc::new(car()));
    s.run().unwrap();
    for r in dialplan_testkit::scenario::CAR_INSPECTION_SCRIPT {
        if s.is_complete() {
            break;
        }
        s.reply(r).unwrap();
    }
    assert!(s.snapshot().state.contains(GOAL));
    let err = s.commit(&mut |_| Ok(Exchange::default())).unwrap_err();
    assert_eq!(err.to_string(), "conversation complete");
}

#[test]
fn missing_edge_is_a_desync() {
    let mut e = car();
    let n0 = e.controller.n0;
    e.controller.nodes[n0].edges.retain(|x| !x.outcome.iter().any(|o| o.outcome.contains("_oil__")));
    let mut s = Session::new(Arc::new(e));
    s.run().unwrap();
    let before = s.snapshot().clone();
    let err = s.reply("oil low").unwrap_err();
    assert!(err.to_string().starts_with("plan desync at node"), "{err}");
    assert_eq!(s.snapshot(), &before);
}

#[test]
fn reply_to_non_input_action_is_rejected() {
    let c = compile(&load_spec(fixtures::TRIP_BOOKING).unwrap()).unwrap();
    assert!(c.manifest.actions.values().any(|b| !b.awaits_input()));
    let mut s = Session::new(Arc::new(hotel_engine(Registry::new(), Schedule::Sequential)));
    assert!(s.reply("hi").is_err());
}
