use std::collections::BTreeSet;
use std::time::Instant;

use dialplan_core::compiler::compile;
use dialplan_core::fixtures;
use dialplan_core::normal::{diff, signature};
use dialplan_core::pddl::{parse_domain, parse_problem, print_domain, print_problem, Effect};
use dialplan_core::spec::load_spec;

#[test]
fn reference_domain_parses() {
    let d = parse_domain(fixtures::CAR_INSPECTION_DOMAIN).unwrap();
    assert_eq!(d.predicates.len(), 24);
    assert_eq!(d.actions.len(), 7);
    let start = d.action("dialogue-disambiguation-start_conversation").unwrap();
    let Effect::OneOf(o) = &start.effect else { panic!("expected a oneof") };
    assert_eq!(o.label.as_deref(), Some("resolve-start_conversation"));
    assert_eq!(o.outcomes.len(), 7);
    assert_eq!(o.outcome_label(0), "start_conversation_what__");
    assert_eq!(o.outcome_label(6), "start_conversation_fallback__");
}

#[test]
fn reference_problem_parses() {
    let d = parse_domain(fixtures::CAR_INSPECTION_DOMAIN).unwrap();
    let p = parse_problem(fixtures::CAR_INSPECTION_PROBLEM).unwrap();
    assert_eq!(p.init.len(), 9);
    assert_eq!(p.goal.iter().collect::<Vec<_>>(), ["GOAL"]);
    p.validate(&d).unwrap();
}

#[test]
fn reference_files_round_trip() {
    let d = parse_domain(fixtures::CAR_INSPECTION_DOMAIN).unwrap();
    assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
    let p = parse_problem(fixtures::CAR_INSPECTION_PROBLEM).unwrap();
    assert_eq!(parse_problem(&print_problem(&p)).unwrap(), p);
}

#[test]
fn compiled_car_inspection_matches_reference() {
    let t = Instant::now();
    let c = compile(&load_spec(fixtures::car_inspection(4)).unwrap()).unwrap();
    let want = parse_domain(fixtures::CAR_INSPECTION_DOMAIN).unwrap();
    let d = diff(&signature(&want).unwrap(), &signature(&c.domain).unwrap());
    assert!(d.is_empty(), "differences:\n{}", d.join("\n"));

    let p = parse_problem(fixtures::CAR_INSPECTION_PROBLEM).unwrap();
    let set = |s: &indexmap::IndexSet<String>| s.iter().cloned().collect::<BTreeSet<_>>();
    assert_eq!(set(&c.problem.init), set(&p.init));
    assert_eq!(set(&c.problem.goal), set(&p.goal));
    assert!(t.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn compiled_car_inspection_reparses() {
    let c = compile(&load_spec(fixtures::car_inspection(4)).unwrap()).unwrap();
    assert_eq!(parse_domain(&print_domain(&c.domain)).unwrap(), c.domain);
    assert_eq!(parse_problem(&print_problem(&c.problem)).unwrap(), c.problem);
    c.manifest.check(&c.domain).unwrap();
}

#[test]
fn car_inspection_family_sizes() {
    for (parts, (vars, actions)) in [(5, 4), (6, 5), (7, 6), (8, 7)].into_iter().enumerate() {
        let spec = load_spec(fixtures::car_inspection(parts + 1)).unwrap();
        assert!(spec.validate().is_empty(), "{:?}", spec.validate());
        assert_eq!(spec.variables.len(), vars);
        let c = compile(&spec).unwrap();
        assert_eq!(c.domain.actions.len(), actions);
    }
}

#[test]
fn trip_booking_compiles() {
    let spec = load_spec(fixtures::TRIP_BOOKING).unwrap();
    let diags = spec.validate();
    assert!(diags.is_empty(), "{diags:?}");
    let c = compile(&spec).unwrap();
    c.manifest.check(&c.domain).unwrap();
    let names: Vec<&str> = c.domain.actions.iter().map(|a| a.name.as_str()).collect();
    for n in ["slotfill-name", "confirm-src", "cee-extraction", "check-availability", "assess-temperature"] {
        assert!(names.contains(&n), "missing {n}");
    }
}
