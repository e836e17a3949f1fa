use std::time::Instant;

use dialplan_core::compiler::compile;
use dialplan_core::fixtures;
use dialplan_core::pddl::{parse_domain, parse_problem};
use dialplan_core::spec::load_spec;
use dialplan_core::planner::{solve, validate_plan, Controller, PlanError};
use dialplan_testkit::fond::{random_problem, strong_cyclic_solvable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_instances_agree_with_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut solvable, mut unsolvable) = (0, 0);
    for i in 0..500 {
        let (d, p) = random_problem(&mut rng);
        let expected = strong_cyclic_solvable(&d, &p);
        match solve(&d, &p) {
            Ok(c) => {
                assert!(expected, "instance {i}: planner found a plan the oracle rejects");
                let v = validate_plan(&d, &p, &c);
                assert!(v.valid, "instance {i}: {:?}", v.failures);
                solvable += 1;
            }
            Err(PlanError::Unsolvable) => {
                assert!(!expected, "instance {i}: oracle found a plan the planner missed");
                unsolvable += 1;
            }
            Err(e) => panic!("instance {i}: {e}"),
        }
    }
    assert!(solvable > 50 && unsolvable > 50, "{solvable} solvable / {unsolvable} unsolvable");
}

#[test]
fn car_inspection_scales() {
    let mut last = 0;
    for parts in 1..=4 {
        let c = compile(&load_spec(fixtures::car_inspection(parts)).unwrap()).unwrap();
        let t = Instant::now();
        let ctl = solve(&c.domain, &c.problem).unwrap();
        assert!(t.elapsed().as_secs_f64() < 5.0);
        assert!(validate_plan(&c.domain, &c.problem, &ctl).valid);
        assert!(ctl.nodes.len() >= last, "{parts} parts: {} < {last}", ctl.nodes.len());
        eprintln!("{parts} parts: {} nodes, {} edges", ctl.nodes.len(), ctl.edge_count());
        last = ctl.nodes.len();
    }
}

#[test]
fn reference_domain_solves() {
    let d = parse_domain(fixtures::CAR_INSPECTION_DOMAIN).unwrap();
    let p = parse_problem(fixtures::CAR_INSPECTION_PROBLEM).unwrap();
    let c = solve(&d, &p).unwrap();
    assert!(validate_plan(&d, &p, &c).valid);
}

#[test]
fn trip_booking_solves() {
    let c = compile(&load_spec(fixtures::TRIP_BOOKING).unwrap()).unwrap();
    let ctl = solve(&c.domain, &c.problem).unwrap();
    let v = validate_plan(&c.domain, &c.problem, &ctl);
    assert!(v.valid, "{:?}", v.failures);
}

#[test]
fn controller_json_round_trips() {
    let c = compile(&load_spec(fixtures::car_inspection(2)).unwrap()).unwrap();
    let ctl = solve(&c.domain, &c.problem).unwrap();
    let text = serde_json::to_string(&ctl).unwrap();
    let back: Controller = serde_json::from_str(&text).unwrap();
    assert_eq!(back, ctl);
}
