//! Resolving spec and model arguments.

use std::fs;
use std::path::Path;

use dialplan_core::compiler::compile;
use dialplan_core::fixtures;
use dialplan_core::pddl::{parse_domain, parse_problem, DomainDef, ProblemDef};
use dialplan_core::spec::{load_spec, AgentSpec};

use crate::{Failure, ModelArgs};

/// Agents reachable as `builtin:<name>`.
pub const BUILTINS: [&str; 5] = ["car-inspection-1", "car-inspection-2", "car-inspection-3", "car-inspection-4", "trip-booking"];

pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "trip-booking" => Some(fixtures::TRIP_BOOKING),
        _ => {
            let n: usize = name.strip_prefix("car-inspection-")?.parse().ok()?;
            (1..=4).contains(&n).then(|| fixtures::car_inspection(n))
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub(crate) fn load_spec_arg(arg: &str) -> Result<AgentSpec, Failure> {
    let text = match arg.strip_prefix("builtin:") {
        Some(name) => builtin(name)
            .ok_or_else(|| Failure::error("unknown-builtin", format!("no bundled agent {name}; have {}", BUILTINS.join(", "))))?
            .to_string(),
        None => read(Path::new(arg))?,
    };
    load_spec(&text).map_err(|e| Failure::invalid("invalid-spec", format!("{arg}: {e}")))
}

pub(crate) fn load_model(m: &ModelArgs) -> Result<(DomainDef, ProblemDef), Failure> {
    if let Some(spec) = &m.spec {
        let c = compile(&load_spec_arg(spec)?)?;
        return Ok((c.domain, c.problem));
    }
    let (Some(dp), Some(pp)) = (&m.domain, &m.problem) else {
        return Err(Failure::new(crate::EXIT_USAGE, "usage", "give --spec or both --domain and --problem"));
    };
    let d = parse_domain(&read(dp)?).map_err(|e| Failure::invalid("pddl", format!("{}: {e}", dp.display())))?;
    let p = parse_problem(&read(pp)?).map_err(|e| Failure::invalid("pddl", format!("{}: {e}", pp.display())))?;
    d.validate().map_err(|e| Failure::invalid("model", format!("{}: {e}", dp.display())))?;
    p.validate(&d).map_err(|e| Failure::invalid("model", format!("{}: {e}", pp.display())))?;
    Ok((d, p))
}
