//! Car inspection scale-up sweep.

use std::io::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use dialplan_core::compiler::compile;
use dialplan_core::fixtures;
use dialplan_core::planner::{solve, validate_plan};
use dialplan_core::spec::load_spec;

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub parts: usize,
    pub variables: usize,
    pub actions: usize,
    pub nodes: usize,
    pub edges: usize,
    pub valid: bool,
    /// Compile plus solve, wall-clock.
    pub solve_secs_wallclock: f64,
}

pub fn scale_up() -> Result<Vec<ScaleRow>, Failure> {
    (1..=4)
        .map(|parts| {
            let spec = load_spec(fixtures::car_inspection(parts)).map_err(|e| Failure::error("fixture", e.to_string()))?;
            let t = Instant::now();
            let c = compile(&spec)?;
            let ctl = solve(&c.domain, &c.problem)?;
            let secs = t.elapsed().as_secs_f64();
            Ok(ScaleRow {
                parts,
                variables: spec.variables.len(),
                actions: c.domain.actions.len(),
                nodes: ctl.nodes.len(),
                edges: ctl.edge_count(),
                valid: validate_plan(&c.domain, &c.problem, &ctl).valid,
                solve_secs_wallclock: secs,
            })
        })
        .collect()
}

pub fn write_table(rows: &[ScaleRow], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{:>5} {:>9} {:>7} {:>6} {:>6} {:>5}  time (s, wall-clock)", "parts", "variables", "actions", "nodes", "edges", "valid")?;
    for r in rows {
        writeln!(
            out,
            "{:>5} {:>9} {:>7} {:>6} {:>6} {:>5}  {:.4}",
            r.parts, r.variables, r.actions, r.nodes, r.edges, r.valid, r.solve_secs_wallclock
        )?;
    }
    Ok(())
}

pub fn write_csv(rows: &[ScaleRow], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "parts,variables,actions,nodes,edges,valid,solve_secs_wallclock")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{},{},{}", r.parts, r.variables, r.actions, r.nodes, r.edges, r.valid, r.solve_secs_wallclock)?;
    }
    Ok(())
}
