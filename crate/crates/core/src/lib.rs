//! Dialogue agents specified declaratively and executed as FOND plans.

pub mod compiler;
pub mod determiners;
pub mod effects;
pub mod executor;
pub mod fixtures;
pub mod manifest;
pub mod normal;
pub mod pddl;
pub mod planner;
pub mod session;
pub mod spec;
pub mod trace;
