//! Test support: random instance generators and reference oracles written
//! independently of the library code they check.

pub mod effects;
pub mod fond;
pub mod scenario;
