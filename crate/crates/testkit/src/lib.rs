//! Test support: brute-force oracles, instance generators and shared run
//! harnesses.

pub mod checks;
pub mod generate;
pub mod harness;
pub mod oracle;
