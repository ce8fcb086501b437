//! Scenario files, run outputs, batch experiments and the live session
//! service around `pursuit-core`.

pub mod batch;
pub mod commands;
pub mod egp;
pub mod run;
pub mod scenario;
pub mod service;
