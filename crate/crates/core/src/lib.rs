#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod geom;
pub mod partition;
pub mod policy;
pub mod qp;
pub mod sim;
pub mod tmpc;
mod math;
