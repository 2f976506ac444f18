//! Test-side oracles that share no numerics with the library solver.
#![allow(dead_code)]

pub mod fd;
pub mod signscan;
