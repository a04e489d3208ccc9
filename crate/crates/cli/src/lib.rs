//! Experiment harness: configs, convergence sweeps, CSV artifacts and the
//! oracle suites behind `nnfd validate`.

pub mod config;
pub mod run;
pub mod table;
pub mod validate;
