//! Counterexample-driven genetic programming over a Push-style typed-stack
//! language.
//!
//! Evolution evaluates the population on a small *active* training set that
//! grows with counterexamples: whenever a program passes every active case,
//! it is checked against the remaining training cases and one case it still
//! fails is added. Variants trigger additions from a fitness threshold, on a
//! generation clock, or cap the active set with eviction; a static-subsample
//! baseline never adds cases. Parent selection is lexicase, variation is
//! uniform mutation by addition and deletion over Plushy genomes, and every
//! run is budgeted by program executions and fully reproducible from a seed.
//!
//! Start from [`engine::run_evolution`] for single runs or
//! [`harness::run_matrix`] for experiment grids; each major capability also
//! has a runnable example under `examples/`.

pub mod cases;
pub mod engine;
pub mod error;
pub mod genome;
pub mod harness;
pub mod problems;
pub mod rng;
pub mod selection;
pub mod vm;
