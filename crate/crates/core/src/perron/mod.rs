//! Perron-Wiener solutions on bounded domains, approximated on a lattice.
//!
//! The upper solution starts from the constant `M` and is lowered by caloric
//! regularization over a fixed schedule of bowls; the lower solution is the
//! negated upper solution of the negated data.

mod classify;
mod domain;
mod grid;
mod regularize;
mod sweep;

pub use classify::{classify_supercaloric, Classification, ClassifyOptions, NodeVerdict, Verdict};
pub use domain::{DomainSpec, Lattice, NodeKind};
pub use grid::{GridFunction, Interpolant, Interpolation};
pub use regularize::caloric_regularize;
pub use sweep::{
    perron_solve, perron_upper, perron_upper_planned, PerronReport, SweepConfig, SweepMode, SweepPlan, SweepRecord,
    UpperSolution,
};
