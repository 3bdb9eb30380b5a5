//! Caloric functions on space-time: exact caloric extension of polynomials,
//! heat kernels and mean values, Dirichlet problems on caloric bowls, and
//! Perron-Wiener solutions on bounded domains.

pub mod bowl;
pub mod calorics;
pub mod error;
pub mod expr;
pub mod field;
pub mod gauss;
pub mod perron;
pub mod poly;

pub use bowl::{solve_bowl, BoundaryData, BowlSolution, CaloricBowl, SolveOptions, SolveTarget};
pub use calorics::{caloric_norm, CaloricDisk, SpaceTimePoint};
pub use error::{Error, Result};
pub use expr::Expression;
pub use field::Field;
pub use perron::{perron_solve, DomainSpec, GridFunction, PerronReport, SweepConfig};
pub use poly::{caloric_extension, parse_polynomial, FloatPolynomial, Polynomial};
