//! Dirichlet problems on caloric bowls `B(z_0, r) = {|x - x_0|² < t - t_0 < r²}`.
//!
//! Boundary data are fitted by a spatial polynomial on the normal boundary
//! (the paraboloid graph `t - t_0 = |x - x_0|²`), and the caloric extension of
//! the fit is the solution; the maximum principle turns the boundary residual
//! into a sup-error bound on the closed bowl.

pub(crate) mod fit;
mod h_f;
mod solve;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calorics::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::field::Field;

pub use fit::{fit_boundary_polynomial, unit_ball_grid, BoundaryFit, FitOptions};
pub use h_f::{approximate_h_f, HfApproximation, HfOptions, HfStage};
pub use solve::{solve_bowl, BoundaryResidual, BowlSolution, SolveOptions, SolveTarget};

/// The caloric bowl with bottom `z_0` and opening `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaloricBowl {
    pub bottom: SpaceTimePoint,
    pub opening: f64,
}

impl CaloricBowl {
    pub fn new(bottom: SpaceTimePoint, opening: f64) -> Result<Self> {
        if !(opening > 0.0 && opening.is_finite()) {
            return Err(Error::InvalidArgument(format!("bowl opening must be positive, got {opening}")));
        }
        if !bottom.is_finite() {
            return Err(Error::InvalidArgument(format!("bowl bottom {bottom} is not finite")));
        }
        Ok(CaloricBowl { bottom, opening })
    }

    pub fn dim(&self) -> usize {
        self.bottom.dim()
    }

    /// `B(z_0, 2r)`.
    pub fn doubled(&self) -> CaloricBowl {
        CaloricBowl { bottom: self.bottom.clone(), opening: 2.0 * self.opening }
    }

    fn offsets(&self, z: &SpaceTimePoint) -> (f64, f64) {
        let d = z.sub(&self.bottom);
        (d.norm_x_sq(), d.t)
    }

    /// Membership in the open bowl.
    pub fn contains(&self, z: &SpaceTimePoint) -> bool {
        let (x2, s) = self.offsets(z);
        x2 < s && s < self.opening * self.opening
    }

    /// Membership in `B̂ = B ∪ top(B)`.
    pub fn contains_hat(&self, z: &SpaceTimePoint) -> bool {
        let (x2, s) = self.offsets(z);
        x2 < s && s <= self.opening * self.opening
    }

    /// Membership in the closure.
    pub fn contains_closure(&self, z: &SpaceTimePoint) -> bool {
        let (x2, s) = self.offsets(z);
        x2 <= s && s <= self.opening * self.opening
    }

    /// `(x, t_0 + |x - x_0|²)`, the point of the normal boundary above `x`.
    pub fn normal_boundary_point(&self, x: &[f64]) -> Result<SpaceTimePoint> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let y: Vec<f64> = x.iter().zip(&self.bottom.x).map(|(a, b)| a - b).collect();
        let y2: f64 = y.iter().map(|v| v * v).sum();
        let r2 = self.opening * self.opening;
        if y2 > r2 * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "|x - x_0| = {} exceeds the opening {}",
                y2.sqrt(),
                self.opening
            )));
        }
        Ok(SpaceTimePoint::new(x.to_vec(), self.bottom.t + y2))
    }

    /// Boundary point above the unit-frame position `ξ` (`|ξ| <= 1`):
    /// offsets are formed as `r·ξ` so that translated bowls sample the same offsets.
    pub(crate) fn boundary_from_unit(&self, xi: &[f64]) -> SpaceTimePoint {
        let y: Vec<f64> = xi.iter().map(|v| self.opening * v).collect();
        let y2: f64 = y.iter().map(|v| v * v).sum();
        SpaceTimePoint::new(self.bottom.x.iter().zip(&y).map(|(b, o)| b + o).collect(), self.bottom.t + y2)
    }

    /// Unit-frame coordinates `((x - x_0)/r, (t - t_0)/r²)`.
    pub fn to_unit(&self, z: &SpaceTimePoint) -> SpaceTimePoint {
        let r = self.opening;
        SpaceTimePoint::new(
            z.x.iter().zip(&self.bottom.x).map(|(a, b)| (a - b) / r).collect(),
            (z.t - self.bottom.t) / (r * r),
        )
    }

    pub fn from_unit(&self, u: &SpaceTimePoint) -> SpaceTimePoint {
        let r = self.opening;
        SpaceTimePoint::new(
            u.x.iter().zip(&self.bottom.x).map(|(a, b)| b + r * a).collect(),
            self.bottom.t + r * r * u.t,
        )
    }

    /// Deterministic sample of the open bowl: `levels` time slices, each with a
    /// spatial grid over the section.
    pub fn interior_samples(&self, levels: usize, per_axis: usize) -> Vec<SpaceTimePoint> {
        let mut out = Vec::new();
        for i in 1..=levels {
            let tau = i as f64 / (levels as f64 + 1.0);
            let rad = tau.sqrt();
            for xi in unit_ball_grid(self.dim(), per_axis) {
                let unit = SpaceTimePoint::new(xi.iter().map(|v| 0.98 * rad * v).collect(), tau);
                out.push(self.from_unit(&unit));
            }
        }
        out.retain(|z| self.contains(z));
        out
    }
}

impl fmt::Display for CaloricBowl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, {})", self.bottom, self.opening)
    }
}

/// Data on the normal boundary.
#[derive(Clone)]
pub enum BoundaryData {
    /// Any field; only its values on the normal boundary are used.
    Field(Arc<dyn Field + Send + Sync>),
    /// Values at boundary points given by their spatial coordinates; the
    /// time coordinate is implied by the paraboloid.
    Samples { points: Vec<Vec<f64>>, values: Vec<f64> },
}

impl BoundaryData {
    pub fn field<F: Field + Send + Sync + 'static>(f: F) -> Self {
        BoundaryData::Field(Arc::new(f))
    }

    pub fn samples(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} sample points but {} values",
                points.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("boundary sample value {v} is not finite")));
        }
        Ok(BoundaryData::Samples { points, values })
    }
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Field(_) => f.write_str("BoundaryData::Field(..)"),
            BoundaryData::Samples { points, .. } => write!(f, "BoundaryData::Samples({} points)", points.len()),
        }
    }
}
