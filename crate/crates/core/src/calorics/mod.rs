//! The analytic layer: the Gauss-Weierstrass kernel, caloric norm and disks,
//! the smooth cutoff and representation kernel, and heat-ball (Pini-Watson)
//! mean values.

mod cutoff;
mod heat_ball;
mod kernel;
mod representation;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cutoff::{CutoffDerivatives, CutoffFunction};
pub use heat_ball::{
    build_heat_ball_quadrature, heat_ball_section_radius, mean_value, HeatBallNode, HeatBallQuadrature,
    HeatBallResolution,
};
pub use kernel::{gw_gradient, gw_kernel, GaussWeierstrass};
pub use representation::{
    reproduce, representation_kernel, KernelVariant, QuadratureEstimate, ReproductionOptions,
};

/// A point `z = (x, t)` of `R^{N+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        SpaceTimePoint { x, t }
    }

    pub fn origin(dim: usize) -> Self {
        SpaceTimePoint { x: vec![0.0; dim], t: 0.0 }
    }

    /// From `(x_1, ..., x_N, t)`.
    pub fn from_coords(z: &[f64]) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::InvalidArgument("a space-time point needs N >= 1 spatial coordinates and t".into()));
        }
        let (x, t) = z.split_at(z.len() - 1);
        Ok(SpaceTimePoint { x: x.to_vec(), t: t[0] })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.push(self.t);
        v
    }

    pub fn sub(&self, other: &SpaceTimePoint) -> SpaceTimePoint {
        debug_assert_eq!(self.dim(), other.dim());
        SpaceTimePoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            t: self.t - other.t,
        }
    }

    pub fn add(&self, other: &SpaceTimePoint) -> SpaceTimePoint {
        debug_assert_eq!(self.dim(), other.dim());
        SpaceTimePoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            t: self.t + other.t,
        }
    }

    pub fn norm_x_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|v| v.is_finite())
    }
}

impl fmt::Display for SpaceTimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for v in &self.x {
            write!(f, "{v}, ")?;
        }
        write!(f, "t={})", self.t)
    }
}

/// `(|x|^4 + t^2)^{1/4}`; homogeneous of degree one under `(x, t) -> (λx, λ²t)`.
pub fn caloric_norm(z: &SpaceTimePoint) -> f64 {
    let r2 = z.norm_x_sq();
    (r2 * r2 + z.t * z.t).sqrt().sqrt()
}

/// Open ball `{ z : ||z - center|| < radius }` in the caloric norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaloricDisk {
    pub center: SpaceTimePoint,
    pub radius: f64,
}

impl CaloricDisk {
    pub fn new(center: SpaceTimePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("disk radius must be positive, got {radius}")));
        }
        Ok(CaloricDisk { center, radius })
    }

    pub fn contains(&self, z: &SpaceTimePoint) -> bool {
        caloric_norm(&z.sub(&self.center)) < self.radius
    }

    /// The concentric disk of twice the radius.
    pub fn doubled(&self) -> CaloricDisk {
        CaloricDisk { center: self.center.clone(), radius: 2.0 * self.radius }
    }
}
