use super::{caloric_norm, CaloricDisk, SpaceTimePoint};
use crate::error::{Error, Result};

/// `e^{-1/s}` for `s > 0`, zero otherwise, with its first two derivatives.
fn bump(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / s).exp();
    let s2 = s * s;
    (f, f / s2, f * (1.0 / (s2 * s2) - 2.0 / (s2 * s)))
}

/// Smooth step: 1 for `τ <= 0`, 0 for `τ >= 1`, with `S'` and `S''`.
fn step(tau: f64) -> (f64, f64, f64) {
    if tau <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if tau >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let (fa, fa1, fa2) = bump(1.0 - tau);
    let (a, a1, a2) = (fa, -fa1, fa2);
    let (b, b1, b2) = bump(tau);
    let sum = a + b;
    let num1 = a1 * b - a * b1;
    let s = a / sum;
    let s1 = num1 / (sum * sum);
    let s2 = ((a2 * b - a * b2) * sum - 2.0 * num1 * (a1 + b1)) / (sum * sum * sum);
    (s, s1, s2)
}

/// Value and derivatives of the cutoff at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffDerivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
    pub dt: f64,
}

/// Radial smooth cutoff around a caloric disk `D(c, r)`: identically 1 where
/// `||ζ - c|| <= inner` and 0 where `||ζ - c|| >= outer`, with
/// `r < inner < outer <= 2r`.
#[derive(Debug, Clone)]
pub struct CutoffFunction {
    disk: CaloricDisk,
    inner: f64,
    outer: f64,
}

impl CutoffFunction {
    /// `rho_in` and `rho_out` are fractions of the doubled radius `2r`.
    pub fn new(disk: &CaloricDisk, rho_in: f64, rho_out: f64) -> Result<Self> {
        if !(0.5 < rho_in && rho_in < rho_out && rho_out <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff fractions must satisfy 1/2 < rho_in < rho_out <= 1, got {rho_in} and {rho_out}"
            )));
        }
        let two_r = 2.0 * disk.radius;
        Ok(CutoffFunction { disk: disk.clone(), inner: rho_in * two_r, outer: rho_out * two_r })
    }

    /// The default profile: flat out to `0.55 * 2r`, vanishing past `0.95 * 2r`.
    pub fn standard(disk: &CaloricDisk) -> Self {
        Self::new(disk, 0.55, 0.95).expect("standard fractions are valid")
    }

    pub fn disk(&self) -> &CaloricDisk {
        &self.disk
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    /// True where every derivative of the cutoff vanishes.
    pub fn is_flat(&self, z: &SpaceTimePoint) -> bool {
        let rho = caloric_norm(&z.sub(&self.disk.center));
        rho <= self.inner || rho >= self.outer
    }

    pub fn value(&self, z: &SpaceTimePoint) -> f64 {
        let rho = caloric_norm(&z.sub(&self.disk.center));
        step((rho - self.inner) / (self.outer - self.inner)).0
    }

    pub fn derivatives(&self, z: &SpaceTimePoint) -> CutoffDerivatives {
        let y = z.sub(&self.disk.center);
        let n = y.dim();
        let rho = caloric_norm(&y);
        let width = self.outer - self.inner;
        let (s, s1, s2) = step((rho - self.inner) / width);
        if s1 == 0.0 && s2 == 0.0 {
            return CutoffDerivatives { value: s, gradient: vec![0.0; n], laplacian: 0.0, dt: 0.0 };
        }
        let y2 = y.norm_x_sq();
        let rho3 = rho * rho * rho;
        let grad_rho: Vec<f64> = y.x.iter().map(|yi| y2 * yi / rho3).collect();
        let dt_rho = y.t / (2.0 * rho3);
        let lap_rho = (n as f64 + 2.0) * y2 / rho3 - 3.0 * y2 * y2 * y2 / (rho3 * rho3 * rho);
        let grad_rho_sq = (y2 * y2 * y2) / (rho3 * rho3);
        let d1 = s1 / width;
        let d2 = s2 / (width * width);
        CutoffDerivatives {
            value: s,
            gradient: grad_rho.iter().map(|g| d1 * g).collect(),
            laplacian: d2 * grad_rho_sq + d1 * lap_rho,
            dt: d1 * dt_rho,
        }
    }
}
