use std::f64::consts::PI;

use super::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::field::Field;

fn is_pole(z: &SpaceTimePoint) -> bool {
    z.t == 0.0 && z.x.iter().all(|v| *v == 0.0)
}

/// Gauss-Weierstrass kernel: `(4πt)^{-N/2} exp(-|x|²/4t)` for `t > 0`, zero for `t <= 0`.
pub fn gw_kernel(z: &SpaceTimePoint) -> Result<f64> {
    if is_pole(z) {
        return Err(Error::PoleEvaluation);
    }
    if z.t <= 0.0 {
        return Ok(0.0);
    }
    let n = z.dim() as f64;
    Ok((4.0 * PI * z.t).powf(-0.5 * n) * (-z.norm_x_sq() / (4.0 * z.t)).exp())
}

/// Spatial gradient `-(x / 2t) Γ(z)`; zero where `t <= 0`.
pub fn gw_gradient(z: &SpaceTimePoint) -> Result<Vec<f64>> {
    let g = gw_kernel(z)?;
    if z.t <= 0.0 {
        return Ok(vec![0.0; z.dim()]);
    }
    Ok(z.x.iter().map(|xi| -xi / (2.0 * z.t) * g).collect())
}

/// `ζ -> Γ(ζ - pole)`, caloric away from the pole.
#[derive(Debug, Clone)]
pub struct GaussWeierstrass {
    pub pole: SpaceTimePoint,
}

impl Field for GaussWeierstrass {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        gw_kernel(&z.sub(&self.pole))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(vec![x], t)
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(gw_kernel(&pt(0.0, -1.0)).unwrap(), 0.0);
        let c = (4.0 * PI).powf(-0.5);
        assert!((gw_kernel(&pt(0.0, 1.0)).unwrap() - c).abs() < 1e-16);
        assert!((gw_kernel(&pt(2.0, 1.0)).unwrap() - c * (-1f64).exp()).abs() < 1e-16);
        assert!(gw_kernel(&pt(3.0, 1e-3)).unwrap() >= 0.0);
        assert!(gw_kernel(&pt(0.1, 0.2)).unwrap() > 0.0);
        assert!(matches!(gw_kernel(&pt(0.0, 0.0)), Err(Error::PoleEvaluation)));
        assert_eq!(gw_kernel(&pt(1.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(gw_gradient(&pt(0.0, 1.0)).unwrap(), vec![0.0]);
        let c = (4.0 * PI).powf(-0.5) * (-1f64).exp();
        assert!((gw_gradient(&pt(2.0, 1.0)).unwrap()[0] + c).abs() < 1e-16);
        assert_eq!(gw_gradient(&SpaceTimePoint::new(vec![0.4, 2.0], -0.1)).unwrap(), vec![0.0, 0.0]);
        assert!(gw_gradient(&SpaceTimePoint::origin(2)).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let z = SpaceTimePoint::new(vec![0.3, -0.7], 0.45);
        let g = gw_gradient(&z).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp.x[j] += h;
            zm.x[j] -= h;
            let fd = (gw_kernel(&zp).unwrap() - gw_kernel(&zm).unwrap()) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn kernel_is_caloric_away_from_pole() {
        // Δ Γ = ∂_t Γ, checked by central differences.
        let z = SpaceTimePoint::new(vec![0.2, 0.5], 0.8);
        let h = 1e-4;
        let f = |z: &SpaceTimePoint| gw_kernel(z).unwrap();
        let mut lap = 0.0;
        for j in 0..2 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp.x[j] += h;
            zm.x[j] -= h;
            lap += (f(&zp) - 2.0 * f(&z) + f(&zm)) / (h * h);
        }
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp.t += h;
        zm.t -= h;
        let dt = (f(&zp) - f(&zm)) / (2.0 * h);
        assert!((lap - dt).abs() < 1e-6);
    }
}
