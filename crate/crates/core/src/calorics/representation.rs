use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{caloric_norm, gw_gradient, gw_kernel, CaloricDisk, CutoffFunction, SpaceTimePoint};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::gauss;

/// Which form of the representation kernel to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelVariant {
    /// `Γ(z-ζ)(Δψ + ∂_tψ)(ζ) - 2<∇Γ(z-ζ), ∇ψ(ζ)>`, obtained by integrating
    /// `Γ(z-ζ) H(uψ)` by parts. Reproduces caloric functions.
    Derived,
    /// `Γ(z-ζ) ∂_tψ(ζ) - 2<∇Γ(z-ζ), ∇ψ(ζ)>`. Kept for comparison only.
    Printed,
}

/// Kernel `K(z, ζ)` such that `u(z) = ∫ u(ζ) K(z, ζ) dζ` for `u` caloric on the doubled disk.
pub fn representation_kernel(
    z: &SpaceTimePoint,
    zeta: &SpaceTimePoint,
    psi: &CutoffFunction,
    variant: KernelVariant,
) -> Result<f64> {
    if psi.is_flat(zeta) {
        return Ok(0.0);
    }
    let diff = z.sub(zeta);
    let g = gw_kernel(&diff)?;
    if g == 0.0 {
        return Ok(0.0);
    }
    let grad_g = gw_gradient(&diff)?;
    let d = psi.derivatives(zeta);
    let cross: f64 = grad_g.iter().zip(&d.gradient).map(|(a, b)| a * b).sum();
    let source = match variant {
        KernelVariant::Derived => d.laplacian + d.dt,
        KernelVariant::Printed => d.dt,
    };
    Ok(g * source - 2.0 * cross)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproductionOptions {
    pub variant: KernelVariant,
    pub rho_in: f64,
    pub rho_out: f64,
    /// Gauss-Legendre panels per axis at the coarse level; the estimate
    /// compares against twice as many.
    pub panels: usize,
    pub order: usize,
    /// Fail with [`Error::QuadratureNotConverged`] if the estimate exceeds this.
    pub tolerance: Option<f64>,
}

impl Default for ReproductionOptions {
    fn default() -> Self {
        ReproductionOptions {
            variant: KernelVariant::Derived,
            rho_in: 0.55,
            rho_out: 0.95,
            panels: 16,
            order: 16,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// `|I_2P - I_P|` between the two panel counts.
    pub error_estimate: f64,
    pub nodes: usize,
}

/// Evaluates `∫ u(ζ) K(z, ζ) dζ` over the support of the cutoff, for `z` in the disk.
pub fn reproduce<F>(
    u: &F,
    z: &SpaceTimePoint,
    disk: &CaloricDisk,
    options: &ReproductionOptions,
) -> Result<QuadratureEstimate>
where
    F: Field + Sync + ?Sized,
{
    if z.dim() != disk.center.dim() {
        return Err(Error::DimensionMismatch { expected: disk.center.dim(), got: z.dim() });
    }
    if caloric_norm(&z.sub(&disk.center)) >= disk.radius {
        return Err(Error::InvalidArgument(format!("{z} is not inside the disk")));
    }
    if options.panels == 0 || options.order == 0 {
        return Err(Error::InvalidArgument("panels and order must be positive".into()));
    }
    let psi = CutoffFunction::new(disk, options.rho_in, options.rho_out)?;
    let b = psi.outer();
    let c = &disk.center;
    let t_lo = c.t - b * b;
    let t_hi = (c.t + b * b).min(z.t);
    let coarse = integrate(u, z, &psi, options, options.panels, t_lo, t_hi)?;
    let fine = integrate(u, z, &psi, options, 2 * options.panels, t_lo, t_hi)?;
    let estimate = QuadratureEstimate {
        value: fine.0,
        error_estimate: (fine.0 - coarse.0).abs(),
        nodes: fine.1,
    };
    if let Some(tol) = options.tolerance {
        if estimate.error_estimate > tol {
            return Err(Error::QuadratureNotConverged { estimate: estimate.error_estimate, tolerance: tol });
        }
    }
    Ok(estimate)
}

fn integrate<F>(
    u: &F,
    z: &SpaceTimePoint,
    psi: &CutoffFunction,
    options: &ReproductionOptions,
    panels: usize,
    t_lo: f64,
    t_hi: f64,
) -> Result<(f64, usize)>
where
    F: Field + Sync + ?Sized,
{
    let n = z.dim();
    let b = psi.outer();
    let center = &psi.disk().center;
    let t_rule = gauss::composite(t_lo, t_hi, panels, options.order);
    let x_rules: Vec<Vec<(f64, f64)>> =
        (0..n).map(|j| gauss::composite(center.x[j] - b, center.x[j] + b, panels, options.order)).collect();
    let per_axis = panels * options.order;
    let spatial_count = per_axis.pow(n as u32);

    let slices: Vec<Result<f64>> = t_rule
        .par_iter()
        .map(|&(t, wt)| {
            let mut sum = 0.0;
            let mut idx = vec![0usize; n];
            let mut zeta = SpaceTimePoint::new(vec![0.0; n], t);
            for _ in 0..spatial_count {
                let mut w = wt;
                for j in 0..n {
                    let (xj, wj) = x_rules[j][idx[j]];
                    zeta.x[j] = xj;
                    w *= wj;
                }
                let k = representation_kernel(z, &zeta, psi, options.variant)?;
                if k != 0.0 {
                    sum += w * k * u.eval(&zeta)?;
                }
                for j in 0..n {
                    idx[j] += 1;
                    if idx[j] < per_axis {
                        break;
                    }
                    idx[j] = 0;
                }
            }
            Ok(sum)
        })
        .collect();
    let mut total = 0.0;
    for s in slices {
        total += s?;
    }
    Ok((total, t_rule.len() * spatial_count))
}
