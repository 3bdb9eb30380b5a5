use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_sampled, sample, unit_frame_map, Sampled};
use super::{BoundaryData, CaloricBowl, FitOptions};
use crate::calorics::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::poly::{caloric_extension, FloatPolynomial, Polynomial};

/// Either escalate the degree until the certificate meets a tolerance, or fit at one degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveTarget {
    Tolerance { epsilon: f64, max_degree: u32 },
    Degree(u32),
}

impl Default for SolveTarget {
    fn default() -> Self {
        SolveTarget::Tolerance { epsilon: 1e-6, max_degree: 14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub target: SolveTarget,
    pub fit: FitOptions,
    /// The certificate is the sampled boundary residual times this factor.
    pub safety_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { target: SolveTarget::default(), fit: FitOptions::default(), safety_factor: 1.25 }
    }
}

impl SolveOptions {
    pub fn with_target(target: SolveTarget) -> Self {
        SolveOptions { target, ..Default::default() }
    }
}

/// One row of the boundary residual table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResidual {
    pub point: SpaceTimePoint,
    pub data: f64,
    pub solution: f64,
}

impl BoundaryResidual {
    pub fn error(&self) -> f64 {
        (self.solution - self.data).abs()
    }
}

/// A caloric polynomial solving the bowl problem up to a certified sup error.
#[derive(Debug, Clone)]
pub struct BowlSolution {
    pub bowl: CaloricBowl,
    /// The solution in global coordinates; `apply_heat(u) == 0` exactly.
    pub u: Polynomial,
    /// The same solution in the unit frame `((x - x_0)/r, (t - t_0)/r²)`.
    pub unit: Polynomial,
    /// Certified bound on `sup |u - u_φ|` over the closed bowl.
    pub epsilon: f64,
    pub degree: u32,
    pub condition: f64,
    pub snapped: bool,
    pub residuals: Vec<BoundaryResidual>,
    unit_float: FloatPolynomial,
}

impl BowlSolution {
    /// Evaluates through the unit frame, which is better conditioned than
    /// expanding around a distant bottom.
    pub fn eval(&self, z: &SpaceTimePoint) -> f64 {
        let u = self.bowl.to_unit(z);
        self.unit_float.eval_split(&u.x, u.t)
    }

    pub fn max_boundary_error(&self) -> f64 {
        self.residuals.iter().map(BoundaryResidual::error).fold(0.0, f64::max)
    }
}

impl crate::field::Field for BowlSolution {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        if z.dim() != self.bowl.dim() {
            return Err(Error::DimensionMismatch { expected: self.bowl.dim(), got: z.dim() });
        }
        Ok(BowlSolution::eval(self, z))
    }
}

pub(crate) fn solve_at_degree(
    bowl: &CaloricBowl,
    sampled: &Sampled,
    d: u32,
    options: &SolveOptions,
) -> Result<BowlSolution> {
    let fit = fit_sampled(sampled, bowl.dim(), d, &options.fit)?;
    let unit = caloric_extension(&fit.unit)?;
    let unit_float = unit.to_float();
    let residuals: Vec<BoundaryResidual> = sampled
        .check_nodes
        .par_iter()
        .zip(sampled.check_values.par_iter())
        .map(|(xi, v)| {
            let tau: f64 = xi.iter().map(|a| a * a).sum();
            BoundaryResidual { point: bowl.boundary_from_unit(xi), data: *v, solution: unit_float.eval_split(xi, tau) }
        })
        .collect();
    let max = residuals.iter().map(BoundaryResidual::error).fold(0.0, f64::max);
    let (scale, shift_x, shift_t) = unit_frame_map(bowl);
    let u = unit.parabolic_substitute(&scale, &shift_x, &shift_t);
    Ok(BowlSolution {
        bowl: bowl.clone(),
        u,
        unit,
        epsilon: options.safety_factor * max,
        degree: fit.degree,
        condition: fit.condition,
        snapped: fit.snapped,
        residuals,
        unit_float,
    })
}

/// Solves `Hu = 0` in the bowl with `u = φ` on its normal boundary.
pub fn solve_bowl(bowl: &CaloricBowl, phi: &BoundaryData, options: &SolveOptions) -> Result<BowlSolution> {
    if !(options.safety_factor >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "safety factor must be at least 1, got {}",
            options.safety_factor
        )));
    }
    match options.target {
        SolveTarget::Degree(d) => {
            let sampled = sample(phi, bowl, d, &options.fit)?;
            solve_at_degree(bowl, &sampled, d, options)
        }
        SolveTarget::Tolerance { epsilon, max_degree } => {
            if !(epsilon > 0.0) {
                return Err(Error::InvalidArgument(format!("tolerance must be positive, got {epsilon}")));
            }
            let mut best: Option<BowlSolution> = None;
            for d in 0..=max_degree {
                let sampled = sample(phi, bowl, d, &options.fit)?;
                let sol = solve_at_degree(bowl, &sampled, d, options)?;
                if sol.epsilon <= epsilon {
                    return Ok(sol);
                }
                if best.as_ref().is_none_or(|b| sol.epsilon < b.epsilon) {
                    best = Some(sol);
                }
            }
            let best = best.expect("at least one degree attempted");
            Err(Error::ToleranceNotMet {
                tolerance: epsilon,
                max_degree,
                best_epsilon: best.epsilon,
                best: Box::new(best),
            })
        }
    }
}
