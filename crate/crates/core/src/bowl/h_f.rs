use serde::{Deserialize, Serialize};

use super::fit::unit_ball_grid;
use super::solve::solve_at_degree;
use super::{fit, BoundaryData, CaloricBowl, FitOptions, SolveOptions, SolveTarget};
use crate::calorics::{caloric_norm, SpaceTimePoint};
use crate::error::{Error, Result};
use crate::field::Field;

/// Staging for the lower envelope `h_f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfOptions {
    /// Fit degree used at every stage.
    pub degree: u32,
    /// Lipschitz constant of the first regularization.
    pub k0: f64,
    /// Factor between consecutive Lipschitz constants.
    pub growth: f64,
    pub stages: usize,
    /// Points per axis of the boundary sample carrying the regularized data.
    pub boundary_per_axis: usize,
    pub fit: FitOptions,
    pub safety_factor: f64,
}

impl Default for HfOptions {
    fn default() -> Self {
        HfOptions {
            degree: 8,
            k0: 1.0,
            growth: 2.0,
            stages: 10,
            boundary_per_axis: 73,
            fit: FitOptions::default(),
            safety_factor: 1.25,
        }
    }
}

/// One regularization stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HfStage {
    pub k: f64,
    pub epsilon: f64,
    pub degree: u32,
    /// `u_k` at the requested points.
    pub values: Vec<f64>,
    /// `u_k - ε_k`, a certified lower bound for the exact solution with data `φ_k`.
    pub lower: Vec<f64>,
    /// Running maximum of `lower` over stages so far.
    pub running_sup: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HfApproximation {
    pub points: Vec<SpaceTimePoint>,
    pub stages: Vec<HfStage>,
    /// Max of `f` over the boundary sample.
    pub data_sup: f64,
}

impl HfApproximation {
    /// The last running supremum, i.e. the current estimate of `h_f` at each point.
    pub fn estimate(&self) -> &[f64] {
        self.stages.last().map_or(&[], |s| &s.running_sup)
    }
}

/// Approximates `h_f = sup { u_φ : φ continuous, φ <= f }` from below at `points`
/// by solving with the inf-convolutions `φ_k(y) = min_w f(w) + k ||w - y||`
/// over a fixed boundary sample, for increasing `k`.
pub fn approximate_h_f<F>(
    bowl: &CaloricBowl,
    f: &F,
    points: &[SpaceTimePoint],
    options: &HfOptions,
) -> Result<HfApproximation>
where
    F: Field + Sync + ?Sized,
{
    if options.stages == 0 || !(options.k0 > 0.0) || !(options.growth > 1.0) {
        return Err(Error::InvalidArgument("need at least one stage, k0 > 0 and growth > 1".into()));
    }
    for z in points {
        if !bowl.contains(z) {
            return Err(Error::InvalidArgument(format!("{z} is not inside {bowl}")));
        }
    }
    let unit = unit_ball_grid(bowl.dim(), options.boundary_per_axis.max(2));
    let boundary: Vec<SpaceTimePoint> = unit.iter().map(|xi| bowl.boundary_from_unit(xi)).collect();
    let mut fvals = Vec::with_capacity(boundary.len());
    for z in &boundary {
        let v = f.eval(z)?;
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::InvalidArgument(format!("data is not bounded above: f{z} = {v}")));
        }
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("data value f{z} = {v} is not finite")));
        }
        fvals.push(v);
    }
    let data_sup = fvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let distances: Vec<Vec<f64>> = boundary
        .iter()
        .map(|y| boundary.iter().map(|w| caloric_norm(&w.sub(y))).collect())
        .collect();
    let solve_options = SolveOptions {
        target: SolveTarget::Degree(options.degree),
        fit: options.fit.clone(),
        safety_factor: options.safety_factor,
    };
    let xs: Vec<Vec<f64>> = boundary.iter().map(|z| z.x.clone()).collect();

    let mut stages: Vec<HfStage> = Vec::with_capacity(options.stages);
    let mut k = options.k0;
    for _ in 0..options.stages {
        let phi_k: Vec<f64> = distances
            .iter()
            .map(|row| row.iter().zip(&fvals).map(|(d, fw)| fw + k * d).fold(f64::INFINITY, f64::min))
            .collect();
        let data = BoundaryData::samples(xs.clone(), phi_k)?;
        let sampled = fit::sample(&data, bowl, options.degree, &options.fit)?;
        let sol = solve_at_degree(bowl, &sampled, options.degree, &solve_options)?;
        let values: Vec<f64> = points.iter().map(|z| sol.eval(z)).collect();
        let lower: Vec<f64> = values.iter().map(|v| v - sol.epsilon).collect();
        let running_sup = match stages.last() {
            Some(prev) => prev.running_sup.iter().zip(&lower).map(|(a, b)| a.max(*b)).collect(),
            None => lower.clone(),
        };
        stages.push(HfStage { k, epsilon: sol.epsilon, degree: sol.degree, values, lower, running_sup });
        k *= options.growth;
    }
    Ok(HfApproximation { points: points.to_vec(), stages, data_sup })
}
