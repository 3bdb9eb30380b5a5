use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundaryData, CaloricBowl};
use crate::error::{Error, Result};
use crate::poly::{rational_from_f64, snap_rational, MultiIndex, Polynomial};

/// Controls for the least-squares boundary fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Fits whose scaled design matrix exceeds this condition number fall
    /// back to a lower degree.
    pub max_condition: f64,
    /// Chebyshev nodes per axis; `2d + 2` when unset.
    pub nodes_per_axis: Option<usize>,
    /// The residual sample has this many times more points per axis than the fit.
    pub check_density: usize,
    /// Cap on residual sample size (relevant for `N = 3`).
    pub max_check_points: usize,
    /// Try to recover exact rational coefficients when the fit is exact to roundoff.
    pub snap: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_condition: 1e13,
            nodes_per_axis: None,
            check_density: 4,
            max_check_points: 250_000,
            snap: true,
        }
    }
}

/// A spatial polynomial fitted to the data on the normal boundary, expressed
/// in the unit frame `ξ = (x - x_0) / r`.
#[derive(Debug, Clone)]
pub struct BoundaryFit {
    /// `p̃(ξ)` with no time dependence.
    pub unit: Polynomial,
    pub requested_degree: u32,
    /// Degree actually used after any conditioning fallback.
    pub degree: u32,
    /// Max of `|p̃(ξ) - φ(x_0 + rξ, t_0 + r²|ξ|²)|` over the residual sample.
    pub residual: f64,
    pub condition: f64,
    /// Whether coefficients were rationalized.
    pub snapped: bool,
    pub fit_nodes: usize,
    pub check_nodes: usize,
}

impl BoundaryFit {
    /// `p_d(x) = p̃((x - x_0) / r)` in global coordinates.
    pub fn spatial_polynomial(&self, bowl: &CaloricBowl) -> Polynomial {
        let (scale, shift_x, shift_t) = unit_frame_map(bowl);
        self.unit.parabolic_substitute(&scale, &shift_x, &shift_t)
    }
}

/// Exact parameters `(s, b, c)` with `ξ = s·x + b`, `τ = s²·t + c`.
pub(crate) fn unit_frame_map(bowl: &CaloricBowl) -> (BigRational, Vec<BigRational>, BigRational) {
    let r = rational_from_f64(bowl.opening);
    let scale = BigRational::from_integer(1.into()) / &r;
    let shift_x = bowl.bottom.x.iter().map(|x0| -rational_from_f64(*x0) * &scale).collect();
    let shift_t = -rational_from_f64(bowl.bottom.t) * &scale * &scale;
    (scale, shift_x, shift_t)
}

fn chebyshev(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| -(std::f64::consts::PI * (2 * k + 1) as f64 / (2 * m) as f64).cos())
        .collect()
}

fn uniform(m: usize) -> Vec<f64> {
    if m <= 1 {
        return vec![0.0];
    }
    (0..m).map(|k| -1.0 + 2.0 * k as f64 / (m - 1) as f64).collect()
}

/// Maps the cube `[-1, 1]^N` onto the closed unit ball, faces to the sphere.
fn cube_to_ball(q: &[f64]) -> Vec<f64> {
    match q.len() {
        1 => q.to_vec(),
        2 => {
            let (u, v) = (q[0], q[1]);
            vec![u * (1.0 - 0.5 * v * v).sqrt(), v * (1.0 - 0.5 * u * u).sqrt()]
        }
        3 => {
            let (u, v, w) = (q[0] * q[0], q[1] * q[1], q[2] * q[2]);
            vec![
                q[0] * (1.0 - 0.5 * v - 0.5 * w + v * w / 3.0).sqrt(),
                q[1] * (1.0 - 0.5 * w - 0.5 * u + w * u / 3.0).sqrt(),
                q[2] * (1.0 - 0.5 * u - 0.5 * v + u * v / 3.0).sqrt(),
            ]
        }
        _ => {
            let sup = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let two = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if two == 0.0 {
                q.to_vec()
            } else {
                q.iter().map(|v| v * sup / two).collect()
            }
        }
    }
}

fn tensor(dim: usize, axis: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Uniform grid of `per_axis^N` points on the closed unit ball, rim included.
pub fn unit_ball_grid(dim: usize, per_axis: usize) -> Vec<Vec<f64>> {
    tensor(dim, &uniform(per_axis)).iter().map(|q| cube_to_ball(q)).collect()
}

pub(crate) fn chebyshev_ball(dim: usize, per_axis: usize) -> Vec<Vec<f64>> {
    tensor(dim, &chebyshev(per_axis)).iter().map(|q| cube_to_ball(q)).collect()
}

/// Spatial exponents of total degree at most `d`, graded.
pub(crate) fn spatial_exponents(dim: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=d {
        let mut stack = vec![(Vec::<u32>::new(), total)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() == dim - 1 {
                let mut e = prefix;
                e.push(left);
                out.push(e);
                continue;
            }
            for k in (0..=left).rev() {
                let mut e = prefix.clone();
                e.push(k);
                stack.push((e, left - k));
            }
        }
    }
    out
}

pub(crate) fn eval_monomials(exps: &[Vec<u32>], coeffs: &[f64], xi: &[f64]) -> f64 {
    exps.iter()
        .zip(coeffs)
        .map(|(e, c)| e.iter().zip(xi).fold(*c, |acc, (&k, &v)| if k == 0 { acc } else { acc * v.powi(k as i32) }))
        .sum()
}

/// Boundary values at unit-frame nodes.
pub(crate) struct Sampled {
    pub fit_nodes: Vec<Vec<f64>>,
    pub fit_values: Vec<f64>,
    pub check_nodes: Vec<Vec<f64>>,
    pub check_values: Vec<f64>,
}

fn eval_field_at(phi: &BoundaryData, bowl: &CaloricBowl, nodes: &[Vec<f64>]) -> Result<Vec<f64>> {
    let BoundaryData::Field(f) = phi else { unreachable!() };
    nodes
        .par_iter()
        .map(|xi| {
            let z = bowl.boundary_from_unit(xi);
            let v = f.eval(&z)?;
            if !v.is_finite() {
                return Err(Error::Evaluation { point: z.to_string(), message: format!("boundary value {v}") });
            }
            Ok(v)
        })
        .collect()
}

pub(crate) fn sample(phi: &BoundaryData, bowl: &CaloricBowl, d: u32, options: &FitOptions) -> Result<Sampled> {
    let dim = bowl.dim();
    match phi {
        BoundaryData::Field(_) => {
            let m = options.nodes_per_axis.unwrap_or(2 * d as usize + 2).max(1);
            let fit_nodes = chebyshev_ball(dim, m);
            let mut dense = options.check_density.max(1) * m + 1;
            while dense > 2 && dense.pow(dim as u32) > options.max_check_points {
                dense -= 1;
            }
            let check_nodes = unit_ball_grid(dim, dense);
            let fit_values = eval_field_at(phi, bowl, &fit_nodes)?;
            let check_values = eval_field_at(phi, bowl, &check_nodes)?;
            Ok(Sampled { fit_nodes, fit_values, check_nodes, check_values })
        }
        BoundaryData::Samples { points, values } => {
            let mut nodes = Vec::with_capacity(points.len());
            for x in points {
                if x.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
                }
                let xi: Vec<f64> = x.iter().zip(&bowl.bottom.x).map(|(a, b)| (a - b) / bowl.opening).collect();
                if xi.iter().map(|v| v * v).sum::<f64>() > 1.0 + 1e-10 {
                    return Err(Error::InvalidArgument(format!("sample point {x:?} lies outside the bowl's rim")));
                }
                nodes.push(xi);
            }
            if nodes.is_empty() {
                return Err(Error::InvalidArgument("no boundary samples".into()));
            }
            Ok(Sampled {
                fit_nodes: nodes.clone(),
                fit_values: values.clone(),
                check_nodes: nodes,
                check_values: values.clone(),
            })
        }
    }
}

fn design_matrix(nodes: &[Vec<f64>], exps: &[Vec<u32>]) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(nodes.len(), exps.len());
    for (i, xi) in nodes.iter().enumerate() {
        for (j, e) in exps.iter().enumerate() {
            a[(i, j)] = eval_monomials(std::slice::from_ref(e), &[1.0], xi);
        }
    }
    a
}

/// The linear map from node values to least-squares coefficients, with the
/// same column scaling as the fit.
pub(crate) fn least_squares_operator(nodes: &[Vec<f64>], exps: &[Vec<u32>]) -> Result<DMatrix<f64>> {
    let mut a = design_matrix(nodes, exps);
    let mut scales = vec![1.0; exps.len()];
    for (j, s) in scales.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = norm;
            a.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    let mut pinv = a
        .pseudo_inverse(0.0)
        .map_err(|e| Error::InvalidArgument(format!("pseudo-inverse failed: {e}")))?;
    for (j, s) in scales.iter().enumerate() {
        pinv.row_mut(j).scale_mut(1.0 / s);
    }
    Ok(pinv)
}

/// Least squares with column scaling; `None` when the condition number exceeds the cap.
fn least_squares(nodes: &[Vec<f64>], values: &[f64], exps: &[Vec<u32>], max_condition: f64) -> (Option<Vec<f64>>, f64) {
    let n = nodes.len();
    let p = exps.len();
    let mut a = design_matrix(nodes, exps);
    let mut scales = vec![1.0; p];
    for (j, s) in scales.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = norm;
            a.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    let b = DVector::from_column_slice(values);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = if n >= p { svd.singular_values.min() } else { 0.0 };
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > max_condition {
        return (None, condition);
    }
    let y = svd.solve(&b, 0.0).expect("SVD computed with both factors");
    (Some(y.iter().zip(&scales).map(|(v, s)| v / s).collect()), condition)
}

fn max_residual(exps: &[Vec<u32>], coeffs: &[f64], nodes: &[Vec<f64>], values: &[f64]) -> f64 {
    nodes
        .par_iter()
        .zip(values.par_iter())
        .map(|(xi, v)| (eval_monomials(exps, coeffs, xi) - v).abs())
        .reduce(|| 0.0, f64::max)
}

pub(crate) fn fit_sampled(sampled: &Sampled, dim: usize, d: u32, options: &FitOptions) -> Result<BoundaryFit> {
    let mut degree = d;
    let (coeffs, condition, exps) = loop {
        let exps = spatial_exponents(dim, degree);
        let (coeffs, condition) = least_squares(&sampled.fit_nodes, &sampled.fit_values, &exps, options.max_condition);
        match coeffs {
            Some(c) => break (c, condition, exps),
            None if degree > 0 => degree -= 1,
            None => {
                return Err(Error::InvalidArgument(format!(
                    "boundary fit is ill-conditioned even at degree 0 (condition {condition:.3e})"
                )))
            }
        }
    };
    let residual = max_residual(&exps, &coeffs, &sampled.check_nodes, &sampled.check_values);
    let scale = sampled.check_values.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let mut snapped = None;
    if options.snap && residual <= 1e-10 * scale {
        let tol = 1e-9 * scale;
        let candidate: Option<Vec<BigRational>> = coeffs.iter().map(|c| snap_rational(*c, tol, 10_000)).collect();
        if let Some(candidate) = candidate {
            use num_traits::ToPrimitive;
            let approx: Vec<f64> = candidate.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
            let r2 = max_residual(&exps, &approx, &sampled.check_nodes, &sampled.check_values);
            if r2 <= (2.0 * residual).max(1e-12 * scale) {
                snapped = Some((candidate, r2));
            }
        }
    }
    let (rationals, residual, was_snapped) = match snapped {
        Some((c, r2)) => (c, r2, true),
        None => (coeffs.iter().map(|c| rational_from_f64(*c)).collect(), residual, false),
    };
    let mut unit = Polynomial::zero(dim);
    for (e, c) in exps.iter().zip(rationals) {
        if c.is_zero() {
            continue;
        }
        let mut full = e.clone();
        full.push(0);
        unit.add_term(MultiIndex::new(full), c);
    }
    Ok(BoundaryFit {
        unit,
        requested_degree: d,
        degree,
        residual,
        condition,
        snapped: was_snapped,
        fit_nodes: sampled.fit_nodes.len(),
        check_nodes: sampled.check_nodes.len(),
    })
}

/// Fits a degree-`d` spatial polynomial to `φ` on the normal boundary of `bowl`.
pub fn fit_boundary_polynomial(
    phi: &BoundaryData,
    bowl: &CaloricBowl,
    d: u32,
    options: &FitOptions,
) -> Result<BoundaryFit> {
    let sampled = sample(phi, bowl, d, options)?;
    fit_sampled(&sampled, bowl.dim(), d, options)
}
