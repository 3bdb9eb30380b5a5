use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::gauss;

/// Radius of the spatial section of the heat ball `Ω_r` at depth `s = t_0 - t`:
/// `sqrt(2 N s ln(r / s))`.
pub fn heat_ball_section_radius(s: f64, r: f64, dim: usize) -> Result<f64> {
    if !(r > 0.0 && s > 0.0 && s < r) {
        return Err(Error::InvalidArgument(format!("section depth {s} must lie in (0, {r})")));
    }
    Ok((2.0 * dim as f64 * s * (r / s).ln()).sqrt())
}

/// Resolution of the heat-ball product rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatBallResolution {
    /// Geometric levels in `s` accumulating at `s = 0`.
    pub levels: usize,
    /// Ratio between consecutive geometric breakpoints.
    pub ratio: f64,
    /// Gauss-Legendre points per `s`-panel.
    pub order_s: usize,
    /// Gauss-Legendre points along the radius (or the interval for `N = 1`).
    pub order_radial: usize,
    /// Uniform azimuthal points (`N >= 2`); `N = 3` also uses half as many
    /// Gauss-Legendre points in the polar cosine.
    pub order_angular: usize,
    /// Required `|M_r(1) - 1|`.
    pub tolerance: f64,
}

impl Default for HeatBallResolution {
    fn default() -> Self {
        HeatBallResolution {
            levels: 36,
            ratio: 0.15,
            order_s: 10,
            order_radial: 12,
            order_angular: 16,
            tolerance: 1e-8,
        }
    }
}

impl HeatBallResolution {
    /// A coarse rule, mostly useful for tests and refinement studies.
    pub fn coarse() -> Self {
        HeatBallResolution {
            levels: 6,
            ratio: 0.15,
            order_s: 3,
            order_radial: 4,
            order_angular: 6,
            tolerance: 1e-8,
        }
    }

    /// Doubles every count.
    pub fn doubled(&self) -> Self {
        HeatBallResolution {
            levels: 2 * self.levels,
            order_s: 2 * self.order_s,
            order_radial: 2 * self.order_radial,
            order_angular: 2 * self.order_angular,
            ..self.clone()
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("heat-ball rules are provided for N = 1, 2, 3, not {dim}")));
        }
        if self.levels == 0 || self.order_s == 0 || self.order_radial == 0 || (dim > 1 && self.order_angular < 2) {
            return Err(Error::InvalidArgument("heat-ball resolution counts must be positive".into()));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidArgument(format!("grading ratio must lie in (0, 1), got {}", self.ratio)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatBallNode {
    pub point: SpaceTimePoint,
    /// `point - z_0`, kept separately since nodes near the pole are not
    /// distinguishable from it after rounding.
    pub offset: SpaceTimePoint,
    /// Product-rule weight for `dζ`.
    pub weight: f64,
    /// `weight * W(z_0 - point) * (4πr)^{-N/2}`; these sum to one.
    pub mean_weight: f64,
}

/// Product quadrature for the mean-value operator `M_r` at a fixed pole.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatBallQuadrature {
    pole: SpaceTimePoint,
    radius: f64,
    resolution: HeatBallResolution,
    nodes: Vec<HeatBallNode>,
    normalization_error: f64,
}

// Geometric grading toward s = r stops once the gap is this small relative to r;
// the section shrinks like (r - s)^{(N+2)/2} so the remainder is negligible.
const TOP_GAP: f64 = 1e-6;

fn s_breakpoints(r: f64, res: &HeatBallResolution) -> Vec<f64> {
    let mut pts = vec![0.0];
    for j in (0..=res.levels).rev() {
        pts.push(0.5 * r * res.ratio.powi(j as i32));
    }
    let mut j = 1;
    loop {
        let gap = 0.5 * res.ratio.powi(j);
        if gap < TOP_GAP || j as usize > res.levels {
            break;
        }
        pts.push(r - r * gap);
        j += 1;
    }
    pts.push(r);
    pts
}

/// Unit-radius section rule: `(offset, weight)` with `∫_{|y|<1} f(y) dy ≈ Σ w f(y)`.
fn unit_section_rule(dim: usize, res: &HeatBallResolution) -> Vec<(Vec<f64>, f64)> {
    let (gx, gw) = gauss::gauss_legendre(res.order_radial);
    match dim {
        1 => gx.iter().zip(&gw).map(|(x, w)| (vec![*x], *w)).collect(),
        2 => {
            let m = res.order_angular;
            let mut out = Vec::with_capacity(gx.len() * m);
            for (x, w) in gx.iter().zip(&gw) {
                let rho = 0.5 * (x + 1.0);
                let wr = 0.5 * w * rho;
                for k in 0..m {
                    let th = 2.0 * PI * k as f64 / m as f64;
                    out.push((vec![rho * th.cos(), rho * th.sin()], wr * 2.0 * PI / m as f64));
                }
            }
            out
        }
        _ => {
            let m = res.order_angular;
            let (cx, cw) = gauss::gauss_legendre((m / 2).max(1));
            let mut out = Vec::with_capacity(gx.len() * cx.len() * m);
            for (x, w) in gx.iter().zip(&gw) {
                let rho = 0.5 * (x + 1.0);
                let wr = 0.5 * w * rho * rho;
                for (c, wc) in cx.iter().zip(&cw) {
                    let sn = (1.0 - c * c).sqrt();
                    for k in 0..m {
                        let ph = 2.0 * PI * k as f64 / m as f64;
                        out.push((
                            vec![rho * sn * ph.cos(), rho * sn * ph.sin(), rho * c],
                            wr * wc * 2.0 * PI / m as f64,
                        ));
                    }
                }
            }
            out
        }
    }
}

impl HeatBallQuadrature {
    /// Builds the rule at exactly this resolution, without checking the tolerance.
    pub fn with_resolution(pole: &SpaceTimePoint, r: f64, resolution: &HeatBallResolution) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("heat-ball radius must be positive, got {r}")));
        }
        if !pole.is_finite() {
            return Err(Error::InvalidArgument(format!("pole {pole} is not finite")));
        }
        let dim = pole.dim();
        resolution.validate(dim)?;
        let section = unit_section_rule(dim, resolution);
        let norm = (4.0 * PI * r).powf(-0.5 * dim as f64);
        let breaks = s_breakpoints(r, resolution);
        let (sx, sw) = gauss::gauss_legendre(resolution.order_s);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * sx.len() * section.len());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            for (x, w) in sx.iter().zip(&sw) {
                let s = a + half * (x + 1.0);
                let ws = half * w;
                let big_r = heat_ball_section_radius(s, r, dim)?;
                let jac = big_r.powi(dim as i32);
                for (y, wy) in &section {
                    let offset: Vec<f64> = y.iter().map(|v| big_r * v).collect();
                    let y2: f64 = offset.iter().map(|v| v * v).sum();
                    let weight = ws * wy * jac;
                    let point = SpaceTimePoint::new(
                        pole.x.iter().zip(&offset).map(|(p, o)| p + o).collect(),
                        pole.t - s,
                    );
                    nodes.push(HeatBallNode {
                        point,
                        offset: SpaceTimePoint::new(offset, -s),
                        weight,
                        mean_weight: weight * y2 / (4.0 * s * s) * norm,
                    });
                }
            }
        }
        let total: f64 = nodes.iter().map(|n| n.mean_weight).sum();
        Ok(HeatBallQuadrature {
            pole: pole.clone(),
            radius: r,
            resolution: resolution.clone(),
            nodes,
            normalization_error: (total - 1.0).abs(),
        })
    }

    pub fn pole(&self) -> &SpaceTimePoint {
        &self.pole
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn resolution(&self) -> &HeatBallResolution {
        &self.resolution
    }

    pub fn nodes(&self) -> &[HeatBallNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `|Σ mean_weight - 1|`.
    pub fn normalization_error(&self) -> f64 {
        self.normalization_error
    }

    /// The same rule translated to another pole.
    pub fn recentered(&self, pole: &SpaceTimePoint) -> HeatBallQuadrature {
        let shift = pole.sub(&self.pole);
        HeatBallQuadrature {
            pole: pole.clone(),
            radius: self.radius,
            resolution: self.resolution.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| HeatBallNode { point: n.point.add(&shift), ..n.clone() })
                .collect(),
            normalization_error: self.normalization_error,
        }
    }

    /// `Σ mean_weight_i · u(node_i)`.
    pub fn apply<F: Field + ?Sized>(&self, u: &F) -> Result<f64> {
        let mut sum = 0.0;
        for n in &self.nodes {
            sum += n.mean_weight * u.eval(&n.point)?;
        }
        Ok(sum)
    }
}

/// Builds a rule meeting `resolution.tolerance`, doubling the resolution up to
/// three times if needed.
pub fn build_heat_ball_quadrature(
    pole: &SpaceTimePoint,
    r: f64,
    resolution: &HeatBallResolution,
) -> Result<HeatBallQuadrature> {
    let mut res = resolution.clone();
    let mut last = f64::INFINITY;
    for _ in 0..=MAX_REFINEMENTS {
        let q = HeatBallQuadrature::with_resolution(pole, r, &res)?;
        if q.normalization_error() <= res.tolerance {
            return Ok(q);
        }
        last = q.normalization_error();
        res = res.doubled();
    }
    Err(Error::QuadratureNotConverged { estimate: last, tolerance: resolution.tolerance })
}

const MAX_REFINEMENTS: usize = 3;

/// `M_r(u)(z_0)` with a rule built for `(z_0, r)`.
pub fn mean_value<F: Field + ?Sized>(
    u: &F,
    pole: &SpaceTimePoint,
    r: f64,
    quad: &HeatBallQuadrature,
) -> Result<f64> {
    let tol = 1e-12 * (1.0 + r.abs());
    if (quad.radius - r).abs() > tol
        || quad.pole.dim() != pole.dim()
        || quad.pole.sub(pole).coords().iter().any(|d| d.abs() > tol)
    {
        return Err(Error::InvalidArgument(format!(
            "quadrature was built for pole {} and radius {}, not {pole} and {r}",
            quad.pole, quad.radius
        )));
    }
    quad.apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calorics::gw_kernel;

    #[test]
    fn section_radius() {
        let r = 0.7;
        let s = r / std::f64::consts::E;
        assert!((heat_ball_section_radius(s, r, 2).unwrap() - (4.0 * r / std::f64::consts::E).sqrt()).abs() < 1e-14);
        assert!(heat_ball_section_radius(r * (1.0 - 1e-12), r, 1).unwrap() < 1e-5);
        assert!(heat_ball_section_radius(1e-14, r, 1).unwrap() < 1e-5);
        assert!(heat_ball_section_radius(r, r, 1).is_err());
        assert!(heat_ball_section_radius(0.0, r, 1).is_err());
        // The section is the level set of the kernel.
        for s in [0.01, 0.2, 0.5] {
            let big_r = heat_ball_section_radius(s, r, 1).unwrap();
            let g = gw_kernel(&SpaceTimePoint::new(vec![big_r], s)).unwrap();
            assert!((g - (4.0 * PI * r).powf(-0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn default_rule_is_normalized() {
        for dim in 1..=3 {
            let pole = SpaceTimePoint::new(vec![0.3; dim], -0.2);
            for r in [0.1, 0.5, 1.0] {
                let q = build_heat_ball_quadrature(&pole, r, &HeatBallResolution::default()).unwrap();
                assert!(q.normalization_error() <= 1e-8, "N = {dim}, r = {r}: {}", q.normalization_error());
                let threshold = (4.0 * PI * r).powf(-0.5 * dim as f64);
                for n in q.nodes() {
                    assert!(n.weight > 0.0 && n.mean_weight > 0.0);
                    let back = SpaceTimePoint::new(n.offset.x.iter().map(|v| -v).collect(), -n.offset.t);
                    assert!(gw_kernel(&back).unwrap() > threshold);
                }
            }
        }
    }

    #[test]
    fn node_count_grows_with_resolution() {
        let pole = SpaceTimePoint::origin(2);
        let mut res = HeatBallResolution::coarse();
        let mut prev = 0;
        for _ in 0..3 {
            let q = HeatBallQuadrature::with_resolution(&pole, 1.0, &res).unwrap();
            assert!(q.len() > prev);
            prev = q.len();
            res = res.doubled();
        }
    }

    #[test]
    fn mean_value_checks_pole() {
        let pole = SpaceTimePoint::origin(1);
        let q = build_heat_ball_quadrature(&pole, 0.5, &HeatBallResolution::default()).unwrap();
        let one = |_: &SpaceTimePoint| 1.0;
        assert!((mean_value(&one, &pole, 0.5, &q).unwrap() - 1.0).abs() < 1e-8);
        assert!(mean_value(&one, &pole, 0.4, &q).is_err());
        let moved = SpaceTimePoint::new(vec![1.0], 2.0);
        assert!(mean_value(&one, &moved, 0.5, &q).is_err());
        let q2 = q.recentered(&moved);
        assert!((mean_value(&one, &moved, 0.5, &q2).unwrap() - 1.0).abs() < 1e-8);
    }
}
