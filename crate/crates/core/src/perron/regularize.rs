use nalgebra::DMatrix;

use super::domain::{DomainSpec, Lattice, NodeKind};
use super::grid::{stencil, GridFunction, Interpolant, Interpolation};
use crate::bowl::fit::{chebyshev_ball, least_squares_operator, spatial_exponents, unit_ball_grid};
use crate::bowl::{solve_bowl, BoundaryData, CaloricBowl, FitOptions, SolveOptions, SolveTarget};
use crate::calorics::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::poly::{caloric_extension, MultiIndex, Polynomial};

use num_rational::BigRational;
use num_traits::One;

const INWARD: f64 = 1e-6;
const CONTAINMENT_SAMPLES: usize = 17;

/// Checks `2B ⊆ Ω` on a sample of the closure of `2B`, each point pulled a
/// hair toward the bowl's axis midpoint. `2B` is convex, so the pulled points
/// lie in the open bowl.
pub(crate) fn doubled_inside(domain: &DomainSpec, bowl: &CaloricBowl) -> Result<bool> {
    let big = bowl.doubled();
    let r = big.opening;
    let centre = SpaceTimePoint::new(big.bottom.x.clone(), big.bottom.t + 0.5 * r * r);
    let pull = |p: SpaceTimePoint| {
        SpaceTimePoint::new(
            p.x.iter().zip(&centre.x).map(|(a, c)| a + INWARD * (c - a)).collect(),
            p.t + INWARD * (centre.t - p.t),
        )
    };
    for xi in unit_ball_grid(bowl.dim(), CONTAINMENT_SAMPLES) {
        let rim = big.boundary_from_unit(&xi);
        let top = SpaceTimePoint::new(rim.x.clone(), big.bottom.t + r * r);
        if !domain.contains(&pull(rim))? || !domain.contains(&pull(top))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn fit_options() -> FitOptions {
    FitOptions { snap: false, ..FitOptions::default() }
}

/// `u_B`: `u` off `B̂`, and on `B̂` the degree-`degree` bowl solution on `2B`
/// with data interpolated from `u` on the normal boundary of `2B`.
pub fn caloric_regularize(
    u: &GridFunction,
    domain: &DomainSpec,
    bowl: &CaloricBowl,
    degree: u32,
    order: Interpolation,
) -> Result<GridFunction> {
    if bowl.dim() != u.lattice.dim() {
        return Err(Error::DimensionMismatch { expected: u.lattice.dim(), got: bowl.dim() });
    }
    if !doubled_inside(domain, bowl)? {
        return Err(Error::InvalidArgument(format!("the doubled bowl of {bowl} leaves the domain")));
    }
    let data = BoundaryData::field(Interpolant { grid: u.clone(), order });
    let options = SolveOptions { target: SolveTarget::Degree(degree), fit: fit_options(), safety_factor: 1.25 };
    let sol = solve_bowl(&bowl.doubled(), &data, &options)?;
    let mut out = u.clone();
    for idx in 0..out.len() {
        if out.kinds[idx].in_domain() {
            let z = out.point(idx);
            if bowl.contains_hat(&z) {
                out.values[idx] = sol.eval(&z);
            }
        }
    }
    Ok(out)
}

/// Bowl-independent part of the regularization: fit nodes on `∂_n(2B)` and
/// the map from their values to the solution at `B̂` lattice offsets.
pub(crate) struct Template {
    /// Offsets of the fit nodes from the bottom.
    sample_offsets: Vec<SpaceTimePoint>,
    /// Integer lattice offsets of the `B̂` nodes.
    hat_offsets: Vec<Vec<i64>>,
    /// `hat_offsets.len() × sample_offsets.len()`.
    solve: DMatrix<f64>,
}

impl Template {
    pub(crate) fn new(lat: &Lattice, opening: f64, degree: u32) -> Result<Self> {
        let dim = lat.dim();
        let big = 2.0 * opening;
        let nodes = chebyshev_ball(dim, 2 * degree as usize + 2);
        let exps = spatial_exponents(dim, degree);
        let pinv = least_squares_operator(&nodes, &exps)?;

        let h: Vec<f64> = (0..=dim).map(|a| lat.spacing(a)).collect();
        let r2 = opening * opening;
        let mut hat_offsets = Vec::new();
        let reach: Vec<i64> = (0..dim).map(|a| (opening / h[a]).ceil() as i64).collect();
        let steps_t = (r2 / h[dim] * (1.0 + 1e-12)).floor() as i64;
        for k in 1..=steps_t {
            let s = k as f64 * h[dim];
            let mut m: Vec<i64> = reach.iter().map(|r| -r).collect();
            loop {
                let y2: f64 = m.iter().zip(&h).map(|(i, hx)| (*i as f64 * hx).powi(2)).sum();
                if y2 < s * (1.0 - 1e-12) {
                    let mut o = m.clone();
                    o.push(k);
                    hat_offsets.push(o);
                }
                let mut a = 0;
                while a < dim {
                    m[a] += 1;
                    if m[a] <= reach[a] {
                        break;
                    }
                    m[a] = -reach[a];
                    a += 1;
                }
                if a == dim {
                    break;
                }
            }
        }

        let one = BigRational::one();
        let mut extension = DMatrix::<f64>::zeros(hat_offsets.len(), exps.len());
        for (j, e) in exps.iter().enumerate() {
            let mut full = e.clone();
            full.push(0);
            let mut p = Polynomial::zero(dim);
            p.add_term(MultiIndex::new(full), one.clone());
            let ext = caloric_extension(&p)?.to_float();
            for (b, o) in hat_offsets.iter().enumerate() {
                let xi: Vec<f64> = (0..dim).map(|a| o[a] as f64 * h[a] / big).collect();
                let tau = o[dim] as f64 * h[dim] / (big * big);
                extension[(b, j)] = ext.eval_split(&xi, tau);
            }
        }
        let solve = extension * pinv;

        let sample_offsets = nodes
            .iter()
            .map(|xi| {
                let y: Vec<f64> = xi.iter().map(|v| big * v).collect();
                let y2 = y.iter().map(|v| v * v).sum();
                SpaceTimePoint::new(y, y2)
            })
            .collect();
        Ok(Template { sample_offsets, hat_offsets, solve })
    }
}

/// The regularization for one bowl as a dense map from the values it reads
/// to the values it writes.
#[derive(Debug, Clone)]
pub(crate) struct BowlOperator {
    pub bowl: CaloricBowl,
    pub reads: Vec<usize>,
    pub writes: Vec<usize>,
    /// Row-major, `writes.len() × reads.len()`.
    pub matrix: Vec<f64>,
}

impl BowlOperator {
    /// `None` when the bowl is not admissible: `2B` leaves `Ω` or an
    /// interpolation stencil reaches a node without a value.
    pub(crate) fn build(
        domain: &DomainSpec,
        kinds: &[NodeKind],
        template: &Template,
        bottom: usize,
        opening: f64,
        order: Interpolation,
    ) -> Result<Option<Self>> {
        let lat = &domain.lattice;
        let z0 = lat.point(bottom);
        let bowl = CaloricBowl::new(z0.clone(), opening)?;
        if !doubled_inside(domain, &bowl)? {
            return Ok(None);
        }
        let base: Vec<i64> = lat.multi(bottom).iter().map(|&v| v as i64).collect();
        let mut writes = Vec::with_capacity(template.hat_offsets.len());
        for o in &template.hat_offsets {
            let m: Vec<i64> = base.iter().zip(o).map(|(a, b)| a + b).collect();
            match lat.index_signed(&m) {
                Some(i) if kinds[i].in_domain() => writes.push(i),
                _ => return Ok(None),
            }
        }
        let mut reads: Vec<usize> = Vec::new();
        let mut weights: Vec<Vec<(usize, f64)>> = Vec::with_capacity(template.sample_offsets.len());
        for off in &template.sample_offsets {
            let p = z0.add(off);
            let st = match stencil(lat, &p, order) {
                Ok(st) => st,
                Err(Error::IncompleteStencil { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let mut row = Vec::with_capacity(st.len());
            for (i, w) in st {
                if !kinds[i].has_value() {
                    return Ok(None);
                }
                let col = match reads.iter().position(|&r| r == i) {
                    Some(c) => c,
                    None => {
                        reads.push(i);
                        reads.len() - 1
                    }
                };
                row.push((col, w));
            }
            weights.push(row);
        }
        let mut matrix = vec![0.0; writes.len() * reads.len()];
        for b in 0..writes.len() {
            let out = &mut matrix[b * reads.len()..(b + 1) * reads.len()];
            for (s, row) in weights.iter().enumerate() {
                let c = template.solve[(b, s)];
                for &(col, w) in row {
                    out[col] += c * w;
                }
            }
        }
        Ok(Some(BowlOperator { bowl, reads, writes, matrix }))
    }

    /// New values for `writes` computed from `values`, optionally clamped to
    /// the range of the values read.
    pub(crate) fn apply(&self, values: &[f64], clamp: bool, out: &mut Vec<f64>) {
        let gathered: Vec<f64> = self.reads.iter().map(|&i| values[i]).collect();
        out.clear();
        let lo = gathered.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = gathered.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for row in self.matrix.chunks_exact(self.reads.len()) {
            let v: f64 = row.iter().zip(&gathered).map(|(a, b)| a * b).sum();
            out.push(if clamp { v.clamp(lo, hi) } else { v });
        }
    }
}
