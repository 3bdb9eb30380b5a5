use serde::{Deserialize, Serialize};

use super::domain::{DomainSpec, Lattice, NodeKind};
use crate::calorics::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::field::Field;

/// Interpolation used to read lattice values off the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    #[default]
    Multilinear,
    Quadratic,
}

const SNAP: f64 = 1e-10;
const MAX_FAST_AXES: usize = 4;

/// One-axis stencil at fractional lattice coordinate `f`: `(node, weight)`
/// pairs with zero weights dropped. Quadratic stencils are shifted inward to
/// stay on `0..n`.
pub(crate) fn axis_stencil(f: f64, n: usize, order: Interpolation) -> Option<Vec<(i64, f64)>> {
    axis_weights(f, n, order).map(|(w, len)| w[..len].to_vec())
}

fn axis_weights(f: f64, n: usize, order: Interpolation) -> Option<([(i64, f64); 3], usize)> {
    let last = (n - 1) as f64;
    if !(f >= -SNAP && f <= last + SNAP) {
        return None;
    }
    let mut w = [(0i64, 0.0f64); 3];
    let near = f.round();
    if (f - near).abs() < SNAP {
        w[0] = (near as i64, 1.0);
        return Some((w, 1));
    }
    match order {
        Interpolation::Quadratic if n >= 3 => {
            let c = (near as i64).clamp(1, n as i64 - 2);
            let s = f - c as f64;
            w = [(c - 1, 0.5 * s * (s - 1.0)), (c, 1.0 - s * s), (c + 1, 0.5 * s * (s + 1.0))];
            Some((w, 3))
        }
        _ => {
            let i = (f.floor() as i64).clamp(0, n as i64 - 2);
            let s = f - i as f64;
            w[0] = (i, 1.0 - s);
            w[1] = (i + 1, s);
            Some((w, 2))
        }
    }
}

/// Tensor stencil of `z`: linear node indices and weights. Points off the
/// lattice report the nearest nodes as the offending ones.
pub(crate) fn stencil(lat: &Lattice, z: &SpaceTimePoint, order: Interpolation) -> Result<Vec<(usize, f64)>> {
    let coords = z.coords();
    let mut axes = Vec::with_capacity(coords.len());
    for (a, &c) in coords.iter().enumerate() {
        let f = (c - lat.lower[a]) / lat.spacing(a);
        match axis_stencil(f, lat.counts[a], order) {
            Some(s) => axes.push(s),
            None => {
                let nearest: Vec<usize> = coords
                    .iter()
                    .enumerate()
                    .map(|(b, &v)| {
                        let f = ((v - lat.lower[b]) / lat.spacing(b)).round();
                        f.clamp(0.0, (lat.counts[b] - 1) as f64) as usize
                    })
                    .collect();
                return Err(Error::IncompleteStencil { nodes: vec![nearest] });
            }
        }
    }
    let mut out = vec![(Vec::<i64>::new(), 1.0)];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|(m, w)| {
                axis.iter().map(move |&(i, v)| {
                    let mut m = m.clone();
                    m.push(i);
                    (m, w * v)
                })
            })
            .collect();
    }
    Ok(out
        .into_iter()
        .map(|(m, w)| (lat.index_signed(&m).expect("stencil on lattice"), w))
        .collect())
}

/// Values on the lattice of a domain, with each node's kind. `Outside` nodes hold NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub lattice: Lattice,
    pub values: Vec<f64>,
    pub kinds: Vec<NodeKind>,
}

impl GridFunction {
    /// Samples `f` at every node that carries a value.
    pub fn from_field<F: Field + ?Sized>(domain: &DomainSpec, f: &F) -> Result<Self> {
        let kinds = domain.classify()?;
        let lattice = domain.lattice.clone();
        let mut values = vec![f64::NAN; lattice.len()];
        for (idx, kind) in kinds.iter().enumerate() {
            if kind.has_value() {
                let z = lattice.point(idx);
                let v = f.eval(&z)?;
                if !v.is_finite() {
                    return Err(Error::Evaluation { point: z.to_string(), message: format!("value {v}") });
                }
                values[idx] = v;
            }
        }
        Ok(GridFunction { lattice, values, kinds })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, idx: usize) -> SpaceTimePoint {
        self.lattice.point(idx)
    }

    pub fn interpolate(&self, z: &SpaceTimePoint, order: Interpolation) -> Result<f64> {
        if z.dim() != self.lattice.dim() {
            return Err(Error::DimensionMismatch { expected: self.lattice.dim(), got: z.dim() });
        }
        if z.dim() < MAX_FAST_AXES {
            let mut coords = [0.0; MAX_FAST_AXES];
            coords[..z.dim()].copy_from_slice(&z.x);
            coords[z.dim()] = z.t;
            if let Some(v) = self.interpolate_fast(&coords[..=z.dim()], order) {
                return Ok(v);
            }
        }
        let st = stencil(&self.lattice, z, order)?;
        let missing: Vec<Vec<usize>> = st
            .iter()
            .filter(|(i, _)| self.values[*i].is_nan())
            .map(|(i, _)| self.lattice.multi(*i))
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteStencil { nodes: missing });
        }
        Ok(st.iter().map(|(i, w)| w * self.values[*i]).sum())
    }

    /// Allocation-free interpolation at `(x, t)` packed in one slice; `None`
    /// when the stencil is incomplete, so the caller can build the error.
    pub(crate) fn interpolate_fast(&self, coords: &[f64], order: Interpolation) -> Option<f64> {
        let lat = &self.lattice;
        let axes = coords.len();
        if axes > MAX_FAST_AXES {
            return None;
        }
        let mut st = [([(0i64, 0.0f64); 3], 0usize); MAX_FAST_AXES];
        let mut stride = [0usize; MAX_FAST_AXES];
        let mut acc = 1;
        for a in 0..axes {
            let f = (coords[a] - lat.lower[a]) / lat.spacing(a);
            st[a] = axis_weights(f, lat.counts[a], order)?;
            stride[a] = acc;
            acc *= lat.counts[a];
        }
        let mut counter = [0usize; MAX_FAST_AXES];
        let mut sum = 0.0;
        loop {
            let mut idx = 0usize;
            let mut w = 1.0;
            for a in 0..axes {
                let (i, v) = st[a].0[counter[a]];
                idx += i as usize * stride[a];
                w *= v;
            }
            let value = self.values[idx];
            if value.is_nan() {
                return None;
            }
            sum += w * value;
            let mut a = 0;
            loop {
                if a == axes {
                    return Some(sum);
                }
                counter[a] += 1;
                if counter[a] < st[a].1 {
                    break;
                }
                counter[a] = 0;
                a += 1;
            }
        }
    }

    /// Largest `|self - other|` over nodes in `Ω`.
    pub fn max_difference(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(&self.kinds)
            .filter(|(_, k)| k.in_domain())
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// One row per node that carries a value: coordinates, kind, value.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.lattice.dim();
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend(["t", "kind", "value"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        for idx in 0..self.len() {
            let kind = match self.kinds[idx] {
                NodeKind::Interior => "interior",
                NodeKind::Pinned => "pinned",
                NodeKind::Boundary => "boundary",
                NodeKind::Outside => continue,
            };
            let z = self.point(idx);
            for x in &z.x {
                write!(out, "{x},")?;
            }
            writeln!(out, "{},{kind},{}", z.t, self.values[idx])?;
        }
        Ok(())
    }

    pub fn negated(&self) -> GridFunction {
        GridFunction { values: self.values.iter().map(|v| -v).collect(), ..self.clone() }
    }
}

/// A grid function read through an interpolation.
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub grid: GridFunction,
    pub order: Interpolation,
}

impl Field for Interpolant {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        self.grid.interpolate(z, self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_reproduce_their_order() {
        let d = DomainSpec::rectangle(vec![-1.0, 0.0], vec![1.0, 1.0], vec![11, 21]).unwrap();
        let lin = GridFunction::from_field(&d, &|z: &SpaceTimePoint| 2.0 * z.x[0] - z.t + 0.5 * z.x[0] * z.t).unwrap();
        let quad = GridFunction::from_field(&d, &|z: &SpaceTimePoint| z.x[0] * z.x[0] + 2.0 * z.t + z.t * z.t).unwrap();
        for z in [
            SpaceTimePoint::new(vec![0.13], 0.377),
            SpaceTimePoint::new(vec![-0.99], 0.999),
            SpaceTimePoint::new(vec![1.0], 0.02),
        ] {
            let (x, t) = (z.x[0], z.t);
            let a = lin.interpolate(&z, Interpolation::Multilinear).unwrap();
            assert!((a - (2.0 * x - t + 0.5 * x * t)).abs() < 1e-13);
            let b = quad.interpolate(&z, Interpolation::Quadratic).unwrap();
            assert!((b - (x * x + 2.0 * t + t * t)).abs() < 1e-13);
        }
        assert!(matches!(
            lin.interpolate(&SpaceTimePoint::new(vec![1.2], 0.5), Interpolation::Multilinear),
            Err(Error::IncompleteStencil { .. })
        ));
    }

    #[test]
    fn nodes_are_hit_exactly() {
        assert_eq!(axis_stencil(3.0 + 1e-12, 10, Interpolation::Quadratic), Some(vec![(3, 1.0)]));
        assert_eq!(axis_stencil(9.0, 10, Interpolation::Multilinear), Some(vec![(9, 1.0)]));
        assert_eq!(axis_stencil(-0.5, 10, Interpolation::Multilinear), None);
        let s = axis_stencil(8.7, 10, Interpolation::Quadratic).unwrap();
        assert_eq!(s.iter().map(|p| p.0).collect::<Vec<_>>(), vec![7, 8, 9]);
    }
}
