use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calorics::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::field::Field;

/// A regular lattice over a box in `R^{N+1}`; axis `N` is time. Node `i` on
/// axis `a` sits at `lower[a] + i * h[a]`, so the box faces carry nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Lattice {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lower.len() < 2 || lower.len() != upper.len() || lower.len() != counts.len() {
            return Err(Error::InvalidConfig(
                "lattice needs matching lower/upper/counts of length N + 1 >= 2".into(),
            ));
        }
        for a in 0..lower.len() {
            if !(lower[a].is_finite() && upper[a].is_finite() && lower[a] < upper[a]) {
                return Err(Error::InvalidConfig(format!("empty or unbounded extent on axis {a}")));
            }
            if counts[a] < 2 {
                return Err(Error::InvalidConfig(format!("axis {a} needs at least two nodes")));
            }
        }
        Ok(Lattice { lower, upper, counts })
    }

    pub fn dim(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.counts[axis] - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index, axis 0 fastest and time slowest.
    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in (0..self.counts.len()).rev() {
            idx = idx * self.counts[a] + multi[a];
        }
        idx
    }

    pub fn multi(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.counts.len());
        for &n in &self.counts {
            out.push(idx % n);
            idx /= n;
        }
        out
    }

    /// Checked index for possibly out-of-range signed coordinates.
    pub fn index_signed(&self, multi: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for a in (0..self.counts.len()).rev() {
            let i = multi[a];
            if i < 0 || i as usize >= self.counts[a] {
                return None;
            }
            idx = idx * self.counts[a] + i as usize;
        }
        Some(idx)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.counts[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.spacing(axis)
        }
    }

    pub fn point(&self, idx: usize) -> SpaceTimePoint {
        let m = self.multi(idx);
        let n = self.dim();
        SpaceTimePoint::new((0..n).map(|a| self.coord(a, m[a])).collect(), self.coord(n, m[n]))
    }
}

/// A bounded open set `Ω`: the open bounding box, intersected with the union
/// of open boxes (if any) and with `{level_set < 0}` (if given), sampled on a lattice.
#[derive(Clone)]
pub struct DomainSpec {
    pub lattice: Lattice,
    pub boxes: Vec<(Vec<f64>, Vec<f64>)>,
    pub level_set: Option<Arc<dyn Field + Send + Sync>>,
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("lattice", &self.lattice)
            .field("boxes", &self.boxes)
            .field("level_set", &self.level_set.as_ref().map(|_| ".."))
            .finish()
    }
}

fn strictly_inside(z: &SpaceTimePoint, lo: &[f64], hi: &[f64]) -> bool {
    let n = z.dim();
    (0..n).all(|a| lo[a] < z.x[a] && z.x[a] < hi[a]) && lo[n] < z.t && z.t < hi[n]
}

/// Where a lattice node sits relative to `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    /// In `Ω` and relaxed by the sweep.
    Interior,
    /// In `Ω` but covered by no admissible bowl; held at the data.
    Pinned,
    /// Outside `Ω` within two lattice steps of it; carries the data.
    Boundary,
    /// Outside `Ω` and away from it; carries no value.
    Outside,
}

impl NodeKind {
    pub fn in_domain(self) -> bool {
        matches!(self, NodeKind::Interior | NodeKind::Pinned)
    }

    pub fn has_value(self) -> bool {
        self != NodeKind::Outside
    }
}

impl DomainSpec {
    /// The open box itself.
    pub fn rectangle(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        Ok(DomainSpec { lattice: Lattice::new(lower, upper, counts)?, boxes: Vec::new(), level_set: None })
    }

    pub fn with_boxes(mut self, boxes: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let len = self.lattice.counts.len();
        for (lo, hi) in &boxes {
            if lo.len() != len || hi.len() != len {
                return Err(Error::InvalidConfig(format!("boxes need {len} coordinates per corner")));
            }
        }
        self.boxes = boxes;
        Ok(self)
    }

    pub fn with_level_set<F: Field + Send + Sync + 'static>(mut self, f: F) -> Self {
        self.level_set = Some(Arc::new(f));
        self
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn contains(&self, z: &SpaceTimePoint) -> Result<bool> {
        if !strictly_inside(z, &self.lattice.lower, &self.lattice.upper) {
            return Ok(false);
        }
        if !self.boxes.is_empty() && !self.boxes.iter().any(|(lo, hi)| strictly_inside(z, lo, hi)) {
            return Ok(false);
        }
        match &self.level_set {
            Some(f) => Ok(f.eval(z)? < 0.0),
            None => Ok(true),
        }
    }

    /// `Interior` for nodes in `Ω`, `Boundary`/`Outside` for the rest.
    pub fn classify(&self) -> Result<Vec<NodeKind>> {
        let lat = &self.lattice;
        let mut inside = Vec::with_capacity(lat.len());
        for idx in 0..lat.len() {
            inside.push(self.contains(&lat.point(idx))?);
        }
        let axes = lat.counts.len();
        let mut kinds = vec![NodeKind::Outside; lat.len()];
        for idx in 0..lat.len() {
            if inside[idx] {
                kinds[idx] = NodeKind::Interior;
                continue;
            }
            let m: Vec<i64> = lat.multi(idx).iter().map(|&v| v as i64).collect();
            let mut offset = vec![-2i64; axes];
            'scan: loop {
                let probe: Vec<i64> = m.iter().zip(&offset).map(|(a, b)| a + b).collect();
                if let Some(j) = lat.index_signed(&probe) {
                    if inside[j] {
                        kinds[idx] = NodeKind::Boundary;
                        break 'scan;
                    }
                }
                let mut a = 0;
                loop {
                    if a == axes {
                        break 'scan;
                    }
                    offset[a] += 1;
                    if offset[a] <= 2 {
                        break;
                    }
                    offset[a] = -2;
                    a += 1;
                }
            }
        }
        Ok(kinds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_indexing_round_trips() {
        let lat = Lattice::new(vec![-1.0, 0.0], vec![1.0, 1.0], vec![5, 3]).unwrap();
        assert_eq!(lat.len(), 15);
        for idx in 0..lat.len() {
            assert_eq!(lat.index(&lat.multi(idx)), idx);
        }
        assert_eq!(lat.point(lat.index(&[4, 2])), SpaceTimePoint::new(vec![1.0], 1.0));
        assert_eq!(lat.point(lat.index(&[1, 1])), SpaceTimePoint::new(vec![-0.5], 0.5));
        assert_eq!(lat.index_signed(&[-1, 0]), None);
        assert!(Lattice::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![1, 4]).is_err());
    }

    #[test]
    fn rectangle_classification() {
        let d = DomainSpec::rectangle(vec![-1.0, 0.0], vec![1.0, 1.0], vec![5, 5]).unwrap();
        let kinds = d.classify().unwrap();
        let lat = &d.lattice;
        for idx in 0..lat.len() {
            let m = lat.multi(idx);
            let edge = m[0] == 0 || m[0] == 4 || m[1] == 0 || m[1] == 4;
            assert_eq!(kinds[idx], if edge { NodeKind::Boundary } else { NodeKind::Interior });
        }
    }

    #[test]
    fn boxes_and_level_sets() {
        let d = DomainSpec::rectangle(vec![-1.0, 0.0], vec![1.0, 1.0], vec![9, 9])
            .unwrap()
            .with_boxes(vec![(vec![-1.0, 0.0], vec![0.0, 1.0])])
            .unwrap();
        assert!(d.contains(&SpaceTimePoint::new(vec![-0.5], 0.5)).unwrap());
        assert!(!d.contains(&SpaceTimePoint::new(vec![0.5], 0.5)).unwrap());
        let kinds = d.classify().unwrap();
        assert!(kinds.contains(&NodeKind::Outside));
        let disk = DomainSpec::rectangle(vec![-1.0, -1.0], vec![1.0, 1.0], vec![9, 9])
            .unwrap()
            .with_level_set(|z: &SpaceTimePoint| z.x[0] * z.x[0] + z.t * z.t - 0.5);
        assert!(disk.contains(&SpaceTimePoint::new(vec![0.0], 0.0)).unwrap());
        assert!(!disk.contains(&SpaceTimePoint::new(vec![0.7], 0.7)).unwrap());
    }
}
