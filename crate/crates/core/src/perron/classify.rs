use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridFunction, Interpolation};
use crate::calorics::{build_heat_ball_quadrature, heat_ball_section_radius, HeatBallResolution, SpaceTimePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Super,
    Sub,
    Caloric,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub radii: Vec<f64>,
    pub resolution: HeatBallResolution,
    /// Margins within this band count as zero.
    pub band: f64,
    pub interpolation: Interpolation,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            radii: vec![0.025, 0.05, 0.1],
            resolution: HeatBallResolution::default(),
            band: 1e-6,
            interpolation: Interpolation::Quadratic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeVerdict {
    pub node: usize,
    pub point: SpaceTimePoint,
    /// `u(z) - M_r(u)(z)` per radius.
    pub margins: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub radii: Vec<f64>,
    pub band: f64,
    pub verdicts: Vec<NodeVerdict>,
    /// Nodes in `Ω` whose heat balls leave the lattice or meet missing values.
    pub skipped: Vec<usize>,
}

impl Classification {
    pub fn count(&self, verdict: Verdict) -> usize {
        self.verdicts.iter().filter(|v| v.verdict == verdict).count()
    }

    /// The margin of smallest magnitude among nodes with the given verdict;
    /// for `Caloric`, the largest magnitude.
    pub fn worst_margin(&self, verdict: Verdict) -> Option<f64> {
        let mut it = self.verdicts.iter().filter(|v| v.verdict == verdict).flat_map(|v| v.margins.iter().copied());
        match verdict {
            Verdict::Caloric => it.map(f64::abs).reduce(f64::max),
            Verdict::Super => it.reduce(f64::min),
            Verdict::Sub => it.reduce(f64::max),
            Verdict::Neither => it.next(),
        }
    }
}

fn verdict(margins: &[f64], band: f64) -> Verdict {
    let nonneg = margins.iter().all(|&m| m >= -band);
    let nonpos = margins.iter().all(|&m| m <= band);
    match (nonneg, nonpos) {
        (true, true) => Verdict::Caloric,
        (true, false) => Verdict::Super,
        (false, true) => Verdict::Sub,
        (false, false) => Verdict::Neither,
    }
}

/// Signs of `u(z) - M_r(u)(z)` at each node of `Ω`, with `u` read through the
/// grid interpolation.
pub fn classify_supercaloric(u: &GridFunction, options: &ClassifyOptions) -> Result<Classification> {
    if options.radii.is_empty() || options.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be a nonempty list of positive numbers".into()));
    }
    let lat = &u.lattice;
    let n = lat.dim();
    let origin = SpaceTimePoint::origin(n);
    let quads = options
        .radii
        .iter()
        .map(|&r| build_heat_ball_quadrature(&origin, r, &options.resolution))
        .collect::<Result<Vec<_>>>()?;
    let reach: Vec<(f64, f64)> = options
        .radii
        .iter()
        .map(|&r| Ok((heat_ball_section_radius(r / std::f64::consts::E, r, n)?, r)))
        .collect::<Result<_>>()?;

    let nodes: Vec<usize> = (0..u.len()).filter(|&i| u.kinds[i].in_domain()).collect();
    let results: Vec<Result<Option<NodeVerdict>>> = nodes
        .par_iter()
        .map(|&idx| {
            let z = u.point(idx);
            let fits = reach.iter().all(|&(rx, rt)| {
                (0..n).all(|a| z.x[a] - rx >= lat.lower[a] && z.x[a] + rx <= lat.upper[a]) && z.t - rt >= lat.lower[n]
            });
            if !fits {
                return Ok(None);
            }
            let value = u.values[idx];
            let base = z.coords();
            let mut coords = base.clone();
            let mut margins = Vec::with_capacity(quads.len());
            for q in &quads {
                let mut mean = 0.0;
                for node in q.nodes() {
                    for (a, c) in coords.iter_mut().enumerate().take(n) {
                        *c = base[a] + node.offset.x[a];
                    }
                    coords[n] = base[n] + node.offset.t;
                    let v = match u.interpolate_fast(&coords, options.interpolation) {
                        Some(v) => v,
                        None => {
                            let p = SpaceTimePoint::from_coords(&coords)?;
                            match u.interpolate(&p, options.interpolation) {
                                Ok(v) => v,
                                Err(Error::IncompleteStencil { .. }) => return Ok(None),
                                Err(e) => return Err(e),
                            }
                        }
                    };
                    mean += node.mean_weight * v;
                }
                margins.push(value - mean);
            }
            let verdict = verdict(&margins, options.band);
            Ok(Some(NodeVerdict { node: idx, point: z, margins, verdict }))
        })
        .collect();
    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    for (idx, r) in nodes.iter().zip(results) {
        match r? {
            Some(v) => verdicts.push(v),
            None => skipped.push(*idx),
        }
    }
    Ok(Classification { radii: options.radii.clone(), band: options.band, verdicts, skipped })
}
