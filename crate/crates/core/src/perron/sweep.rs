use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{DomainSpec, NodeKind};
use super::grid::{GridFunction, Interpolation};
use super::regularize::{BowlOperator, Template};
use crate::error::{Error, Result};
use crate::field::{Field, Negated};

/// Order in which bowls are regularized within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Bottoms in lexicographic order, time slowest.
    #[default]
    Sequential,
    /// Bowls grouped into batches with pairwise disjoint footprints, batches
    /// run in order and each batch in parallel.
    Parallel,
    /// The parallel schedule run on one thread.
    Batched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Bowl opening `r` in the units of the domain.
    pub opening: f64,
    /// Degree of the boundary fit on each doubled bowl.
    pub degree: u32,
    pub interpolation: Interpolation,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub mode: SweepMode,
    /// Clamp each bowl update to the range of the values it reads.
    pub clamp: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            opening: 0.3,
            degree: 8,
            interpolation: Interpolation::Multilinear,
            tolerance: 1e-6,
            max_sweeps: 500,
            mode: SweepMode::Sequential,
            clamp: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        let lat = &domain.lattice;
        let n = lat.dim();
        if !(self.opening > 0.0 && self.opening.is_finite()) {
            return Err(Error::InvalidConfig(format!("opening must be positive, got {}", self.opening)));
        }
        for a in 0..n {
            if self.opening < 3.0 * lat.spacing(a) * (1.0 - 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "opening {} spans fewer than 3 steps of {} on axis {a}",
                    self.opening,
                    lat.spacing(a)
                )));
            }
        }
        if self.opening * self.opening < 3.0 * lat.spacing(n) * (1.0 - 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "bowl height {} spans fewer than 3 time steps of {}",
                self.opening * self.opening,
                lat.spacing(n)
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        if self.degree > 24 {
            return Err(Error::InvalidConfig(format!("fit degree {} is above 24", self.degree)));
        }
        Ok(())
    }
}

/// Admissible bowls and node roles for a domain and configuration; independent of the data.
pub struct SweepPlan {
    pub domain: DomainSpec,
    pub config: SweepConfig,
    pub kinds: Vec<NodeKind>,
    operators: Vec<BowlOperator>,
    batches: Vec<Vec<usize>>,
}

impl std::fmt::Debug for SweepPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SweepPlan")
            .field("bowls", &self.operators.len())
            .field("batches", &self.batches.len())
            .finish_non_exhaustive()
    }
}

impl SweepPlan {
    pub fn new(domain: &DomainSpec, config: &SweepConfig) -> Result<Self> {
        config.validate(domain)?;
        let mut kinds = domain.classify()?;
        let template = Template::new(&domain.lattice, config.opening, config.degree)?;
        let candidates: Vec<usize> = (0..kinds.len()).filter(|&i| kinds[i] == NodeKind::Interior).collect();
        let built: Vec<Option<BowlOperator>> = candidates
            .par_iter()
            .map(|&i| BowlOperator::build(domain, &kinds, &template, i, config.opening, config.interpolation))
            .collect::<Result<_>>()?;
        let operators: Vec<BowlOperator> = built.into_iter().flatten().collect();
        if operators.is_empty() {
            return Err(Error::NoInteriorBowls { opening: config.opening });
        }
        let mut covered = vec![false; kinds.len()];
        for op in &operators {
            for &w in &op.writes {
                covered[w] = true;
            }
        }
        for (k, c) in kinds.iter_mut().zip(&covered) {
            if *k == NodeKind::Interior && !c {
                *k = NodeKind::Pinned;
            }
        }
        let batches = batch(&operators, kinds.len());
        Ok(SweepPlan { domain: domain.clone(), config: config.clone(), kinds, operators, batches })
    }

    pub fn bowl_count(&self) -> usize {
        self.operators.len()
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.kinds.iter().filter(|k| **k == kind).count()
    }

    pub fn bowls(&self) -> impl Iterator<Item = &crate::bowl::CaloricBowl> {
        self.operators.iter().map(|op| &op.bowl)
    }
}

/// Greedy partition into batches of bowls whose read and write sets are
/// pairwise disjoint, picking in schedule order.
fn batch(ops: &[BowlOperator], nodes: usize) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..ops.len()).collect();
    let mut batches = Vec::new();
    let mut used = vec![false; nodes];
    while !remaining.is_empty() {
        used.iter_mut().for_each(|u| *u = false);
        let mut current = Vec::new();
        let mut rest = Vec::new();
        for &b in &remaining {
            let op = &ops[b];
            let free = op.reads.iter().chain(&op.writes).all(|&i| !used[i]);
            if free {
                op.reads.iter().chain(&op.writes).for_each(|&i| used[i] = true);
                current.push(b);
            } else {
                rest.push(b);
            }
        }
        batches.push(current);
        remaining = rest;
    }
    batches
}

/// Largest update and largest increase over one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub max_update: f64,
    pub max_increase: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpperSolution {
    pub grid: GridFunction,
    pub sweeps: usize,
    pub converged: bool,
    pub trace: Vec<SweepRecord>,
    /// Min and max of the data over boundary and pinned nodes.
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

impl UpperSolution {
    pub fn final_update(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.max_update)
    }

    /// Largest increase of any node across any sweep; the descent is monotone up to this.
    pub fn max_increase(&self) -> f64 {
        self.trace.iter().map(|r| r.max_increase).fold(0.0, f64::max)
    }
}

/// `φ` at boundary and pinned nodes, and the constant `M` (or `init`) elsewhere in `Ω`.
fn initial_grid<F: Field + ?Sized>(plan: &SweepPlan, phi: &F, init: Option<&GridFunction>) -> Result<(GridFunction, f64, f64)> {
    let lat = &plan.domain.lattice;
    let mut values = vec![f64::NAN; lat.len()];
    let (mut m, mut big_m) = (f64::INFINITY, f64::NEG_INFINITY);
    for (idx, kind) in plan.kinds.iter().enumerate() {
        if matches!(kind, NodeKind::Boundary | NodeKind::Pinned) {
            let z = lat.point(idx);
            let v = phi.eval(&z)?;
            if !v.is_finite() {
                return Err(Error::Evaluation { point: z.to_string(), message: format!("boundary value {v}") });
            }
            values[idx] = v;
            m = m.min(v);
            big_m = big_m.max(v);
        }
    }
    if let Some(g) = init {
        if g.lattice != *lat {
            return Err(Error::InvalidArgument("initial grid lives on a different lattice".into()));
        }
    }
    for (idx, kind) in plan.kinds.iter().enumerate() {
        if *kind == NodeKind::Interior {
            values[idx] = match init {
                Some(g) if g.values[idx].is_finite() => g.values[idx],
                Some(_) => return Err(Error::InvalidArgument(format!("initial value missing at node {idx}"))),
                None => big_m,
            };
        }
    }
    Ok((GridFunction { lattice: lat.clone(), values, kinds: plan.kinds.clone() }, m, big_m))
}

/// Upper Perron solution: start from `M` and regularize over the bowl schedule
/// until no node moves by more than the tolerance.
pub fn perron_upper<F: Field + ?Sized>(domain: &DomainSpec, phi: &F, config: &SweepConfig) -> Result<UpperSolution> {
    let plan = SweepPlan::new(domain, config)?;
    perron_upper_planned(&plan, phi, None)
}

/// As [`perron_upper`] on a prepared plan, optionally starting from `init`
/// instead of the constant `M` (boundary and pinned nodes are reset to `φ`).
pub fn perron_upper_planned<F: Field + ?Sized>(
    plan: &SweepPlan,
    phi: &F,
    init: Option<&GridFunction>,
) -> Result<UpperSolution> {
    let config = &plan.config;
    let (mut grid, m, big_m) = initial_grid(plan, phi, init)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut previous = grid.values.clone();
    let mut buffer = Vec::new();
    for sweep in 1..=config.max_sweeps {
        match config.mode {
            SweepMode::Sequential => {
                for op in &plan.operators {
                    op.apply(&grid.values, config.clamp, &mut buffer);
                    for (&i, &v) in op.writes.iter().zip(&buffer) {
                        grid.values[i] = v;
                    }
                }
            }
            SweepMode::Batched | SweepMode::Parallel => {
                for b in &plan.batches {
                    let updates: Vec<Vec<f64>> = if config.mode == SweepMode::Parallel {
                        b.par_iter()
                            .map(|&k| {
                                let mut out = Vec::new();
                                plan.operators[k].apply(&grid.values, config.clamp, &mut out);
                                out
                            })
                            .collect()
                    } else {
                        b.iter()
                            .map(|&k| {
                                let mut out = Vec::new();
                                plan.operators[k].apply(&grid.values, config.clamp, &mut out);
                                out
                            })
                            .collect()
                    };
                    for (&k, vals) in b.iter().zip(&updates) {
                        for (&i, &v) in plan.operators[k].writes.iter().zip(vals) {
                            grid.values[i] = v;
                        }
                    }
                }
            }
        }
        let (mut max_update, mut max_increase) = (0.0f64, 0.0f64);
        for (i, kind) in plan.kinds.iter().enumerate() {
            if *kind == NodeKind::Interior {
                let d = grid.values[i] - previous[i];
                max_update = max_update.max(d.abs());
                max_increase = max_increase.max(d);
            }
        }
        previous.copy_from_slice(&grid.values);
        trace.push(SweepRecord { sweep, max_update, max_increase });
        let settled = max_update <= 1e-3 * config.tolerance || remaining_error(&trace) < 0.25 * config.tolerance;
        if max_update < config.tolerance && settled {
            converged = true;
            break;
        }
    }
    Ok(UpperSolution { grid, sweeps: trace.len(), converged, trace, m, big_m })
}

/// Distance to the fixed point extrapolated from the last updates, treating
/// the sweep as a linear contraction: `δ_k ρ / (1 - ρ)` with `ρ` the largest
/// of the last three update ratios.
fn remaining_error(trace: &[SweepRecord]) -> f64 {
    let last = match trace.last() {
        Some(r) => r.max_update,
        None => return f64::INFINITY,
    };
    if last == 0.0 {
        return 0.0;
    }
    if trace.len() < 4 {
        return f64::INFINITY;
    }
    let rho = trace
        .windows(2)
        .rev()
        .take(3)
        .map(|w| if w[0].max_update > 0.0 { w[1].max_update / w[0].max_update } else { 1.0 })
        .fold(0.0, f64::max);
    if rho >= 1.0 {
        f64::INFINITY
    } else {
        last * rho / (1.0 - rho)
    }
}

/// Upper and lower solutions with the checks relating them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerronReport {
    pub config: SweepConfig,
    pub upper: GridFunction,
    pub lower: GridFunction,
    /// `upper - lower` at nodes in `Ω`, NaN elsewhere.
    pub gap: Vec<f64>,
    pub max_gap: f64,
    pub min_gap: f64,
    pub upper_sweeps: usize,
    pub lower_sweeps: usize,
    pub converged: bool,
    /// Largest final-sweep update of the two runs.
    pub final_update: f64,
    /// Largest increase seen in either descent.
    pub max_increase: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    /// Whether `m - tol <= lower <= upper + tol <= M + tol` at every node in `Ω`.
    pub sandwich: bool,
    pub bowls: usize,
    pub interior_nodes: usize,
    pub pinned_nodes: usize,
    pub upper_trace: Vec<SweepRecord>,
    pub lower_trace: Vec<SweepRecord>,
}

/// Upper solution for `φ`, lower solution as `-upper(-φ)`, and their gap.
pub fn perron_solve<F: Field + ?Sized>(domain: &DomainSpec, phi: &F, config: &SweepConfig) -> Result<PerronReport> {
    let plan = SweepPlan::new(domain, config)?;
    let upper = perron_upper_planned(&plan, phi, None)?;
    let neg = perron_upper_planned(&plan, &Negated(phi), None)?;
    let lower = neg.grid.negated();
    let tol = config.tolerance;
    let (m, big_m) = (upper.m, upper.big_m);
    let mut gap = vec![f64::NAN; plan.kinds.len()];
    let (mut max_gap, mut min_gap) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut sandwich = true;
    for (i, kind) in plan.kinds.iter().enumerate() {
        if kind.in_domain() {
            let (lo, hi) = (lower.values[i], upper.grid.values[i]);
            gap[i] = hi - lo;
            max_gap = max_gap.max(gap[i]);
            min_gap = min_gap.min(gap[i]);
            sandwich &= m - tol <= lo && lo <= hi + tol && hi <= big_m + tol;
        }
    }
    Ok(PerronReport {
        config: config.clone(),
        gap,
        max_gap,
        min_gap,
        upper_sweeps: upper.sweeps,
        lower_sweeps: neg.sweeps,
        converged: upper.converged && neg.converged,
        final_update: upper.final_update().max(neg.final_update()),
        max_increase: upper.max_increase().max(neg.max_increase()),
        m,
        big_m,
        sandwich,
        bowls: plan.bowl_count(),
        interior_nodes: plan.count(NodeKind::Interior),
        pinned_nodes: plan.count(NodeKind::Pinned),
        upper_trace: upper.trace,
        lower_trace: neg.trace,
        upper: upper.grid,
        lower,
    })
}
