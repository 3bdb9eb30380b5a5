use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use caloric_core::perron::{perron_solve, PerronReport, SweepRecord};
use clap::Args;
use serde::Serialize;

use crate::config::PerronConfig;
use crate::output::{verdict, Bundle};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct PerronArgs {
    /// TOML config; see the schema in the README.
    pub config: PathBuf,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a PerronConfig,
    converged: bool,
    sandwich: bool,
    upper_sweeps: usize,
    lower_sweeps: usize,
    final_update: f64,
    max_increase: f64,
    max_gap: f64,
    min_gap: f64,
    #[serde(rename = "m")]
    min_data: f64,
    #[serde(rename = "M")]
    max_data: f64,
    bowls: usize,
    interior_nodes: usize,
    pinned_nodes: usize,
}

pub fn run(args: &PerronArgs, global: &GlobalArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = PerronConfig::from_toml(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if let Some(tol) = global.tol {
        config.sweep.tolerance = tol;
    }
    let dim = config.dim()?;
    if let Some(n) = global.dim {
        if n != dim {
            bail!("--dim {n} does not match the {dim}-dimensional domain");
        }
    }
    let domain = config.domain_spec()?;
    let data = config.data()?;
    let report = perron_solve(&domain, &data, &config.sweep)?;
    let ok = report.converged && report.sandwich;

    println!(
        "{} {} interior and {} pinned nodes, {} bowls",
        verdict(ok),
        report.interior_nodes,
        report.pinned_nodes,
        report.bowls
    );
    println!(
        "sweeps {} upper / {} lower, final update {:.3e} (tolerance {:.1e}), converged {}",
        report.upper_sweeps, report.lower_sweeps, report.final_update, config.sweep.tolerance, report.converged
    );
    println!(
        "gap in [{:.3e}, {:.3e}], data range [{}, {}], sandwich {}",
        report.min_gap, report.max_gap, report.m, report.big_m, report.sandwich
    );

    write_artifacts(&Bundle::new(global.out.as_deref())?, &config, &report)?;
    Ok(ok)
}

fn write_artifacts(bundle: &Bundle, config: &PerronConfig, report: &PerronReport) -> Result<()> {
    bundle.json(
        "report.json",
        &Summary {
            config,
            converged: report.converged,
            sandwich: report.sandwich,
            upper_sweeps: report.upper_sweeps,
            lower_sweeps: report.lower_sweeps,
            final_update: report.final_update,
            max_increase: report.max_increase,
            max_gap: report.max_gap,
            min_gap: report.min_gap,
            min_data: report.m,
            max_data: report.big_m,
            bowls: report.bowls,
            interior_nodes: report.interior_nodes,
            pinned_nodes: report.pinned_nodes,
        },
    )?;
    bundle.with_file("upper.csv", |w| Ok(report.upper.write_csv(w)?))?;
    bundle.with_file("lower.csv", |w| Ok(report.lower.write_csv(w)?))?;

    #[derive(Serialize)]
    struct TraceRow {
        solution: &'static str,
        sweep: usize,
        max_update: f64,
        max_increase: f64,
    }
    let row = |solution, r: &SweepRecord| TraceRow {
        solution,
        sweep: r.sweep,
        max_update: r.max_update,
        max_increase: r.max_increase,
    };
    let rows: Vec<TraceRow> = report
        .upper_trace
        .iter()
        .map(|r| row("upper", r))
        .chain(report.lower_trace.iter().map(|r| row("lower", r)))
        .collect();
    bundle.csv("trace.csv", &rows)
}
