use anyhow::{bail, Context, Result};
use caloric_core::bowl::{solve_bowl, BoundaryData, BowlSolution, CaloricBowl, SolveOptions, SolveTarget};
use caloric_core::{Error, Expression, SpaceTimePoint};
use clap::Args;
use serde::Serialize;

use crate::output::{verdict, Bundle};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct BowlArgs {
    /// Boundary data as an expression in x1..xN (or x) and t, e.g. "exp(t)*cosh(x)".
    #[arg(long)]
    pub data: String,
    /// Bowl bottom as comma-separated "x1,...,xN,t".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0")]
    pub bottom: Vec<f64>,
    /// Opening r of the bowl {|x - x0|^2 < t - t0 < r^2}.
    #[arg(long, default_value_t = 1.0)]
    pub opening: f64,
    /// Fit at this degree instead of escalating until --tol is met.
    #[arg(long)]
    pub degree: Option<u32>,
    /// Highest degree tried when escalating.
    #[arg(long, default_value_t = 14)]
    pub max_degree: u32,
}

#[derive(Serialize)]
struct Echo<'a> {
    command: &'static str,
    data: &'a str,
    dim: usize,
    bottom: &'a [f64],
    opening: f64,
    target: SolveTarget,
    tolerance: Option<f64>,
}

#[derive(Serialize)]
struct Report<'a> {
    config: Echo<'a>,
    tolerance_met: bool,
    epsilon: f64,
    degree: u32,
    condition: f64,
    snapped: bool,
    solution: String,
    unit_frame: String,
}

pub fn run(args: &BowlArgs, global: &GlobalArgs) -> Result<bool> {
    if args.bottom.len() < 2 {
        bail!("--bottom needs at least one spatial coordinate and a time");
    }
    let dim = args.bottom.len() - 1;
    if let Some(n) = global.dim {
        if n != dim {
            bail!("--dim {n} does not match the {dim}-dimensional bottom");
        }
    }
    let data = Expression::parse(&args.data, dim).with_context(|| format!("parsing data '{}'", args.data))?;
    let bottom = SpaceTimePoint::from_coords(&args.bottom)?;
    let bowl = CaloricBowl::new(bottom, args.opening)?;
    let target = match args.degree {
        Some(d) => SolveTarget::Degree(d),
        None => SolveTarget::Tolerance { epsilon: global.tol.unwrap_or(1e-6), max_degree: args.max_degree },
    };
    let (sol, met) = match solve_bowl(&bowl, &BoundaryData::field(data), &SolveOptions::with_target(target)) {
        Ok(sol) => {
            let met = global.tol.is_none_or(|tol| sol.epsilon <= tol);
            (sol, met)
        }
        Err(Error::ToleranceNotMet { best, .. }) => (*best, false),
        Err(e) => return Err(e.into()),
    };
    print_summary(&sol, met);

    let bundle = Bundle::new(global.out.as_deref())?;
    bundle.text("solution.txt", &format!("{}\n", sol.u))?;
    bundle.with_file("residuals.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        header.extend(["t", "data", "solution", "error"].map(String::from));
        out.write_record(&header)?;
        for r in &sol.residuals {
            let mut row: Vec<String> = r.point.x.iter().map(f64::to_string).collect();
            row.extend([r.point.t, r.data, r.solution, r.error()].map(|v| v.to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    })?;
    bundle.json(
        "report.json",
        &Report {
            config: Echo {
                command: "bowl",
                data: &args.data,
                dim,
                bottom: &args.bottom,
                opening: args.opening,
                target,
                tolerance: global.tol,
            },
            tolerance_met: met,
            epsilon: sol.epsilon,
            degree: sol.degree,
            condition: sol.condition,
            snapped: sol.snapped,
            solution: sol.u.to_string(),
            unit_frame: sol.unit.to_string(),
        },
    )?;
    Ok(met)
}

fn print_summary(sol: &BowlSolution, met: bool) {
    println!("u = {}", sol.u);
    println!("degree {}, condition {:.3e}, snapped {}", sol.degree, sol.condition, sol.snapped);
    println!("{} certified sup error ε = {:.3e}", verdict(met), sol.epsilon);
}
