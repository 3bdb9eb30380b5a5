use anyhow::{Context, Result};
use caloric_core::poly::{apply_heat, parse_polynomial, solve_correction, Polynomial};
use clap::Args;
use serde::Serialize;

use crate::output::{verdict, Bundle};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct ExtendArgs {
    /// Polynomial in x1..xN (or x) and t with rational coefficients, e.g. "3/2*x1^2*t - x2".
    pub polynomial: String,
}

#[derive(Serialize)]
struct Report<'a> {
    config: Echo<'a>,
    p: String,
    q: String,
    u: String,
    heat_vanishes: bool,
    w_divides_difference: bool,
}

#[derive(Serialize)]
struct Echo<'a> {
    command: &'static str,
    polynomial: &'a str,
    dim: usize,
}

pub fn run(args: &ExtendArgs, global: &GlobalArgs) -> Result<bool> {
    let p: Polynomial = match global.dim {
        Some(n) => parse_polynomial(&args.polynomial, n),
        None => args.polynomial.parse(),
    }
    .with_context(|| format!("parsing '{}'", args.polynomial))?;
    let dim = p.dim();
    let q = solve_correction(&p)?;
    let u = &Polynomial::w(dim) * &q + &p;
    let heat_vanishes = apply_heat(&u).is_zero();
    let w_divides_difference = (u.clone() - &p).substitute_paraboloid().is_zero();

    println!("p   = {p}");
    println!("q   = {q}");
    println!("u_p = {u}");
    println!("{} H(u_p) = 0", verdict(heat_vanishes));
    println!("{} w divides u_p - p", verdict(w_divides_difference));

    let bundle = Bundle::new(global.out.as_deref())?;
    bundle.text("extension.txt", &format!("{u}\n"))?;
    bundle.json(
        "report.json",
        &Report {
            config: Echo { command: "extend", polynomial: &args.polynomial, dim },
            p: p.to_string(),
            q: q.to_string(),
            u: u.to_string(),
            heat_vanishes,
            w_divides_difference,
        },
    )?;
    Ok(heat_vanishes && w_divides_difference)
}
