//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::Instant;

use caloric_core::bowl::{solve_bowl, BoundaryData, CaloricBowl, SolveOptions, SolveTarget};
use caloric_core::calorics::{
    build_heat_ball_quadrature, mean_value, reproduce, CaloricDisk, GaussWeierstrass, HeatBallResolution,
    KernelVariant, ReproductionOptions, SpaceTimePoint,
};
use caloric_core::field::Field;
use caloric_core::perron::{
    classify_supercaloric, perron_solve, ClassifyOptions, DomainSpec, GridFunction, SweepConfig, Verdict,
};
use caloric_core::poly::{apply_heat, caloric_extension, CorrectionSystem, MultiIndex, Polynomial};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pt(x: f64, t: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(vec![x], t)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize, m: u32) -> Polynomial {
    let basis = MultiIndex::graded_basis(dim, m);
    let mut p = Polynomial::zero(dim);
    let terms = rng.gen_range(1..=basis.len().min(10));
    for _ in 0..terms {
        let alpha = basis[rng.gen_range(0..basis.len())].clone();
        p.add_term(alpha, q(rng.gen_range(-50..=50), rng.gen_range(1..=12)));
    }
    p
}

fn exact_extension() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut count = 0;
    for dim in 1..=3 {
        for m in 0..=8 {
            for _ in 0..200 {
                let p = random_polynomial(&mut rng, dim, m);
                let u = caloric_extension(&p).map_err(|e| e.to_string())?;
                check(apply_heat(&u).is_zero(), || format!("H(u_p) != 0 for {p}"))?;
                check((u - &p).substitute_paraboloid().is_zero(), || format!("u_p != p on the paraboloid for {p}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} polynomials"))
}

fn invertibility() -> Outcome {
    let mut sizes = 0;
    for dim in 1..=3 {
        for m in 0..=8 {
            let sys = CorrectionSystem::build(dim, m).map_err(|e| e.to_string())?;
            check(*sys.determinant() != q(0, 1), || format!("singular at N = {dim}, m = {m}"))?;
            sizes = sizes.max(sys.matrix().size());
        }
    }
    let sys = CorrectionSystem::build(1, 2).map_err(|e| e.to_string())?;
    // Columns T(1) = -3, T(x) = -7x, T(t) = x^2 - 4t, T(x^2) = 2t - 13x^2 on the basis (1, x, t, x^2).
    let expected = [[-3, 0, 0, 0], [0, -7, 0, 0], [0, 0, -4, 2], [0, 0, 1, -13]];
    for (i, row) in expected.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            check(*sys.matrix().get(i, j) == q(v, 1), || format!("entry ({i}, {j}) = {}", sys.matrix().get(i, j)))?;
        }
    }
    check(*sys.determinant() == q(1050, 1), || format!("det = {}", sys.determinant()))?;
    Ok(format!("27 systems, largest {sizes}x{sizes}; N = 1, m = 2 det = 1050"))
}

fn boundary_class() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..50 {
        let dim = 1 + k % 3;
        let p = random_polynomial(&mut rng, dim, 6);
        let s = random_polynomial(&mut rng, dim, 4);
        let shifted = p.clone() + &(&Polynomial::w(dim) * &s);
        let a = caloric_extension(&p).map_err(|e| e.to_string())?;
        let b = caloric_extension(&shifted).map_err(|e| e.to_string())?;
        check(a == b, || format!("extensions differ for p = {p}, s = {s}"))?;
    }
    Ok("50 pairs".into())
}

fn comparators() -> Vec<(&'static str, Box<dyn Field + Sync>)> {
    vec![
        ("one", Box::new(|_: &SpaceTimePoint| 1.0)),
        ("x^2 + 2t", Box::new(|z: &SpaceTimePoint| z.x[0] * z.x[0] + 2.0 * z.t)),
        ("x^3 + 6xt", Box::new(|z: &SpaceTimePoint| z.x[0].powi(3) + 6.0 * z.x[0] * z.t)),
        ("e^t cosh x", Box::new(|z: &SpaceTimePoint| z.t.exp() * z.x[0].cosh())),
        ("gw", Box::new(GaussWeierstrass { pole: pt(0.3, -4.0) })),
    ]
}

fn mean_value_identity() -> Outcome {
    let res = HeatBallResolution::default();
    let one = |_: &SpaceTimePoint| 1.0;
    let (mut worst, mut worst_norm) = (0.0f64, 0.0f64);
    for r in [0.1, 0.5, 1.0] {
        let base = build_heat_ball_quadrature(&SpaceTimePoint::origin(1), r, &res).map_err(|e| e.to_string())?;
        for x in [-0.5, 0.0, 0.7] {
            for t in [-0.3, 0.0, 0.4] {
                let pole = pt(x, t);
                let quad = base.recentered(&pole);
                let norm = (mean_value(&one, &pole, r, &quad).map_err(|e| e.to_string())? - 1.0).abs();
                check(norm <= 1e-8, || format!("|M_r(1) - 1| = {norm:e} at {pole}, r = {r}"))?;
                worst_norm = worst_norm.max(norm);
                for (name, u) in comparators() {
                    let m = mean_value(u.as_ref(), &pole, r, &quad).map_err(|e| e.to_string())?;
                    let err = (m - u.eval(&pole).map_err(|e| e.to_string())?).abs();
                    check(err <= 1e-6, || format!("{name} at {pole}, r = {r}: error {err:e}"))?;
                    worst = worst.max(err);
                }
            }
        }
    }
    Ok(format!("max error {worst:.2e}, max normalization error {worst_norm:.2e}"))
}

fn reproduction_identity() -> Outcome {
    let disk = CaloricDisk::new(pt(0.0, 0.0), 0.5).map_err(|e| e.to_string())?;
    let derived = ReproductionOptions::default();
    let printed = ReproductionOptions { variant: KernelVariant::Printed, ..Default::default() };
    let points = [pt(0.0, 0.0), pt(0.2, 0.0), pt(-0.2, 0.0), pt(0.0, 0.04), pt(0.0, -0.04)];
    let (mut worst, mut printed_worst) = (0.0f64, 0.0f64);
    for (name, u) in comparators() {
        for z in &points {
            let exact = u.eval(z).map_err(|e| e.to_string())?;
            let got = reproduce(u.as_ref(), z, &disk, &derived).map_err(|e| e.to_string())?;
            let err = (got.value - exact).abs();
            check(err <= 1e-6, || format!("{name} at {z}: error {err:e}"))?;
            worst = worst.max(err);
            let got = reproduce(u.as_ref(), z, &disk, &printed).map_err(|e| e.to_string())?;
            printed_worst = printed_worst.max((got.value - exact).abs() / exact.abs().max(1.0));
        }
    }
    Ok(format!("max error {worst:.2e}; printed-kernel max relative residual {printed_worst:.2e} (reported)"))
}

fn bowl_certificate() -> Outcome {
    let bowl = CaloricBowl::new(pt(0.0, 0.0), 1.0).map_err(|e| e.to_string())?;
    let samples: Vec<SpaceTimePoint> = bowl.interior_samples(4, 5);
    check(samples.len() >= 20, || format!("only {} samples", samples.len()))?;
    let samples = &samples[..20];
    let cases: [(&str, fn(&SpaceTimePoint) -> f64); 2] =
        [("x^2 + 2t", |z| z.x[0] * z.x[0] + 2.0 * z.t), ("e^t cosh x", |z| z.t.exp() * z.x[0].cosh())];
    let target = SolveTarget::Tolerance { epsilon: 1e-3, max_degree: 10 };
    let mut report = Vec::new();
    for (name, f) in cases {
        let sol = solve_bowl(&bowl, &BoundaryData::field(f), &SolveOptions::with_target(target))
            .map_err(|e| format!("{name}: {e}"))?;
        for z in samples {
            let err = (sol.eval(z) - f(z)).abs();
            check(err <= sol.epsilon, || format!("{name} at {z}: error {err:e} > ε = {:e}", sol.epsilon))?;
        }
        check(sol.epsilon <= 1e-3 && sol.degree <= 10, || format!("{name}: ε = {:e} at degree {}", sol.epsilon, sol.degree))?;
        report.push(format!("{name}: ε = {:.2e} at degree {}", sol.epsilon, sol.degree));
    }
    Ok(report.join("; "))
}

fn positivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let bowl = CaloricBowl::new(pt(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rng.gen_range(0.3..1.5))
            .map_err(|e| e.to_string())?;
        let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        let (k, s) = (rng.gen_range(0.0..1.0), rng.gen_range(1.0..5.0));
        let phi = move |z: &SpaceTimePoint| b * (z.x[0] - a).abs() + c * (z.x[0] - a).powi(2) + k * (-s * z.t * z.t).exp();
        let sol = solve_bowl(&bowl, &BoundaryData::field(phi), &SolveOptions::with_target(SolveTarget::Degree(8)))
            .map_err(|e| e.to_string())?;
        for z in bowl.interior_samples(8, 11) {
            let v = sol.eval(&z);
            check(v >= -sol.epsilon, || format!("u = {v:e} < -ε = {:e} at {z}", -sol.epsilon))?;
            worst = worst.min(v + sol.epsilon);
        }
    }
    Ok(format!("50 fits, min (u + ε) = {worst:.2e}"))
}

fn classifier() -> Outcome {
    let domain = DomainSpec::rectangle(vec![-1.0, 0.0], vec![1.0, 1.0], vec![21, 21]).map_err(|e| e.to_string())?;
    let options = ClassifyOptions::default();
    let cases: [(&str, fn(&SpaceTimePoint) -> f64, Verdict); 3] = [
        ("t", |z| z.t, Verdict::Super),
        ("x^2", |z| z.x[0] * z.x[0], Verdict::Sub),
        ("x^2 + 2t", |z| z.x[0] * z.x[0] + 2.0 * z.t, Verdict::Caloric),
    ];
    let mut report = Vec::new();
    for (name, f, want) in cases {
        let grid = GridFunction::from_field(&domain, &f).map_err(|e| e.to_string())?;
        let c = classify_supercaloric(&grid, &options).map_err(|e| e.to_string())?;
        check(!c.verdicts.is_empty(), || format!("{name}: no testable nodes"))?;
        for v in &c.verdicts {
            check(v.verdict == want, || format!("{name} at {}: {:?} with margins {:?}", v.point, v.verdict, v.margins))?;
        }
        let worst = c.worst_margin(want).unwrap_or(f64::NAN);
        report.push(format!("{name}: {} nodes {want:?} (worst margin {worst:.1e})", c.verdicts.len()));
    }
    Ok(report.join("; "))
}

fn rectangle41() -> Result<DomainSpec, String> {
    DomainSpec::rectangle(vec![-1.0, 0.0], vec![1.0, 1.0], vec![41, 41]).map_err(|e| e.to_string())
}

fn perron_convergence() -> Outcome {
    let domain = rectangle41()?;
    let config = SweepConfig::default();
    let tol = config.tolerance;
    let mut report = Vec::new();
    let cases: [(&str, fn(&SpaceTimePoint) -> f64); 2] =
        [("x^2 + 2t", |z| z.x[0] * z.x[0] + 2.0 * z.t), ("e^t cosh x", |z| z.t.exp() * z.x[0].cosh())];
    for (name, f) in cases {
        let r = perron_solve(&domain, &f, &config).map_err(|e| format!("{name}: {e}"))?;
        check(r.converged && r.upper_sweeps <= 500 && r.lower_sweeps <= 500, || {
            format!("{name}: sweeps {} / {}", r.upper_sweeps, r.lower_sweeps)
        })?;
        check(r.final_update < tol, || format!("{name}: final update {:e}", r.final_update))?;
        let mut err = 0.0f64;
        for i in 0..r.upper.len() {
            if r.upper.kinds[i].in_domain() {
                let exact = f(&r.upper.point(i));
                err = err.max((r.upper.values[i] - exact).abs()).max((r.lower.values[i] - exact).abs());
                let (lo, hi) = (r.lower.values[i], r.upper.values[i]);
                check(r.m - tol <= lo && lo <= hi + tol && hi <= r.big_m + tol, || {
                    format!("{name}: sandwich fails at {}: {lo} {hi}", r.upper.point(i))
                })?;
            }
        }
        check(err <= 5e-2, || format!("{name}: interior error {err:e}"))?;
        let gap = r.max_gap.abs().max(r.min_gap.abs());
        check(gap <= 2.0 * tol, || format!("{name}: gap {gap:e}"))?;
        report.push(format!("{name}: {}+{} sweeps, error {err:.2e}, gap {gap:.1e}", r.upper_sweeps, r.lower_sweeps));
    }
    Ok(report.join("; "))
}

fn determinism() -> Outcome {
    let domain = rectangle41()?;
    let f = |z: &SpaceTimePoint| z.t.exp() * z.x[0].cosh();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let r = perron_solve(&domain, &f, &SweepConfig::default()).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        r.upper.write_csv(&mut bytes).map_err(|e| e.to_string())?;
        r.lower.write_csv(&mut bytes).map_err(|e| e.to_string())?;
        outputs.push(bytes);
    }
    check(outputs[0] == outputs[1], || "CSV outputs differ".into())?;
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact extension", exact_extension),
        ("invertibility", invertibility),
        ("boundary-class invariance", boundary_class),
        ("mean-value identity", mean_value_identity),
        ("reproduction identity", reproduction_identity),
        ("bowl certificate", bowl_certificate),
        ("positivity", positivity),
        ("supercaloric classifier", classifier),
        ("perron convergence", perron_convergence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
