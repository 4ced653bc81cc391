//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use mtf_moments::analytic::{coeff_triangle, finite_n_mk, finite_n_moment, limit_moment, Moment};
use mtf_moments::montecarlo::{mc_moments, McConfig, McMethod};
use mtf_moments::quadrature::{
    inner_integral, laplace_sn, laplace_sn_slope_at_zero, mkn_quadrature, QuadratureSpec,
};
use mtf_moments::special_fn::hyp2f1;
use mtf_moments::weights::{rng_stream, sample_stable, WeightModel};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn finite(m: Moment) -> Option<f64> {
    match m {
        Moment::Finite(v) => Some(v),
        Moment::Divergent => None,
    }
}

fn kingman() -> Verdict {
    let mut worst = 0.0f64;
    for g in [0.1, 0.2, 0.3, 0.4] {
        let v = finite(limit_moment(g, 1).map_err(|e| e.to_string())?.value)
            .ok_or(format!("γ = {g} reported divergent"))?;
        let err = rel(v, g / (1.0 - 2.0 * g));
        worst = worst.max(err);
        if err > 1e-12 {
            return Err(format!("γ = {g}: relative error {err:e}"));
        }
    }
    for g in [0.5, 0.6] {
        if !limit_moment(g, 1)
            .map_err(|e| e.to_string())?
            .is_divergent()
        {
            return Err(format!("γ = {g} not divergent"));
        }
    }
    Ok(format!(
        "max relative error {worst:e}; γ = 0.5, 0.6 divergent"
    ))
}

fn closed_forms() -> Verdict {
    let second =
        finite(limit_moment(0.25, 2).map_err(|e| e.to_string())?.value).ok_or("k = 2 divergent")?;
    let third =
        finite(limit_moment(0.2, 3).map_err(|e| e.to_string())?.value).ok_or("k = 3 divergent")?;
    let f2 = |g: f64| g * (1.0 + g) / ((1.0 - 3.0 * g) * (1.0 - 2.0 * g));
    let f3 = |g: f64| g * (1.0 + 5.0 * g) / ((1.0 - 4.0 * g) * (1.0 - 3.0 * g) * (1.0 - 2.0 * g));
    let e2 = rel(second, 2.5).max(rel(second, f2(0.25)));
    let e3 = rel(third, 25.0 / 3.0).max(rel(third, f3(0.2)));
    if e2 > 1e-12 || e3 > 1e-12 {
        return Err(format!("E[S²] = {second}, E[S³] = {third}"));
    }
    let d2 = limit_moment(1.0 / 3.0, 2)
        .map_err(|e| e.to_string())?
        .is_divergent();
    let d3 = limit_moment(0.25, 3)
        .map_err(|e| e.to_string())?
        .is_divergent();
    if !(d2 && d3) {
        return Err("boundary not divergent".into());
    }
    Ok(format!(
        "E[S²] = {second}, E[S³] = {third}; boundaries divergent"
    ))
}

fn triangle() -> Verdict {
    let t = coeff_triangle(5).map_err(|e| e.to_string())?;
    let expected: [&[u128]; 5] = [
        &[1],
        &[1, 1],
        &[1, 3, 1],
        &[1, 7, 6, 1],
        &[1, 15, 25, 10, 1],
    ];
    for (k, row) in expected.iter().enumerate() {
        if t.row(k + 1) != *row {
            return Err(format!("row {} = {:?}", k + 1, t.row(k + 1)));
        }
    }
    Ok("rows 1–5 exact".into())
}

fn quadrature_identity() -> Verdict {
    let spec = QuadratureSpec::default();
    let mut worst = (0.0f64, String::new());
    for g in [0.1, 0.2, 0.3] {
        for n in [5, 10, 50] {
            for k in 1..=3 {
                let exact = finite_n_mk(g, n, k).map_err(|e| e.to_string())?;
                let quad = mkn_quadrature(g, n, k, &spec).map_err(|e| e.to_string())?;
                let err = rel(quad, exact);
                let tol = if k == 3 { 1e-5 } else { 1e-6 };
                if err > tol {
                    return Err(format!("M(γ={g}, n={n}, k={k}): {quad} vs {exact}"));
                }
                if err > worst.0 {
                    worst = (err, format!("M(γ={g}, n={n}, k={k})"));
                }
            }
        }
    }
    for g in [0.1, 0.2, 0.3, 0.4, 0.5] {
        for n in [5usize, 10, 50] {
            for c in [2.0, 3.0, 4.0] {
                let exact = g * hyp2f1(2.0, 1.0, 1.0 / g + 1.0, 1.0 - c / n as f64)
                    .map_err(|e| e.to_string())?;
                let quad = inner_integral(g, n, c, &spec).map_err(|e| e.to_string())?;
                let err = rel(quad, exact);
                if err > 1e-6 {
                    return Err(format!("I(γ={g}, n={n}, c={c}): {quad} vs {exact}"));
                }
                if err > worst.0 {
                    worst = (err, format!("I(γ={g}, n={n}, c={c})"));
                }
            }
        }
    }
    Ok(format!("worst relative error {:e} at {}", worst.0, worst.1))
}

fn laplace() -> Verdict {
    let spec = QuadratureSpec::default();
    let tight = QuadratureSpec::with_rel_tol(1e-12);
    let mut worst_norm = 0.0f64;
    let mut worst_slope = 0.0f64;
    for g in [0.2, 0.3] {
        for n in [5, 20] {
            let phi0 = laplace_sn(g, n, 0.0, &spec).map_err(|e| e.to_string())?;
            worst_norm = worst_norm.max((phi0 - 1.0).abs());
            let slope = laplace_sn_slope_at_zero(g, n, 1e-3, &tight).map_err(|e| e.to_string())?;
            let mean = finite_n_moment(g, n, 1).map_err(|e| e.to_string())?;
            worst_slope = worst_slope.max(rel(slope, mean));
        }
    }
    let msg = format!("|φ(0) − 1| ≤ {worst_norm:e}, slope relative error ≤ {worst_slope:e}");
    if worst_norm <= 1e-6 && worst_slope <= 1e-4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn convergence() -> Verdict {
    let ladder = [100, 1000, 10_000];
    let mut gaps = Vec::new();
    let mut growth = Vec::new();
    for n in ladder {
        gaps.push((finite_n_moment(0.25, n, 1).map_err(|e| e.to_string())? - 0.5).abs() / 0.5);
        growth.push(finite_n_moment(0.4, n, 2).map_err(|e| e.to_string())?);
    }
    let gaps_text: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
    let msg = format!(
        "gaps [{}], γ = 0.4 second moments {growth:.3?}",
        gaps_text.join(", ")
    );
    if gaps.windows(2).all(|w| w[1] < w[0])
        && gaps[2] < 0.02
        && growth.windows(2).all(|w| w[1] > w[0])
    {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn monte_carlo() -> Verdict {
    let model = WeightModel::stable(0.25, 500).map_err(|e| e.to_string())?;
    let config = McConfig {
        k_max: 2,
        weight_draws: 200,
        costs_per_draw: 500,
        burn_in: None,
        seed: 20_240_611,
    };
    let chain = mc_moments(&model, &config, McMethod::Chain).map_err(|e| e.to_string())?;
    let exact = mc_moments(&model, &config, McMethod::ExactAges).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for k in 1..=2 {
        let target = finite_n_moment(0.25, 500, k).map_err(|e| e.to_string())?;
        let (a, b) = (&chain[k - 1], &exact[k - 1]);
        ok &= (a.mean - target).abs() <= 3.0 * a.stderr;
        ok &= (b.mean - target).abs() <= 3.0 * b.stderr;
        ok &= (a.mean - b.mean).abs() <= 3.0 * a.stderr.hypot(b.stderr);
        parts.push(format!(
            "k={k}: exact {target:.4}, chain {:.4}±{:.4}, ages {:.4}±{:.4}",
            a.mean, a.stderr, b.mean, b.stderr
        ));
    }
    if ok {
        Ok(parts.join("; "))
    } else {
        Err(parts.join("; "))
    }
}

fn sampler() -> Verdict {
    let mut rng = rng_stream(20_240_611, u64::MAX);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| sample_stable(0.5, 1.0, &mut rng))
        .collect();
    let mut worst = 0.0f64;
    for s in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let t: Vec<f64> = draws.iter().map(|x| (-s * x).exp()).collect();
        let n = t.len() as f64;
        let mean = t.iter().sum::<f64>() / n;
        let se = (t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let z = (mean - (-s.sqrt()).exp()).abs() / se;
        worst = worst.max(z);
    }
    let msg = format!("largest deviation {worst:.2} standard errors");
    if worst <= 3.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn determinism() -> Verdict {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_mtf-moments"))
            .args(args)
            .env("NO_COLOR", "1")
            .output()
            .map_err(|e| e.to_string())
    };
    let a = run(&["verify"])?;
    let b = run(&["verify"])?;
    if a.stdout != b.stdout {
        return Err("verify output differs between runs".into());
    }
    let codes = [
        a.status.code(),
        run(&["verify", "--tol", "1e-15"])?.status.code(),
        run(&["limits", "--kmax", "99"])?.status.code(),
    ];
    if codes != [Some(0), Some(1), Some(2)] {
        return Err(format!("exit codes {codes:?}, expected 0/1/2"));
    }
    Ok(format!(
        "{} identical bytes; exit codes 0/1/2",
        a.stdout.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("first-moment limit", kingman),
        ("closed forms", closed_forms),
        ("coefficient triangle", triangle),
        ("quadrature identity", quadrature_identity),
        ("Laplace normalization", laplace),
        ("convergence in n", convergence),
        ("Monte Carlo agreement", monte_carlo),
        ("stable sampler calibration", sampler),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {} {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
