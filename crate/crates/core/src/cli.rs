//! Command-line front end.
//!
//! Moment tables share the CSV header `gamma,n,k,method,value,stderr`; the
//! `verify` report uses `check,expected,actual,error,limit,status`. JSON
//! output wraps the same rows in `{"meta": {...}, "rows": [...]}`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analytic::{
    self, coeff_triangle, divergence_threshold, limit_moment_with, AnalyticError, Moment,
};
use crate::montecarlo::{mc_moments, McConfig, McError, McMethod};
use crate::quadrature::{self, QuadError, QuadratureSpec};
use crate::special_fn::hyp2f1;
use crate::weights::{rng_stream, sample_stable, WeightError, WeightModel};

/// Largest moment order the table commands accept.
pub const MAX_TABLE_ORDER: usize = 32;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub const CSV_HEADER: &str = "gamma,n,k,method,value,stderr";
pub const VERIFY_HEADER: &str = "check,expected,actual,error,limit,status";

#[derive(Debug, Parser, Clone)]
#[command(
    name = "mtf-moments",
    version,
    about = "Search-cost moments of move-to-front under stable popularities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Stability index: list `0.1,0.2` or range `start:stop:step`.
    #[arg(long, global = true, default_value = "0.25")]
    pub gamma: String,

    /// Number of items: list or range.
    #[arg(long, global = true, default_value = "100")]
    pub n: String,

    /// Highest moment order.
    #[arg(long = "kmax", global = true, default_value_t = 3)]
    pub k_max: usize,

    #[arg(long, global = true, default_value_t = 20_240_611)]
    pub seed: u64,

    /// Search costs per popularity draw.
    #[arg(long, global = true, default_value_t = 500)]
    pub samples: usize,

    /// Chain burn-in steps (default 50·n).
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<usize>,

    /// Popularity draws (outer Monte Carlo replicates).
    #[arg(long, global = true, default_value_t = 200)]
    pub replicates: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Relative tolerance of the quadrature cross-checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// n → ∞ moments, or "divergent".
    Limits,
    /// Exact moments at finite n.
    FiniteN,
    /// Finite-n moments next to their quadrature counterparts.
    QuadratureCheck,
    /// Monte Carlo moments.
    Simulate,
    /// Cross-validate analytic, quadrature and Monte Carlo results.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Chain,
    Exact,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<McMethod> {
        match self {
            MethodArg::Chain => vec![McMethod::Chain],
            MethodArg::Exact => vec![McMethod::ExactAges],
            MethodArg::Both => vec![McMethod::Chain, McMethod::ExactAges],
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `a,b,c` or `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("bad range `{text}`")))
            })
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(usage(format!("range `{text}` must be start:stop:step")));
        };
        if !(step > 0.0) || stop < start {
            return Err(usage(format!(
                "range `{text}` is empty or has a non-positive step"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(usage(format!("range `{text}` has too many points")));
        }
        // rounding keeps 0.1:0.3:0.1 printing as 0.3, not 0.30000000000000004
        Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect())
    } else {
        text.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("bad number `{p}`")))
            })
            .collect()
    }
}

fn parse_gamma_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let grid = parse_grid(text)?;
    if let Some(g) = grid.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
        return Err(usage(format!("--gamma value {g} outside (0, 1)")));
    }
    Ok(grid)
}

fn parse_n_grid(text: &str) -> Result<Vec<usize>, CliError> {
    parse_grid(text)?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 && x < 1e9 {
                Ok(x as usize)
            } else {
                Err(usage(format!("--n value {x} is not a positive integer")))
            }
        })
        .collect()
}

fn check_order(k_max: usize) -> Result<(), CliError> {
    if k_max == 0 || k_max > MAX_TABLE_ORDER {
        return Err(usage(format!(
            "--kmax must be between 1 and {MAX_TABLE_ORDER}"
        )));
    }
    Ok(())
}

/// A moment-table row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub gamma: f64,
    pub n: Option<usize>,
    pub k: usize,
    pub method: &'static str,
    pub value: Moment,
    pub stderr: Option<f64>,
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub error: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn relative(name: String, expected: f64, actual: f64, limit: f64) -> Self {
        let error = ((actual - expected) / expected).abs();
        Check {
            name,
            expected,
            actual,
            error,
            limit,
            passed: error <= limit,
        }
    }

    fn flag(name: String, expected: bool, actual: bool) -> Self {
        let as_num = |b: bool| if b { 1.0 } else { 0.0 };
        Check {
            name,
            expected: as_num(expected),
            actual: as_num(actual),
            error: as_num(expected != actual),
            limit: 0.0,
            passed: expected == actual,
        }
    }

    fn failed(name: String, err: impl std::fmt::Display) -> Self {
        log::error!("{name}: {err}");
        Check {
            name,
            expected: f64::NAN,
            actual: f64::NAN,
            error: f64::INFINITY,
            limit: 0.0,
            passed: false,
        }
    }
}

/// Rendered output and whether every verification check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if !(cli.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    match cli.command {
        Command::Limits => table(cli, cmd_limits(cli)?),
        Command::FiniteN => table(cli, cmd_finite_n(cli)?),
        Command::QuadratureCheck => table(cli, cmd_quadrature_check(cli)?),
        Command::Simulate => table(cli, cmd_simulate(cli)?),
        Command::Verify => {
            let checks = cmd_verify(cli)?;
            let success = checks.iter().all(|c| c.passed);
            Ok(Outcome {
                text: render_checks(cli, &checks),
                success,
            })
        }
    }
}

fn table(cli: &Cli, mut rows: Vec<Row>) -> Result<Outcome, CliError> {
    rows.sort_by(|a, b| {
        a.gamma
            .total_cmp(&b.gamma)
            .then(a.n.cmp(&b.n))
            .then(a.k.cmp(&b.k))
            .then(a.method.cmp(b.method))
    });
    Ok(Outcome {
        text: render_rows(cli, &rows),
        success: true,
    })
}

pub fn cmd_limits(cli: &Cli) -> Result<Vec<Row>, CliError> {
    let gammas = parse_gamma_grid(&cli.gamma)?;
    check_order(cli.k_max)?;
    let triangle = coeff_triangle(cli.k_max)?;
    let mut rows = Vec::new();
    for &g in &gammas {
        for k in 1..=cli.k_max {
            let m = limit_moment_with(&triangle, g, k)?;
            rows.push(Row {
                gamma: g,
                n: None,
                k,
                method: "limit",
                value: m.value,
                stderr: None,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_finite_n(cli: &Cli) -> Result<Vec<Row>, CliError> {
    let gammas = parse_gamma_grid(&cli.gamma)?;
    let ns = parse_n_grid(&cli.n)?;
    check_order(cli.k_max)?;
    let triangle = coeff_triangle(cli.k_max)?;
    let mut rows = Vec::new();
    for &g in &gammas {
        for &n in &ns {
            for k in 1..=cli.k_max {
                let v = analytic::finite_n_moment_with(&triangle, g, n, k)?;
                rows.push(Row {
                    gamma: g,
                    n: Some(n),
                    k,
                    method: "finite_n",
                    value: Moment::Finite(v),
                    stderr: None,
                });
            }
        }
    }
    Ok(rows)
}

pub fn cmd_quadrature_check(cli: &Cli) -> Result<Vec<Row>, CliError> {
    let gammas = parse_gamma_grid(&cli.gamma)?;
    let ns = parse_n_grid(&cli.n)?;
    check_order(cli.k_max)?;
    if let Some(n) = ns.iter().find(|&&n| n <= cli.k_max + 1) {
        return Err(usage(format!("quadrature needs n > kmax + 1, got n = {n}")));
    }
    let spec = QuadratureSpec::default();
    let triangle = coeff_triangle(cli.k_max)?;
    let points: Vec<(f64, usize, usize)> = gammas
        .iter()
        .flat_map(|&g| {
            ns.iter()
                .flat_map(move |&n| (1..=cli.k_max).map(move |k| (g, n, k)))
        })
        .collect();
    let pairs: Vec<(f64, usize, usize, f64, f64)> = points
        .par_iter()
        .map(|&(g, n, k)| -> Result<_, CliError> {
            let exact = analytic::finite_n_moment_with(&triangle, g, n, k)?;
            let quad = quadrature::moment_quadrature(g, n, k, &spec)?;
            Ok((g, n, k, exact, quad))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (g, n, k, exact, quad) in pairs {
        for (method, v) in [("finite_n", exact), ("quadrature", quad)] {
            rows.push(Row {
                gamma: g,
                n: Some(n),
                k,
                method,
                value: Moment::Finite(v),
                stderr: None,
            });
        }
    }
    Ok(rows)
}

fn mc_config(cli: &Cli, k_max: usize) -> Result<McConfig, CliError> {
    let config = McConfig {
        k_max,
        weight_draws: cli.replicates,
        costs_per_draw: cli.samples,
        burn_in: cli.burn_in,
        seed: cli.seed,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

pub fn cmd_simulate(cli: &Cli) -> Result<Vec<Row>, CliError> {
    let gammas = parse_gamma_grid(&cli.gamma)?;
    let ns = parse_n_grid(&cli.n)?;
    check_order(cli.k_max)?;
    let config = mc_config(cli, cli.k_max)?;
    let mut rows = Vec::new();
    for &g in &gammas {
        for &n in &ns {
            let model = WeightModel::stable(g, n)?;
            for method in cli.method.methods() {
                for est in mc_moments(&model, &config, method)? {
                    rows.push(Row {
                        gamma: g,
                        n: Some(n),
                        k: est.order,
                        method: method.label(),
                        value: Moment::Finite(est.mean),
                        stderr: Some(est.stderr),
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Default cross-validation grid.
const VERIFY_GAMMAS: [f64; 3] = [0.1, 0.2, 0.3];
const VERIFY_NS: [usize; 3] = [5, 10, 50];
const IDENTITY_GAMMAS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
const IDENTITY_CS: [f64; 3] = [2.0, 3.0, 4.0];
const MC_GAMMA: f64 = 0.25;
const MC_N: usize = 500;
const SAMPLER_DRAWS: usize = 100_000;
const SAMPLER_S: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];

pub fn cmd_verify(cli: &Cli) -> Result<Vec<Check>, CliError> {
    let mc = mc_config(cli, 2)?;
    let tol = cli.tol;
    let spec = QuadratureSpec::default();
    let mut checks = Vec::new();

    // limits and closed forms
    for g in [0.1, 0.2, 0.3, 0.4] {
        let v = analytic::limit_moment(g, 1)?
            .finite()
            .unwrap_or(f64::INFINITY);
        checks.push(Check::relative(
            format!("kingman_limit[gamma={g}]"),
            g / (1.0 - 2.0 * g),
            v,
            1e-12,
        ));
    }
    for g in [0.5, 0.6] {
        let d = analytic::limit_moment(g, 1)?.is_divergent();
        checks.push(Check::flag(
            format!("kingman_divergent[gamma={g}]"),
            true,
            d,
        ));
    }
    let second = |g: f64| g * (1.0 + g) / ((1.0 - 3.0 * g) * (1.0 - 2.0 * g));
    let third =
        |g: f64| g * (1.0 + 5.0 * g) / ((1.0 - 4.0 * g) * (1.0 - 3.0 * g) * (1.0 - 2.0 * g));
    for (g, k, exact) in [(0.25, 2, second(0.25)), (0.2, 3, third(0.2))] {
        let v = analytic::limit_moment(g, k)?
            .finite()
            .unwrap_or(f64::INFINITY);
        checks.push(Check::relative(
            format!("closed_form[gamma={g},k={k}]"),
            exact,
            v,
            1e-12,
        ));
    }
    for (g, k) in [(1.0 / 3.0, 2), (0.25, 3)] {
        let d = analytic::limit_moment(g, k)?.is_divergent();
        checks.push(Check::flag(
            format!("closed_form_divergent[gamma={g},k={k}]"),
            true,
            d,
        ));
    }
    let triangle = coeff_triangle(5)?;
    let displayed: [&[u128]; 5] = [
        &[1],
        &[1, 1],
        &[1, 3, 1],
        &[1, 7, 6, 1],
        &[1, 15, 25, 10, 1],
    ];
    for (k, row) in displayed.iter().enumerate() {
        checks.push(Check::flag(
            format!("triangle_row[k={}]", k + 1),
            true,
            triangle.row(k + 1) == *row,
        ));
    }

    // quadrature against the hypergeometric identities
    let grid: Vec<(f64, usize, usize)> = VERIFY_GAMMAS
        .iter()
        .flat_map(|&g| {
            VERIFY_NS
                .iter()
                .flat_map(move |&n| (1..=3).map(move |k| (g, n, k)))
        })
        .collect();
    checks.extend(
        grid.par_iter()
            .map(|&(g, n, k)| {
                let name = format!("mkn_quadrature[gamma={g},n={n},k={k}]");
                let limit = if k >= 3 { 10.0 * tol } else { tol };
                match (
                    analytic::finite_n_mk(g, n, k),
                    quadrature::mkn_quadrature(g, n, k, &spec),
                ) {
                    (Ok(exact), Ok(quad)) => Check::relative(name, exact, quad, limit),
                    (Err(e), _) => Check::failed(name, e),
                    (_, Err(e)) => Check::failed(name, e),
                }
            })
            .collect::<Vec<_>>(),
    );
    let identity: Vec<(f64, usize, f64)> = IDENTITY_GAMMAS
        .iter()
        .flat_map(|&g| {
            VERIFY_NS
                .iter()
                .flat_map(move |&n| IDENTITY_CS.iter().map(move |&c| (g, n, c)))
        })
        .collect();
    checks.extend(
        identity
            .par_iter()
            .map(|&(g, n, c)| {
                let name = format!("inner_integral[gamma={g},n={n},c={c}]");
                let exact = hyp2f1(2.0, 1.0, 1.0 / g + 1.0, 1.0 - c / n as f64).map(|f| g * f);
                match (exact, quadrature::inner_integral(g, n, c, &spec)) {
                    (Ok(exact), Ok(quad)) => Check::relative(name, exact, quad, tol),
                    (Err(e), _) => Check::failed(name, e),
                    (_, Err(e)) => Check::failed(name, e),
                }
            })
            .collect::<Vec<_>>(),
    );

    // Laplace transform normalization and slope
    let tight = QuadratureSpec::with_rel_tol(1e-12);
    let laplace: Vec<(f64, usize)> = [0.2, 0.3]
        .iter()
        .flat_map(|&g| [5usize, 20].map(move |n| (g, n)))
        .collect();
    checks.extend(
        laplace
            .par_iter()
            .flat_map(|&(g, n)| {
                let norm_name = format!("laplace_at_zero[gamma={g},n={n}]");
                let norm = match quadrature::laplace_sn(g, n, 0.0, &spec) {
                    Ok(v) => {
                        let error = (v - 1.0).abs();
                        Check {
                            name: norm_name,
                            expected: 1.0,
                            actual: v,
                            error,
                            limit: 1e-6,
                            passed: error <= 1e-6,
                        }
                    }
                    Err(e) => Check::failed(norm_name, e),
                };
                let slope_name = format!("laplace_slope[gamma={g},n={n}]");
                let slope = match (
                    analytic::finite_n_moment(g, n, 1),
                    quadrature::laplace_sn_slope_at_zero(g, n, 1e-3, &tight),
                ) {
                    (Ok(exact), Ok(fd)) => Check::relative(slope_name, exact, fd, 1e-4),
                    (Err(e), _) => Check::failed(slope_name, e),
                    (_, Err(e)) => Check::failed(slope_name, e),
                };
                vec![norm, slope]
            })
            .collect::<Vec<_>>(),
    );

    // convergence ladder in n
    let ladder = [100usize, 1000, 10_000];
    let gaps: Vec<f64> = ladder
        .iter()
        .map(|&n| analytic::finite_n_moment(0.25, n, 1).map(|v| (v - 0.5).abs() / 0.5))
        .collect::<Result<_, _>>()?;
    checks.push(Check::flag(
        "convergence_monotone[gamma=0.25,k=1]".into(),
        true,
        gaps.windows(2).all(|w| w[1] < w[0]),
    ));
    checks.push(Check {
        name: "convergence_gap[gamma=0.25,k=1,n=10000]".into(),
        expected: 0.5,
        actual: analytic::finite_n_moment(0.25, 10_000, 1)?,
        error: gaps[2],
        limit: 0.02,
        passed: gaps[2] < 0.02,
    });
    let growth: Vec<f64> = ladder
        .iter()
        .map(|&n| analytic::finite_n_moment(0.4, n, 2))
        .collect::<Result<_, _>>()?;
    checks.push(Check::flag(
        "divergent_growth[gamma=0.4,k=2]".into(),
        true,
        growth.windows(2).all(|w| w[1] > w[0]),
    ));

    // Monte Carlo
    let model = WeightModel::stable(MC_GAMMA, MC_N)?;
    let chain = mc_moments(&model, &mc, McMethod::Chain)?;
    let exact_ages = mc_moments(&model, &mc, McMethod::ExactAges)?;
    for k in 1..=2 {
        let target = analytic::finite_n_moment(MC_GAMMA, MC_N, k)?;
        for est in [&chain[k - 1], &exact_ages[k - 1]] {
            let error = (est.mean - target).abs();
            let limit = 3.0 * est.stderr;
            checks.push(Check {
                name: format!("{}[gamma={MC_GAMMA},n={MC_N},k={k}]", est.method.label()),
                expected: target,
                actual: est.mean,
                error,
                limit,
                passed: error <= limit,
            });
        }
        let (a, b) = (&chain[k - 1], &exact_ages[k - 1]);
        let error = (a.mean - b.mean).abs();
        let limit = 3.0 * a.stderr.hypot(b.stderr);
        checks.push(Check {
            name: format!("mc_method_agreement[gamma={MC_GAMMA},n={MC_N},k={k}]"),
            expected: a.mean,
            actual: b.mean,
            error,
            limit,
            passed: error <= limit,
        });
    }

    // stable sampler calibration
    let mut rng = rng_stream(cli.seed, u64::MAX);
    let draws: Vec<f64> = (0..SAMPLER_DRAWS)
        .map(|_| sample_stable(0.5, 1.0, &mut rng))
        .collect();
    for s in SAMPLER_S {
        let (mean, se) = mean_and_stderr(draws.iter().map(|x| (-s * x).exp()));
        let target = (-s.sqrt()).exp();
        let error = (mean - target).abs();
        checks.push(Check {
            name: format!("stable_sampler_laplace[gamma=0.5,s={s}]"),
            expected: target,
            actual: mean,
            error,
            limit: 3.0 * se,
            passed: error <= 3.0 * se,
        });
    }
    Ok(checks)
}

/// Sample mean and standard error.
pub fn mean_and_stderr<I: IntoIterator<Item = f64>>(values: I) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn fmt_value(m: &Moment) -> String {
    match m {
        Moment::Finite(v) => format!("{v}"),
        Moment::Divergent => "divergent".into(),
    }
}

fn json_value(m: &Moment) -> Value {
    match m {
        Moment::Finite(v) => json!(v),
        Moment::Divergent => json!("divergent"),
    }
}

fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format!("{x}"))
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Limits => "limits",
        Command::FiniteN => "finite-n",
        Command::QuadratureCheck => "quadrature-check",
        Command::Simulate => "simulate",
        Command::Verify => "verify",
    }
}

fn meta(cli: &Cli) -> Value {
    let spec = QuadratureSpec::default();
    json!({
        "command": command_name(cli.command),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
        "tol": cli.tol,
        "quadrature": {
            "rel_tol": spec.rel_tol,
            "abs_tol": spec.abs_tol,
            "max_subdivisions": spec.max_subdivisions,
        },
        "samples": cli.samples,
        "replicates": cli.replicates,
        "burn_in": cli.burn_in,
    })
}

pub fn render_rows(cli: &Cli, rows: &[Row]) -> String {
    match cli.format {
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in rows {
                let n = r.n.map(|n| n.to_string()).unwrap_or_default();
                let se = r.stderr.map(|s| format!("{s}")).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.gamma,
                    n,
                    r.k,
                    r.method,
                    fmt_value(&r.value),
                    se
                );
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut obj = json!({
                        "gamma": r.gamma,
                        "n": r.n,
                        "k": r.k,
                        "method": r.method,
                        "value": json_value(&r.value),
                        "stderr": r.stderr,
                    });
                    if r.method == "limit" {
                        obj["threshold"] = json!(divergence_threshold(r.k));
                    }
                    obj
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&json!({ "meta": meta(cli), "rows": rows }))
                .expect("rows serialize");
            s.push('\n');
            s
        }
    }
}

pub fn render_checks(cli: &Cli, checks: &[Check]) -> String {
    let status = |c: &Check| if c.passed { "pass" } else { "fail" };
    match cli.format {
        Format::Csv => {
            let mut out = String::from(VERIFY_HEADER);
            out.push('\n');
            for c in checks {
                let _ = writeln!(
                    out,
                    "{},{},{},{:e},{:e},{}",
                    c.name,
                    c.expected,
                    c.actual,
                    c.error,
                    c.limit,
                    status(c)
                );
            }
            out
        }
        Format::Json => {
            let items: Vec<Value> = checks
                .iter()
                .map(|c| {
                    json!({
                        "check": c.name,
                        "expected": json_number(c.expected),
                        "actual": json_number(c.actual),
                        "error": json_number(c.error),
                        "limit": json_number(c.limit),
                        "status": status(c),
                    })
                })
                .collect();
            let passed = checks.iter().all(|c| c.passed);
            let mut s = serde_json::to_string_pretty(
                &json!({ "meta": meta(cli), "checks": items, "passed": passed }),
            )
            .expect("checks serialize");
            s.push('\n');
            s
        }
    }
}
