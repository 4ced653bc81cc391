//! Direct numerical integration of the search-cost Laplace transform and of
//! `M_{k,n}(0)` in the stable case, independent of the hypergeometric route.
//!
//! With identical weight transforms `φ(x) = exp(−x^γ/n)` the Laplace
//! transform of the search cost is
//!
//! ```text
//! φ_S(s) = n ∫₀^∞ ∫ₜ^∞ φ''(r) [φ(r) + e^{−s}(φ(r−t) − φ(r))]^{n−1} dr dt.
//! ```
//!
//! `φ''` is singular at the origin, so both double integrals are rewritten in
//! the variables `u = ρ^γ`, `v = (ρ+t)^γ` (`ρ = r − t`) and then `v = u/τ`,
//! `τ ∈ (0, 1]`, which leaves integrands that are bounded or integrably
//! singular at the ends only. The outer variable is truncated where the
//! exponential tail falls below tolerance and the tail is added back from the
//! integrand's value at the cut.

pub mod kronrod;

use serde::Serialize;
use thiserror::Error;

use crate::analytic::{self, binomial, sum_by_magnitude, AnalyticError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("tolerance not met: value {value}, estimated error {error:e}")]
    ToleranceNotMet { value: f64, error: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

/// Accuracy settings for the nested adaptive quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_subdivisions: 1000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(QuadError::Domain("tolerances must be positive".into()));
        }
        if self.max_subdivisions < 100 {
            return Err(QuadError::Domain(
                "max_subdivisions must be at least 100".into(),
            ));
        }
        Ok(())
    }

    fn inner(&self) -> (f64, f64) {
        ((self.rel_tol * 0.1).max(1e-15), self.abs_tol * 1e-3)
    }
}

/// Outer integral over `[0, ∞)` of `f`, whose tail decays at least like `e^{−x}`.
///
/// Truncates at `horizon` and adds `f(horizon)` as the tail estimate.
fn outer_integral<F: Fn(f64) -> f64>(
    f: F,
    horizon: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), QuadError> {
    let est = kronrod::integrate(
        &f,
        0.0,
        horizon,
        spec.rel_tol,
        spec.abs_tol,
        spec.max_subdivisions,
    )
    .map_err(|e| QuadError::ToleranceNotMet {
        value: e.best.value,
        error: e.best.error,
    })?;
    let tail = f(horizon);
    Ok((est.value + tail, est.error + tail.abs()))
}

/// Remembers the first inner integral that missed its tolerance.
///
/// Converged inner integrals are within `max(abs_i, rel_i·|value|)`, so their
/// combined effect on the outer integral is bounded by
/// `rel_i·∫|f| + abs_i·∫weight`, where `weight` multiplies the inner integral.
#[derive(Default)]
struct InnerLog {
    failure: std::cell::Cell<Option<(f64, f64)>>,
}

impl InnerLog {
    fn inner<F: Fn(f64) -> f64>(&self, f: F, spec: &QuadratureSpec) -> f64 {
        let (rel, abs) = spec.inner();
        match kronrod::integrate(f, 0.0, 1.0, rel, abs, spec.max_subdivisions) {
            Ok(est) => est.value,
            Err(e) => {
                if self.failure.get().is_none() {
                    self.failure.set(Some((e.best.value, e.best.error)));
                }
                e.best.value
            }
        }
    }

    /// `weight_mass` is the integral of the factor multiplying the inner integral.
    fn finish(
        &self,
        value: f64,
        error: f64,
        weight_mass: f64,
        spec: &QuadratureSpec,
    ) -> Result<f64, QuadError> {
        let (rel, abs) = spec.inner();
        let error = error + rel * value.abs() + abs * weight_mass;
        if self.failure.get().is_some()
            || error > spec.abs_tol.max(spec.rel_tol * value.abs()) * 10.0
        {
            return Err(QuadError::ToleranceNotMet { value, error });
        }
        Ok(value)
    }
}

fn check_gamma(gamma_index: f64) -> Result<(), QuadError> {
    if gamma_index > 0.0 && gamma_index < 1.0 {
        Ok(())
    } else {
        Err(QuadError::Domain(format!(
            "stability index {gamma_index} outside (0, 1)"
        )))
    }
}

/// Laplace transform `E[exp(−s S_n)]` of the stationary search cost.
pub fn laplace_sn(
    gamma_index: f64,
    n: usize,
    s: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    check_gamma(gamma_index)?;
    spec.validate()?;
    if n == 0 {
        return Err(QuadError::Domain("n must be at least 1".into()));
    }
    if !(s >= 0.0) {
        return Err(QuadError::Domain(format!("s = {s} must be nonnegative")));
    }
    let g = gamma_index;
    let nf = n as f64;
    let decay = (-s).exp();
    let power_a = 1.0 / g - 3.0;
    let power_b = 1.0 / g - 2.0;
    let weight_b = (1.0 - g) / g;
    let log = InnerLog::default();
    let outer = |u: f64| {
        let phi_rho = (-u / nf).exp();
        log.inner(
            |tau: f64| {
                // v = u/τ ≥ u, i.e. r = ρ + t ≥ t
                let x = u / (nf * tau);
                let phi_r = (-x).exp();
                let h = phi_r + decay * (phi_rho - phi_r);
                let ln_h = if n > 1 { (nf - 1.0) * h.ln() } else { 0.0 };
                let ln_tau = tau.ln();
                let a = if u > 0.0 {
                    (u / nf) * (power_a * ln_tau - x + ln_h).exp()
                } else {
                    0.0
                };
                let b = weight_b * (power_b * ln_tau - x + ln_h).exp();
                a + b
            },
            spec,
        )
    };
    let horizon = (1.0 / spec.abs_tol).ln() + (nf + 1.0).ln() + 10.0;
    let (value, error) = outer_integral(outer, horizon, spec)?;
    log.finish(value, error, horizon, spec)
}

/// `−d/ds E[exp(−s S_n)]` at `s = 0`, from a fourth-order one-sided
/// difference of [`laplace_sn`] (the transform is only defined for `s ≥ 0`).
pub fn laplace_sn_slope_at_zero(
    gamma_index: f64,
    n: usize,
    h: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    const STENCIL: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let mut acc = 0.0;
    for (j, w) in STENCIL.iter().enumerate() {
        acc += w * laplace_sn(gamma_index, n, j as f64 * h, spec)?;
    }
    Ok(-acc / (12.0 * h))
}

/// `I(γ, n, c) = ∫₀^∞ y^{1/γ−1} e^{−y(1−c/n)} ∫_y^∞ x^{1−1/γ} e^{−xc/n} dx dy`.
pub fn inner_integral(
    gamma_index: f64,
    n: usize,
    c: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    check_gamma(gamma_index)?;
    spec.validate()?;
    let nf = n as f64;
    if !(c > 0.0 && c < nf) {
        return Err(QuadError::Domain(format!(
            "need 0 < c < n, got c = {c}, n = {n}"
        )));
    }
    let rate = c / nf;
    let power = 1.0 / gamma_index - 3.0;
    let log = InnerLog::default();
    // x = y/τ: the outer integrand becomes y e^{−y(1−c/n)} ∫₀¹ τ^{1/γ−3} e^{−yc/(nτ)} dτ
    let outer = |y: f64| {
        let inner = log.inner(|tau: f64| (power * tau.ln() - y * rate / tau).exp(), spec);
        y * (-y * (1.0 - rate)).exp() * inner
    };
    // the outer integrand is bounded by (n/c) e^{−y}
    let horizon = ((1.0 / rate) / (spec.abs_tol * 1e-3)).ln().max(1.0);
    let (value, error) = outer_integral(outer, horizon, spec)?;
    log.finish(value, error, 1.0 / (1.0 - rate).powi(2), spec)
}

/// `M_{k,n}(0)` assembled from [`inner_integral`] values:
/// `k (n−1)⋯(n−k)/n · Σ_r (−1)^r C(k−1, r) I(γ, n, 2+r)`.
pub fn mkn_quadrature(
    gamma_index: f64,
    n: usize,
    k: usize,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    if k == 0 || k + 1 >= n {
        return Err(QuadError::Domain(format!(
            "need 1 ≤ k and k + 1 < n, got k = {k}, n = {n}"
        )));
    }
    let mut terms = Vec::with_capacity(k);
    for r in 0..k {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(
            sign * binomial(k - 1, r) * inner_integral(gamma_index, n, (2 + r) as f64, spec)?,
        );
    }
    let falling: f64 = (1..=k).map(|j| (n - j) as f64).product();
    Ok(k as f64 * falling / n as f64 * sum_by_magnitude(terms))
}

/// `E[S_n^k]` assembled from [`mkn_quadrature`] with the coefficient triangle.
pub fn moment_quadrature(
    gamma_index: f64,
    n: usize,
    k: usize,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    let triangle = analytic::coeff_triangle(k)?;
    let mut terms = Vec::with_capacity(k);
    for l in 1..=k {
        terms.push(triangle.get(k, l) as f64 * mkn_quadrature(gamma_index, n, l, spec)?);
    }
    Ok(sum_by_magnitude(terms))
}
