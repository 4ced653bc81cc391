//! Exact moments of the stationary search cost in the stable case.
//!
//! Moments are assembled from the auxiliary quantities `M_{k,n}(0)`:
//!
//! ```text
//! E[S_n^k] = Σ_{l=1..k} a_l^(k) M_{l,n}(0)
//! M_{k,n}(0) = γ k (n−1)⋯(n−k)/n · Σ_{r=0..k−1} (−1)^r C(k−1, r) ₂F₁(2, 1; 1/γ+1; 1 − (2+r)/n)
//! lim M_{k,n}(0) = (k!)² / (1/γ − k − 1)_k      when γ < 1/(k+1), +∞ otherwise
//! ```
//!
//! The coefficients obey `a_l^(k) = a_{l−1}^(k−1) + l a_l^(k−1)` with unit
//! ends, which follows from `M'_{k,n}(s) = −k M_{k,n}(s) − M_{k+1,n}(s)`.

use serde::Serialize;
use thiserror::Error;

use crate::special_fn::{hyp2f1, pochhammer, KahanSum, SpecialError};

/// Largest order accepted by [`coeff_triangle`].
pub const MAX_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("order must be between 1 and {MAX_ORDER}, got {0}")]
    Order(usize),
    #[error("coefficient overflow in triangle row {row}")]
    Overflow { row: usize },
    #[error("stability index {0} outside (0, 1)")]
    StabilityIndex(f64),
    #[error("number of items must be at least 1")]
    NoItems,
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Integer coefficients `a_l^(k)`, rows `k = 1..=k_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTriangle {
    rows: Vec<Vec<u128>>,
}

impl CoefficientTriangle {
    pub fn k_max(&self) -> usize {
        self.rows.len()
    }

    /// Row `k` (1-based), entries for `l = 1..=k`.
    pub fn row(&self, k: usize) -> &[u128] {
        &self.rows[k - 1]
    }

    /// `a_l^(k)` with 1-based `k` and `l`.
    pub fn get(&self, k: usize, l: usize) -> u128 {
        self.rows[k - 1][l - 1]
    }
}

/// Builds rows `1..=k_max` of the coefficient triangle.
pub fn coeff_triangle(k_max: usize) -> Result<CoefficientTriangle, AnalyticError> {
    if k_max == 0 || k_max > MAX_ORDER {
        return Err(AnalyticError::Order(k_max));
    }
    let mut rows: Vec<Vec<u128>> = vec![vec![1]];
    for k in 2..=k_max {
        let prev = &rows[k - 2];
        let mut row = vec![1u128; k];
        for l in 2..k {
            row[l - 1] = (l as u128)
                .checked_mul(prev[l - 1])
                .and_then(|v| v.checked_add(prev[l - 2]))
                .ok_or(AnalyticError::Overflow { row: k })?;
        }
        rows.push(row);
    }
    Ok(CoefficientTriangle { rows })
}

/// A moment or auxiliary limit that is either finite or divergent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub gamma_index: f64,
    pub order: usize,
    pub value: Moment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Moment {
    Finite(f64),
    Divergent,
}

impl MomentValue {
    pub fn finite(&self) -> Option<f64> {
        match self.value {
            Moment::Finite(v) => Some(v),
            Moment::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self.value, Moment::Divergent)
    }
}

/// Threshold `1/(k+1)` at and above which the order-`k` limit diverges.
pub fn divergence_threshold(k: usize) -> f64 {
    1.0 / (k as f64 + 1.0)
}

/// `γ ≥ 1/(k+1)`, with a few ulps of slack so that e.g. `γ = 1.0/3.0`
/// lands on the divergent side of its own threshold.
pub fn limit_diverges(gamma_index: f64, k: usize) -> bool {
    gamma_index * (k as f64 + 1.0) >= 1.0 - 4.0 * f64::EPSILON
}

fn check_gamma(gamma_index: f64) -> Result<(), AnalyticError> {
    if gamma_index > 0.0 && gamma_index < 1.0 {
        Ok(())
    } else {
        Err(AnalyticError::StabilityIndex(gamma_index))
    }
}

/// `lim_{n→∞} M_{k,n}(0)`.
pub fn limit_mk(gamma_index: f64, k: usize) -> Result<MomentValue, AnalyticError> {
    check_gamma(gamma_index)?;
    if k == 0 {
        return Err(AnalyticError::Order(k));
    }
    let value = if limit_diverges(gamma_index, k) {
        Moment::Divergent
    } else {
        let base = 1.0 / gamma_index - k as f64 - 1.0;
        let v = if k <= 32 {
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            fact * fact / pochhammer(base, k as u32)?
        } else {
            // (k!)² / (base)_k as a running product of O(1) ratios
            (1..=k)
                .map(|j| (j * j) as f64 / (base + (j - 1) as f64))
                .product()
        };
        Moment::Finite(v)
    };
    Ok(MomentValue {
        gamma_index,
        order: k,
        value,
    })
}

/// `lim_{n→∞} E[S_n^k]`.
pub fn limit_moment(gamma_index: f64, k: usize) -> Result<MomentValue, AnalyticError> {
    check_gamma(gamma_index)?;
    let triangle = coeff_triangle(k)?;
    limit_moment_with(&triangle, gamma_index, k)
}

/// Same as [`limit_moment`], reusing a precomputed triangle.
pub fn limit_moment_with(
    triangle: &CoefficientTriangle,
    gamma_index: f64,
    k: usize,
) -> Result<MomentValue, AnalyticError> {
    check_gamma(gamma_index)?;
    if k == 0 || k > triangle.k_max() {
        return Err(AnalyticError::Order(k));
    }
    if limit_diverges(gamma_index, k) {
        return Ok(MomentValue {
            gamma_index,
            order: k,
            value: Moment::Divergent,
        });
    }
    let mut acc = KahanSum::default();
    for l in 1..=k {
        let ml = limit_mk(gamma_index, l)?
            .finite()
            .expect("lower orders converge whenever order k does");
        acc.add(triangle.get(k, l) as f64 * ml);
    }
    Ok(MomentValue {
        gamma_index,
        order: k,
        value: Moment::Finite(acc.value()),
    })
}

/// Binomial coefficient as a float, exact for the small arguments used here.
pub(crate) fn binomial(n: usize, r: usize) -> f64 {
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Sums signed terms in order of decreasing magnitude with compensation.
pub(crate) fn sum_by_magnitude(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut acc = KahanSum::default();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// `γ k (n−1)(n−2)⋯(n−k) / n`.
pub(crate) fn mk_prefactor(gamma_index: f64, n: usize, k: usize) -> f64 {
    let falling: f64 = (1..=k).map(|j| (n - j) as f64).product();
    gamma_index * k as f64 * falling / n as f64
}

/// `M_{k,n}(0)` at finite `n` through the hypergeometric identity.
///
/// Returns 0 for `n ≤ k`: a distinct `(k+1)`-tuple of items does not exist.
/// The alternating sum loses roughly `(k−1) log10(n)` digits.
pub fn finite_n_mk(gamma_index: f64, n: usize, k: usize) -> Result<f64, AnalyticError> {
    check_gamma(gamma_index)?;
    if k == 0 {
        return Err(AnalyticError::Order(k));
    }
    if n == 0 {
        return Err(AnalyticError::NoItems);
    }
    if n <= k {
        return Ok(0.0);
    }
    let c = 1.0 / gamma_index + 1.0;
    let mut terms = Vec::with_capacity(k);
    for r in 0..k {
        let z = 1.0 - (2 + r) as f64 / n as f64;
        let f = hyp2f1(2.0, 1.0, c, z)?;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * binomial(k - 1, r) * f);
    }
    Ok(mk_prefactor(gamma_index, n, k) * sum_by_magnitude(terms))
}

/// `E[S_n^k]` at finite `n`.
pub fn finite_n_moment(gamma_index: f64, n: usize, k: usize) -> Result<f64, AnalyticError> {
    let triangle = coeff_triangle(k)?;
    finite_n_moment_with(&triangle, gamma_index, n, k)
}

/// Same as [`finite_n_moment`], reusing a precomputed triangle.
pub fn finite_n_moment_with(
    triangle: &CoefficientTriangle,
    gamma_index: f64,
    n: usize,
    k: usize,
) -> Result<f64, AnalyticError> {
    if k == 0 || k > triangle.k_max() {
        return Err(AnalyticError::Order(k));
    }
    let mut acc = KahanSum::default();
    for l in 1..=k {
        acc.add(triangle.get(k, l) as f64 * finite_n_mk(gamma_index, n, l)?);
    }
    Ok(acc.value())
}
