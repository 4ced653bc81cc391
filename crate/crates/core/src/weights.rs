//! Random weight models behind the request probabilities.
//!
//! Popularities are `p_i = w_i / W_n` for independent positive weights `w_i`.
//! The stable model uses increments of a γ-stable subordinator over equal
//! spacings `1/n`, so each weight has Laplace transform `exp(−s^γ / n)`.

use std::f64::consts::PI;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use thiserror::Error;

/// Consecutive non-finite totals tolerated before giving up on a draw.
pub const MAX_RESAMPLES: usize = 100;

/// Tolerance on `Σ p_i = 1`.
pub const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("stability index {0} outside (0, 1)")]
    StabilityIndex(f64),
    #[error("gamma shape {0} must be positive and finite")]
    Shape(f64),
    #[error("deterministic weights must be positive and finite (index {index}: {value})")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("number of items must be at least 1")]
    Empty,
    #[error("weight total was not finite in {0} consecutive draws")]
    Overflow(usize),
}

/// Law of the i.i.d. weights and the number of items `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightModel {
    /// Increments of a γ-stable subordinator over spacings `1/n`.
    Stable { gamma_index: f64, n: usize },
    /// Gamma(shape, 1) weights; normalizing gives a symmetric Dirichlet vector.
    Gamma { shape: f64, n: usize },
    /// Fixed weights, one per item.
    Deterministic { values: Vec<f64> },
}

impl WeightModel {
    pub fn stable(gamma_index: f64, n: usize) -> Result<Self, WeightError> {
        check_stability_index(gamma_index)?;
        if n == 0 {
            return Err(WeightError::Empty);
        }
        Ok(WeightModel::Stable { gamma_index, n })
    }

    pub fn gamma(shape: f64, n: usize) -> Result<Self, WeightError> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(WeightError::Shape(shape));
        }
        if n == 0 {
            return Err(WeightError::Empty);
        }
        Ok(WeightModel::Gamma { shape, n })
    }

    pub fn deterministic(values: Vec<f64>) -> Result<Self, WeightError> {
        if values.is_empty() {
            return Err(WeightError::Empty);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(WeightError::NonPositiveWeight { index, value });
        }
        Ok(WeightModel::Deterministic { values })
    }

    pub fn n(&self) -> usize {
        match self {
            WeightModel::Stable { n, .. } | WeightModel::Gamma { n, .. } => *n,
            WeightModel::Deterministic { values } => values.len(),
        }
    }

    /// Laplace transform `E[exp(−s w_i)]` of the weight of item `i`.
    ///
    /// `i` only matters for deterministic weights, where it must be in range.
    pub fn laplace_weight(&self, i: usize, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match self {
            WeightModel::Stable { gamma_index, n } => (-s.powf(*gamma_index) / *n as f64).exp(),
            WeightModel::Gamma { shape, .. } => (1.0 + s).powf(-shape),
            WeightModel::Deterministic { values } => (-s * values[i]).exp(),
        }
    }

    /// Draws one weight for item `i`.
    pub fn sample_weight<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        match self {
            WeightModel::Stable { gamma_index, n } => {
                sample_stable(*gamma_index, 1.0 / *n as f64, rng)
            }
            WeightModel::Gamma { shape, .. } => Gamma::new(*shape, 1.0)
                .expect("shape validated at construction")
                .sample(rng),
            WeightModel::Deterministic { values } => values[i],
        }
    }
}

fn check_stability_index(gamma_index: f64) -> Result<(), WeightError> {
    if gamma_index > 0.0 && gamma_index < 1.0 {
        Ok(())
    } else {
        Err(WeightError::StabilityIndex(gamma_index))
    }
}

/// Normalized request probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityVector {
    p: Vec<f64>,
    /// Pre-normalization total `W_n`.
    total: f64,
}

impl PopularityVector {
    /// Normalizes nonnegative weights with a positive finite total.
    pub fn from_weights(weights: &[f64]) -> Option<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return None;
        }
        let p = weights.iter().map(|w| w / total).collect();
        Some(PopularityVector { p, total })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// One draw `X > 0` with `E[exp(−sX)] = exp(−scale · s^γ)`.
///
/// Kanter's representation: with `U` uniform on `(0, π)` and `E` standard
/// exponential, `(A(U)/E)^{(1−γ)/γ}` is positive γ-stable with unit scale,
/// where `A(u) = (sin(γu)/sin u)^{1/(1−γ)} · sin((1−γ)u)/sin(γu)`.
pub fn sample_stable<R: Rng + ?Sized>(gamma_index: f64, scale: f64, rng: &mut R) -> f64 {
    assert!(
        gamma_index > 0.0 && gamma_index < 1.0,
        "stability index {gamma_index} outside (0, 1)"
    );
    let u = loop {
        let v: f64 = rng.gen();
        if v > 0.0 {
            break v * PI;
        }
    };
    let e = loop {
        let v: f64 = Exp1.sample(rng);
        if v > 0.0 {
            break v;
        }
    };
    let g = gamma_index;
    let ln_a = ((g * u).sin().ln() - u.sin().ln()) / (1.0 - g) + ((1.0 - g) * u).sin().ln()
        - (g * u).sin().ln();
    let ln_x = (1.0 - g) / g * (ln_a - e.ln()) + scale.ln() / g;
    ln_x.exp()
}

/// Draws `n` weights from `model` and normalizes them.
///
/// Draws whose total overflows (or underflows to zero) are discarded; after
/// [`MAX_RESAMPLES`] consecutive failures an error is returned.
pub fn sample_popularities<R: Rng + ?Sized>(
    model: &WeightModel,
    rng: &mut R,
) -> Result<PopularityVector, WeightError> {
    let n = model.n();
    let mut weights = vec![0.0; n];
    for attempt in 0..MAX_RESAMPLES {
        for (i, w) in weights.iter_mut().enumerate() {
            *w = model.sample_weight(i, rng);
        }
        if let Some(p) = PopularityVector::from_weights(&weights) {
            return Ok(p);
        }
        warn!(
            "non-finite weight total, resampling (attempt {})",
            attempt + 1
        );
    }
    Err(WeightError::Overflow(MAX_RESAMPLES))
}

/// Independent random stream number `index` derived from a base seed.
///
/// The splitting rule is `seed + index` (wrapping), fed to ChaCha8.
pub fn rng_stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_examples() {
        let m = WeightModel::stable(0.5, 4).unwrap();
        assert_eq!(m.laplace_weight(0, 0.0), 1.0);
        assert!((m.laplace_weight(2, 1.0) - (-0.25f64).exp()).abs() < 1e-15);
        let d = WeightModel::deterministic(vec![2.0]).unwrap();
        assert!((d.laplace_weight(0, 3.0) - (-6.0f64).exp()).abs() < 1e-16);
        let g = WeightModel::gamma(2.0, 3).unwrap();
        assert!((g.laplace_weight(1, 1.0) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn model_validation() {
        assert_eq!(
            WeightModel::stable(1.0, 3),
            Err(WeightError::StabilityIndex(1.0))
        );
        assert_eq!(
            WeightModel::stable(0.0, 3),
            Err(WeightError::StabilityIndex(0.0))
        );
        assert_eq!(WeightModel::stable(0.5, 0), Err(WeightError::Empty));
        assert!(matches!(
            WeightModel::gamma(-1.0, 3),
            Err(WeightError::Shape(_))
        ));
        assert!(matches!(
            WeightModel::deterministic(vec![1.0, 0.0]),
            Err(WeightError::NonPositiveWeight { index: 1, .. })
        ));
        assert_eq!(WeightModel::deterministic(vec![]), Err(WeightError::Empty));
    }

    #[test]
    fn deterministic_equal_weights_are_uniform() {
        let m = WeightModel::deterministic(vec![1.0; 4]).unwrap();
        let p = sample_popularities(&m, &mut rng_stream(1, 0)).unwrap();
        assert_eq!(p.probabilities(), &[0.25; 4]);
        assert_eq!(p.total(), 4.0);
    }

    #[test]
    fn stable_popularities_normalized_and_positive() {
        let m = WeightModel::stable(0.3, 100).unwrap();
        let mut rng = rng_stream(7, 0);
        for _ in 0..50 {
            let p = sample_popularities(&m, &mut rng).unwrap();
            let sum: f64 = p.probabilities().iter().sum();
            assert!((sum - 1.0).abs() < SUM_TOL);
            assert!(p.probabilities().iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn stable_draws_positive() {
        let mut rng = rng_stream(3, 0);
        for &g in &[0.05, 0.3, 0.5, 0.9] {
            assert!((0..10_000).all(|_| sample_stable(g, 1.0, &mut rng) > 0.0));
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<f64> = (0..5).map(|_| rng_stream(42, 3).gen()).collect();
        let b: Vec<f64> = (0..5).map(|_| rng_stream(42, 3).gen()).collect();
        assert_eq!(a, b);
        let x: u64 = rng_stream(42, 0).gen();
        let y: u64 = rng_stream(42, 1).gen();
        assert_ne!(x, y);
    }

    #[test]
    fn from_weights_rejects_bad_totals() {
        assert!(PopularityVector::from_weights(&[f64::INFINITY, 1.0]).is_none());
        assert!(PopularityVector::from_weights(&[0.0, 0.0]).is_none());
        assert!(PopularityVector::from_weights(&[f64::NAN, 1.0]).is_none());
    }
}
