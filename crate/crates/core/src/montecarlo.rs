//! Monte Carlo estimates of the annealed search-cost moments `E[S_n^k]`.
//!
//! Two-level scheme: each outer draw samples fresh popularities, the inner
//! loop samples stationary search costs given those popularities, and the
//! standard error is taken over the outer per-draw means (inner samples from
//! the chain are correlated, outer draws are independent).

use rand::Rng;
use rand_distr::{Distribution, Exp1, WeightedAliasIndex};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::weights::{rng_stream, sample_popularities, PopularityVector, WeightError, WeightModel};

/// Default burn-in, in steps per item.
pub const BURN_IN_PER_ITEM: usize = 50;

/// The full permutation is verified once every this many steps; debug builds
/// also check the moved prefix on every step.
const FULL_CHECK_EVERY: u64 = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("invalid Monte Carlo configuration: {0}")]
    Config(String),
    #[error("ordering is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error(transparent)]
    Weights(#[from] WeightError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum McMethod {
    /// Explicit move-to-front chain after burn-in.
    Chain,
    /// Independent stationary draws from exponential ages.
    ExactAges,
}

impl McMethod {
    pub fn label(self) -> &'static str {
        match self {
            McMethod::Chain => "mc_chain",
            McMethod::ExactAges => "mc_exact",
        }
    }
}

/// Monte Carlo estimate of `E[S_n^k]` for one order `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub order: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Number of independent outer (popularity) draws.
    pub samples: usize,
    /// Search costs recorded per outer draw.
    pub costs_per_draw: usize,
    pub seed: u64,
    pub method: McMethod,
}

/// List ordering with an index for O(1) position lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListState {
    order: Vec<usize>,
    position: Vec<usize>,
    steps: u64,
}

impl ListState {
    pub fn identity(n: usize) -> Self {
        ListState {
            order: (0..n).collect(),
            position: (0..n).collect(),
            steps: 0,
        }
    }

    pub fn from_ordering(order: Vec<usize>) -> Result<Self, McError> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (pos, &item) in order.iter().enumerate() {
            if item >= n || position[item] != usize::MAX {
                return Err(McError::NotPermutation(n));
            }
            position[item] = pos;
        }
        Ok(ListState {
            order,
            position,
            steps: 0,
        })
    }

    /// Uniformly random ordering.
    pub fn shuffled<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self::from_ordering(order).expect("shuffle preserves the permutation")
    }

    /// Most popular item first, ties broken by index.
    ///
    /// Items too unpopular to be requested during burn-in keep their start
    /// positions, and at stationarity those sit roughly in this order; a
    /// random start instead leaves them scattered and inflates higher
    /// moments for a very long time under heavy-tailed popularities.
    pub fn by_popularity(p: &PopularityVector) -> Self {
        let probs = p.probabilities();
        let mut order: Vec<usize> = (0..probs.len()).collect();
        order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
        Self::from_ordering(order).expect("sorting preserves the permutation")
    }

    pub fn ordering(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of items strictly above `item`.
    pub fn position(&self, item: usize) -> usize {
        self.position[item]
    }

    /// Serves a request for `item`: returns its search cost and moves it to
    /// the front, keeping the relative order of the others.
    pub fn request(&mut self, item: usize) -> usize {
        let cost = self.position[item];
        self.order.copy_within(0..cost, 1);
        self.order[0] = item;
        for (pos, &moved) in self.order[..=cost].iter().enumerate() {
            self.position[moved] = pos;
        }
        self.steps += 1;
        debug_assert!(self.order[..=cost]
            .iter()
            .enumerate()
            .all(|(p, &i)| self.position[i] == p));
        if self.steps.is_multiple_of(FULL_CHECK_EVERY) {
            assert!(
                self.is_permutation(),
                "list ordering corrupted after {} steps",
                self.steps
            );
        }
        cost
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.order.len();
        let mut seen = vec![false; n];
        for (pos, &item) in self.order.iter().enumerate() {
            if item >= n || seen[item] || self.position[item] != pos {
                return false;
            }
            seen[item] = true;
        }
        true
    }
}

/// Draws requested items according to a popularity vector.
#[derive(Debug, Clone)]
pub struct RequestSampler {
    alias: Option<WeightedAliasIndex<f64>>,
}

impl RequestSampler {
    pub fn new(p: &PopularityVector) -> Self {
        let alias = if p.len() > 1 {
            Some(
                WeightedAliasIndex::new(p.probabilities().to_vec())
                    .expect("popularities are a valid distribution"),
            )
        } else {
            None
        };
        RequestSampler { alias }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.alias {
            Some(a) => a.sample(rng),
            None => 0,
        }
    }
}

/// One step of the chain: draws a request from `sampler`, serves it, and
/// returns the search cost.
pub fn chain_step<R: Rng + ?Sized>(
    state: &mut ListState,
    sampler: &RequestSampler,
    rng: &mut R,
) -> usize {
    let item = sampler.sample(rng);
    state.request(item)
}

/// Exact draw from the stationary search-cost law given `p`.
///
/// With independent ages `E_j ~ Exp(p_j)` (time since item `j` was last
/// requested) the stationary list is sorted by age; the cost of a request
/// for `I ~ p` is the number of items younger than `I`.
pub fn exact_stationary_cost<R: Rng + ?Sized>(
    p: &PopularityVector,
    sampler: &RequestSampler,
    rng: &mut R,
) -> usize {
    let probs = p.probabilities();
    let requested = sampler.sample(rng);
    let e: f64 = Exp1.sample(rng);
    let age = e / probs[requested];
    let mut cost = 0;
    for (j, &pj) in probs.iter().enumerate() {
        if j == requested {
            continue;
        }
        let ej: f64 = Exp1.sample(rng);
        // E_j < age  ⇔  Exp1 < p_j · age  (p_j = 0 never precedes)
        if ej < pj * age {
            cost += 1;
        }
    }
    cost
}

/// Settings of a two-level Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub k_max: usize,
    pub weight_draws: usize,
    pub costs_per_draw: usize,
    /// Chain burn-in; `None` means `BURN_IN_PER_ITEM · n`.
    pub burn_in: Option<usize>,
    pub seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.k_max == 0 {
            return Err(McError::Config("k_max must be at least 1".into()));
        }
        if self.weight_draws < 2 {
            return Err(McError::Config("need at least 2 weight draws".into()));
        }
        if self.costs_per_draw == 0 {
            return Err(McError::Config(
                "need at least 1 cost draw per weight draw".into(),
            ));
        }
        Ok(())
    }
}

/// Per-draw means of `S^k`, `k = 1..=k_max`.
fn draw_means(
    model: &WeightModel,
    config: &McConfig,
    method: McMethod,
    index: u64,
) -> Result<Vec<f64>, McError> {
    let mut rng = rng_stream(config.seed, index);
    let p = sample_popularities(model, &mut rng)?;
    let sampler = RequestSampler::new(&p);
    let mut sums = vec![0.0; config.k_max];
    let mut record = |cost: usize| {
        let c = cost as f64;
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            pow *= c;
            *s += pow;
        }
    };
    match method {
        McMethod::ExactAges => {
            for _ in 0..config.costs_per_draw {
                record(exact_stationary_cost(&p, &sampler, &mut rng));
            }
        }
        McMethod::Chain => {
            let n = model.n();
            let mut state = ListState::by_popularity(&p);
            let burn_in = config.burn_in.unwrap_or(BURN_IN_PER_ITEM * n);
            for _ in 0..burn_in {
                chain_step(&mut state, &sampler, &mut rng);
            }
            for _ in 0..config.costs_per_draw {
                record(chain_step(&mut state, &sampler, &mut rng));
            }
        }
    }
    let m = config.costs_per_draw as f64;
    Ok(sums.into_iter().map(|s| s / m).collect())
}

/// Two-level Monte Carlo estimates of `E[S_n^k]` for `k = 1..=k_max`.
///
/// Outer draw `i` uses the stream `rng_stream(seed, i)`; draws run in
/// parallel and are reduced in index order, so results do not depend on
/// scheduling.
pub fn mc_moments(
    model: &WeightModel,
    config: &McConfig,
    method: McMethod,
) -> Result<Vec<McEstimate>, McError> {
    config.validate()?;
    let per_draw: Vec<Vec<f64>> = (0..config.weight_draws as u64)
        .into_par_iter()
        .map(|i| draw_means(model, config, method, i))
        .collect::<Result<_, _>>()?;
    let draws = per_draw.len() as f64;
    Ok((0..config.k_max)
        .map(|k| {
            let mean = per_draw.iter().map(|d| d[k]).sum::<f64>() / draws;
            let var = per_draw.iter().map(|d| (d[k] - mean).powi(2)).sum::<f64>() / (draws - 1.0);
            McEstimate {
                order: k + 1,
                mean,
                stderr: (var / draws).sqrt(),
                samples: per_draw.len(),
                costs_per_draw: config.costs_per_draw,
                seed: config.seed,
                method,
            }
        })
        .collect())
}

/// Chain-based estimate: `replicates` popularity draws, each run for
/// `burn_in` steps from [`ListState::by_popularity`] before `samples` costs
/// are kept.
pub fn chain_estimate(
    model: &WeightModel,
    k_max: usize,
    burn_in: usize,
    samples: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<McEstimate>, McError> {
    if samples < 2 {
        return Err(McError::Config(
            "need at least 2 samples per replicate".into(),
        ));
    }
    let config = McConfig {
        k_max,
        weight_draws: replicates,
        costs_per_draw: samples,
        burn_in: Some(burn_in),
        seed,
    };
    mc_moments(model, &config, McMethod::Chain)
}
