use mtf_moments::analytic::finite_n_moment;
use mtf_moments::montecarlo::{
    chain_estimate, exact_stationary_cost, mc_moments, McConfig, McEstimate, McMethod,
    RequestSampler, BURN_IN_PER_ITEM,
};
use mtf_moments::weights::{rng_stream, PopularityVector, WeightModel};

fn config(k_max: usize, weight_draws: usize, costs_per_draw: usize, seed: u64) -> McConfig {
    McConfig {
        k_max,
        weight_draws,
        costs_per_draw,
        burn_in: None,
        seed,
    }
}

fn agree(a: &McEstimate, b: &McEstimate) -> bool {
    (a.mean - b.mean).abs() <= 3.0 * a.stderr.hypot(b.stderr)
}

#[test]
fn two_item_chain_is_symmetric() {
    let model = WeightModel::deterministic(vec![1.0, 1.0]).unwrap();
    let est = chain_estimate(&model, 1, 10, 1000, 50, 3).unwrap();
    assert!(
        (est[0].mean - 0.5).abs() <= 3.0 * est[0].stderr,
        "{:?}",
        est[0]
    );
}

#[test]
fn exact_sampler_symmetric_pair() {
    let p = PopularityVector::from_weights(&[1.0, 1.0]).unwrap();
    let sampler = RequestSampler::new(&p);
    let mut rng = rng_stream(4, 0);
    let n = 100_000;
    let hits = (0..n)
        .map(|_| exact_stationary_cost(&p, &sampler, &mut rng))
        .sum::<usize>() as f64;
    let mean = hits / n as f64;
    assert!(
        (mean - 0.5).abs() <= 3.0 * 0.5 / (n as f64).sqrt(),
        "{mean}"
    );
}

#[test]
fn methods_agree_at_quarter() {
    let model = WeightModel::stable(0.25, 200).unwrap();
    let cfg = config(2, 200, 500, 17);
    let chain = mc_moments(&model, &cfg, McMethod::Chain).unwrap();
    let exact = mc_moments(&model, &cfg, McMethod::ExactAges).unwrap();
    for k in 0..2 {
        assert!(
            agree(&chain[k], &exact[k]),
            "k = {}: {:?} vs {:?}",
            k + 1,
            chain[k],
            exact[k]
        );
        let target = finite_n_moment(0.25, 200, k + 1).unwrap();
        assert!(
            (exact[k].mean - target).abs() <= 3.0 * exact[k].stderr,
            "k = {}",
            k + 1
        );
    }
}

#[test]
fn doubling_burn_in_changes_nothing() {
    let model = WeightModel::stable(0.25, 200).unwrap();
    let base = config(2, 200, 500, 23);
    let doubled = McConfig {
        burn_in: Some(2 * BURN_IN_PER_ITEM * 200),
        seed: 10_023,
        ..base
    };
    let a = mc_moments(&model, &base, McMethod::Chain).unwrap();
    let b = mc_moments(&model, &doubled, McMethod::Chain).unwrap();
    for k in 0..2 {
        assert!(
            agree(&a[k], &b[k]),
            "k = {}: {:?} vs {:?}",
            k + 1,
            a[k],
            b[k]
        );
    }
}

#[test]
fn reproducible_across_thread_counts() {
    let model = WeightModel::stable(0.3, 50).unwrap();
    let cfg = config(3, 16, 200, 99);
    let run = |threads: usize, method: McMethod| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_moments(&model, &cfg, method).unwrap())
    };
    for method in [McMethod::Chain, McMethod::ExactAges] {
        let one = run(1, method);
        assert_eq!(one, run(1, method));
        assert_eq!(one, run(4, method));
    }
    let other = mc_moments(&model, &config(3, 16, 200, 100), McMethod::ExactAges).unwrap();
    assert_ne!(run(1, McMethod::ExactAges), other);
}

#[test]
fn kingman_limit_at_large_n() {
    let model = WeightModel::stable(0.25, 2000).unwrap();
    let est = mc_moments(&model, &config(1, 100, 200, 8), McMethod::ExactAges).unwrap();
    let allowance = (3.0 * est[0].stderr).max(0.05 * 0.5);
    assert!((est[0].mean - 0.5).abs() <= allowance, "{:?}", est[0]);
}

#[test]
fn divergent_regime_grows_with_n() {
    let means: Vec<f64> = [100, 400, 1600]
        .iter()
        .map(|&n| {
            let model = WeightModel::stable(0.4, n).unwrap();
            mc_moments(&model, &config(2, 200, 200, 12), McMethod::ExactAges).unwrap()[1].mean
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
}

#[test]
fn gamma_weights_smoke() {
    let model = WeightModel::gamma(1.0, 100).unwrap();
    let est = mc_moments(&model, &config(1, 20, 200, 1), McMethod::ExactAges).unwrap();
    assert!(est[0].mean > 0.0 && est[0].mean < 99.0 && est[0].stderr > 0.0);
    assert_eq!(est[0].samples, 20);
}
