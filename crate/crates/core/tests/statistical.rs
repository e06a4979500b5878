mod common;

use std::collections::BTreeMap;

use allelic::ctmc::{
    simulate_bdi, simulate_branching_from, simulate_from, Engine, MultiplicityEngine, SimOptions,
};
use allelic::montecarlo::{
    self, batch_mean_se, replicate_rng, stationary_occupation, stationary_occupation_batches,
    EmpiricalDistribution, EngineKind, EnsembleConfig,
};
use allelic::partitions::enumerate;
use allelic::urn::sample_psf;
use allelic::{AllelicPartition, ModelParams, TransitionEvent};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(alpha: f64, theta: f64, mu: f64) -> ModelParams {
    ModelParams::new(alpha, theta, mu).unwrap()
}

fn p(pairs: &[(usize, usize)]) -> AllelicPartition {
    AllelicPartition::from_multiplicities(pairs.iter().copied()).unwrap()
}

#[test]
fn urn_samples_follow_pitman_law() {
    let two = params(0.5, 0.5, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let hits = (0..100_000)
        .filter(|_| sample_psf(2, &two, &mut rng).unwrap() == p(&[(2, 1)]))
        .count();
    assert!((hits as f64 / 1e5 - 1.0 / 3.0).abs() < 0.01);

    let hoppe = params(0.0, 1.0, 0.0);
    let mut emp = EmpiricalDistribution::new(102);
    for _ in 0..100_000 {
        emp.record(sample_psf(8, &hoppe, &mut rng).unwrap());
    }
    let keys = enumerate(8).unwrap();
    let exact = common::table(&keys, |m| common::esf(1.0, m));
    assert!(montecarlo::tv_distance(&emp.probabilities(), &exact) < 0.02);
}

#[test]
fn first_jump_from_empty_is_unit_exponential() {
    let prm = params(0.3, 1.0, 2.0);
    let times: Vec<f64> = (0..10_000)
        .map(|r| {
            let mut rng = replicate_rng(55, r);
            let mut engine =
                MultiplicityEngine::new(prm, AllelicPartition::empty(), SimOptions::default());
            let (t, e) = engine.next_jump(f64::INFINITY, &mut rng).unwrap().unwrap();
            assert_eq!(e, TransitionEvent::NewFamily);
            t
        })
        .collect();
    let d = montecarlo::ks_statistic(&times, |x| 1.0 - (-x).exp());
    assert!(montecarlo::ks_pvalue(d, times.len()) > 0.01, "KS d = {d}");
}

#[test]
fn item_count_at_null_recurrent_boundary() {
    let prm = params(0.0, 1.0, 1.0);
    let zeros = (0..100_000u64)
        .filter(|&r| {
            let traj =
                simulate_bdi(&prm, 1.0, SimOptions::default(), &mut replicate_rng(8, r)).unwrap();
            traj.final_value() == 0
        })
        .count();
    assert!((zeros as f64 / 1e5 - 0.5).abs() < 0.01);
}

#[test]
fn ensembles_cover_trivial_cases() {
    let cfg = EnsembleConfig::new(params(0.2, 1.0, 2.0), 0.0, 1, 3, EngineKind::Multiplicity);
    let res = montecarlo::run_ensemble(&cfg).unwrap();
    let parts = res.partitions.unwrap();
    assert_eq!(parts.probability(&AllelicPartition::empty()), 1.0);
    assert_eq!(parts.replicates, 1);
}

#[test]
fn bdi_engine_matches_negative_binomial() {
    let (theta, mu, t) = (2.5, 1.5, 2.0);
    let cfg = EnsembleConfig::new(params(0.0, theta, mu), t, 50_000, 9, EngineKind::Bdi);
    let res = montecarlo::run_ensemble(&cfg).unwrap();
    assert!(res.partitions.is_none());
    let b = common::b_t(mu, t);
    let emp = res.sizes.probabilities();
    let exact: BTreeMap<usize, f64> = (0..=*emp.keys().last().unwrap())
        .map(|n| (n, common::neg_bin(n, theta, b)))
        .collect();
    assert!(montecarlo::tv_distance(&emp, &exact) < 0.02);
}

#[test]
fn engines_agree_on_partitions() {
    let prm = params(0.5, 1.0, 2.0);
    let run = |engine| {
        let cfg = EnsembleConfig::new(prm, 1.0, 100_000, 21, engine);
        montecarlo::run_ensemble(&cfg)
            .unwrap()
            .partitions
            .unwrap()
            .probabilities()
    };
    let tv = montecarlo::tv_distance(&run(EngineKind::Multiplicity), &run(EngineKind::Branching));
    assert!(tv < 0.03, "TV = {tv}");
}

#[test]
fn engines_agree_below_zero_theta() {
    // negative theta, started from two singletons; the oldest-individual rule drives immigration
    let prm = params(0.5, -0.25, 2.0);
    let start = p(&[(1, 2)]);
    let reps = 60_000u64;
    let mut a = EmpiricalDistribution::new(0);
    let mut b = EmpiricalDistribution::new(0);
    for r in 0..reps {
        let ta = simulate_from(
            &prm,
            start.clone(),
            1.0,
            SimOptions::default(),
            &mut replicate_rng(31, r),
        )
        .unwrap();
        let tb = simulate_branching_from(
            &prm,
            start.clone(),
            1.0,
            SimOptions::default(),
            &mut replicate_rng(32, r),
        )
        .unwrap();
        a.record(ta.final_state());
        b.record(tb.final_state());
    }
    let tv = montecarlo::tv_distance(&a.probabilities(), &b.probabilities());
    assert!(tv < 0.03, "TV = {tv}");
}

#[test]
fn mean_jump_count_matches_generator() {
    // alpha = 0, theta = 1, mu = 2: E S(u) = 1 - e^{-u}, so the expected number
    // of jumps in [0, t] is t + 3 (t - 1 + e^{-t})
    let prm = params(0.0, 1.0, 2.0);
    for &t in &[1.0f64, 5.0] {
        let counts: Vec<f64> = (0..20_000u64)
            .map(|r| {
                simulate_from(
                    &prm,
                    AllelicPartition::empty(),
                    t,
                    SimOptions::default(),
                    &mut replicate_rng(77, r),
                )
                .unwrap()
                .len() as f64
            })
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expected = t + 3.0 * (t - 1.0 + (-t).exp());
        assert!(
            (mean - expected).abs() < 4.0 * (var / n).sqrt(),
            "t = {t}: {mean} vs {expected}"
        );
    }
}

#[test]
fn bdi_occupation_is_geometric() {
    let prm = params(0.0, 1.0, 2.0);
    let traj = simulate_bdi(
        &prm,
        20_000.0,
        SimOptions::default(),
        &mut replicate_rng(4, 0),
    )
    .unwrap();
    let mut occupation = BTreeMap::new();
    let mut last = (0.0, 0usize);
    for &(t, n) in traj.jumps.iter().chain(std::iter::once(&(traj.horizon, 0))) {
        *occupation.entry(last.1).or_insert(0.0) += t - last.0;
        last = (t, n);
    }
    for n in 0..5 {
        let frac = occupation.get(&n).copied().unwrap_or(0.0) / traj.horizon;
        assert!(
            (frac - 0.5f64.powi(n as i32 + 1)).abs() < 0.01,
            "n = {n}: {frac}"
        );
    }
}

#[test]
fn occupation_within_three_standard_errors() {
    let (alpha, theta, mu) = (0.5, 1.0, 2.0);
    let batches =
        stationary_occupation_batches(&params(alpha, theta, mu), 1e5, 100.0, 40, 12).unwrap();
    for n in 0..=5 {
        for m in enumerate(n).unwrap() {
            let (mean, se) = batch_mean_se(&batches, &m);
            let exact = common::pi(alpha, theta, mu, &m);
            assert!(
                (mean - exact).abs() < 3.0 * se + 1e-4,
                "{m}: {mean} +- {se} vs {exact}"
            );
        }
    }
}

#[test]
fn occupation_rejects_empty_window() {
    assert!(stationary_occupation(&params(0.5, 1.0, 2.0), 100.0, 100.0, 1).is_err());
    assert!(stationary_occupation(&params(0.5, 1.0, 0.8), 1e3, 100.0, 1).is_err());
}

#[test]
fn monte_carlo_error_shrinks_like_root_r() {
    let prm = params(0.0, 1.0, 2.0);
    let half_tv = |r: u64, seed: u64| {
        let run = |s| {
            let cfg = EnsembleConfig::new(prm, 2.0, r, s, EngineKind::Bdi);
            montecarlo::run_ensemble(&cfg)
                .unwrap()
                .sizes
                .probabilities()
        };
        montecarlo::tv_distance(&run(seed), &run(seed + 1))
    };
    let repeats = 8;
    let small: f64 = (0..repeats)
        .map(|j| half_tv(10_000, 1000 + 2 * j))
        .sum::<f64>()
        / repeats as f64;
    let large: f64 = (0..repeats)
        .map(|j| half_tv(20_000, 5000 + 2 * j))
        .sum::<f64>()
        / repeats as f64;
    let ratio = small / large;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.3, "ratio = {ratio}");
}

#[test]
fn ensembles_do_not_depend_on_worker_count() {
    let prm = params(0.4, 0.8, 1.5);
    for engine in [
        EngineKind::Multiplicity,
        EngineKind::Branching,
        EngineKind::Bdi,
    ] {
        let mut one = EnsembleConfig::new(prm, 2.0, 3000, 5, engine);
        one.workers = Some(1);
        let mut many = one;
        many.workers = Some(3);
        let a = montecarlo::run_ensemble(&one).unwrap();
        let b = montecarlo::run_ensemble(&many).unwrap();
        assert_eq!(a.sizes.weights(), b.sizes.weights());
        assert_eq!(
            a.partitions.map(|d| d.weights().clone()),
            b.partitions.map(|d| d.weights().clone())
        );
    }
}
