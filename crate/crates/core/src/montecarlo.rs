//! Replicate ensembles and the statistics used to compare them with exact laws.
//!
//! Every replicate draws from its own ChaCha8 stream, selected by
//! `(master seed, replicate index)`, and results are tallied in replicate
//! order. Output is therefore bit-identical for a given seed no matter how
//! many worker threads run the ensemble.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ctmc::{BranchingEngine, Engine, MultiplicityEngine, SimOptions, SizeEngine};
use crate::error::{Error, Result};
use crate::formulae::ModelParams;
use crate::partitions::AllelicPartition;
use crate::urn;

/// Random stream for one replicate.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Weighted tallies over keys (partitions or integers).
///
/// For ensembles the weights are replicate counts and sum to the replicate
/// count; for occupation measures they are times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution<K: Ord> {
    weights: BTreeMap<K, f64>,
    total: f64,
    pub replicates: u64,
    pub seed: u64,
}

impl<K: Ord + Clone> EmpiricalDistribution<K> {
    pub fn new(seed: u64) -> Self {
        Self {
            weights: BTreeMap::new(),
            total: 0.0,
            replicates: 0,
            seed,
        }
    }

    pub fn add(&mut self, key: K, weight: f64) {
        *self.weights.entry(key).or_insert(0.0) += weight;
        self.total += weight;
    }

    /// Adds one replicate observation.
    pub fn record(&mut self, key: K) {
        self.add(key, 1.0);
        self.replicates += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for (k, &w) in &other.weights {
            *self.weights.entry(k.clone()).or_insert(0.0) += w;
        }
        self.total += other.total;
        self.replicates += other.replicates;
    }

    pub fn weights(&self) -> &BTreeMap<K, f64> {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn probability(&self, key: &K) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        self.weights.get(key).copied().unwrap_or(0.0) / self.total
    }

    pub fn probabilities(&self) -> BTreeMap<K, f64> {
        self.weights
            .iter()
            .map(|(k, &w)| (k.clone(), w / self.total))
            .collect()
    }

    /// Pushes weights through `f`, merging keys that collide.
    pub fn map_keys<J: Ord + Clone>(&self, f: impl Fn(&K) -> J) -> EmpiricalDistribution<J> {
        let mut out = EmpiricalDistribution::new(self.seed);
        for (k, &w) in &self.weights {
            out.add(f(k), w);
        }
        out.replicates = self.replicates;
        out
    }

    /// Writes `key,count,probability` rows after `#` metadata lines.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &[String]) -> Result<()>
    where
        K: fmt::Display,
    {
        writeln!(out, "# allelic {}", crate::VERSION)?;
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# replicates={} seed={}", self.replicates, self.seed)?;
        writeln!(out, "key,count,probability")?;
        for (k, &w) in &self.weights {
            writeln!(out, "{k},{w},{}", w / self.total)?;
        }
        Ok(())
    }
}

impl EmpiricalDistribution<usize> {
    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .map(|(&k, &w)| k as f64 * w)
            .sum::<f64>()
            / self.total
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.weights
            .iter()
            .map(|(&k, &w)| (k as f64 - mean).powi(2) * w)
            .sum::<f64>()
            / self.total
    }
}

/// Which simulator drives an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    /// Gillespie on multiplicities.
    Multiplicity,
    /// Individual-level branching construction.
    Branching,
    /// Scalar item-count process only.
    Bdi,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Multiplicity => "multiplicity",
            EngineKind::Branching => "branching",
            EngineKind::Bdi => "bdi",
        })
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplicity" => Ok(EngineKind::Multiplicity),
            "branching" => Ok(EngineKind::Branching),
            "bdi" => Ok(EngineKind::Bdi),
            other => Err(Error::domain(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnsembleConfig {
    pub params: ModelParams,
    pub t: f64,
    pub replicates: u64,
    pub seed: u64,
    pub engine: EngineKind,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub sim: SimOptions,
}

impl EnsembleConfig {
    pub fn new(
        params: ModelParams,
        t: f64,
        replicates: u64,
        seed: u64,
        engine: EngineKind,
    ) -> Self {
        Self {
            params,
            t,
            replicates,
            seed,
            engine,
            workers: None,
            sim: SimOptions::default(),
        }
    }
}

/// States at time `t` across replicates.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    /// Joint law of `M(t)`; absent for the scalar engine.
    pub partitions: Option<EmpiricalDistribution<AllelicPartition>>,
    /// Law of `S(t)`.
    pub sizes: EmpiricalDistribution<usize>,
    /// Law of `K(t)`; absent for the scalar engine.
    pub groups: Option<EmpiricalDistribution<usize>>,
}

impl EnsembleResult {
    /// Joint law of `(K(t), S(t))`.
    pub fn joint_ks(&self) -> Option<EmpiricalDistribution<(usize, usize)>> {
        self.partitions
            .as_ref()
            .map(|d| d.map_keys(|m| (m.num_groups(), m.size())))
    }
}

pub(crate) fn with_workers<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::domain(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

enum Final {
    Partition(AllelicPartition),
    Size(usize),
}

fn run_replicate(cfg: &EnsembleConfig, index: u64) -> Result<Final> {
    let mut rng = replicate_rng(cfg.seed, index);
    let empty = AllelicPartition::empty();
    match cfg.engine {
        EngineKind::Multiplicity => {
            let mut engine = MultiplicityEngine::new(cfg.params, empty, cfg.sim);
            engine.run_until(cfg.t, &mut rng, |_, _, _| {})?;
            Ok(Final::Partition(engine.state().clone()))
        }
        EngineKind::Branching => {
            let mut engine = BranchingEngine::new(cfg.params, &empty, cfg.sim);
            engine.run_until(cfg.t, &mut rng, |_, _, _| {})?;
            Ok(Final::Partition(engine.state().clone()))
        }
        EngineKind::Bdi => {
            let mut engine = SizeEngine::new(cfg.params, 0, cfg.sim);
            while engine.next_jump(cfg.t, &mut rng)?.is_some() {}
            Ok(Final::Size(engine.size()))
        }
    }
}

/// Runs `replicates` independent chains from `e0` to time `t`.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    if cfg.replicates == 0 {
        return Err(Error::domain("an ensemble needs at least one replicate"));
    }
    if !(cfg.t >= 0.0 && cfg.t.is_finite()) {
        return Err(Error::domain(format!(
            "t must be finite and >= 0, got {}",
            cfg.t
        )));
    }
    if cfg.engine != EngineKind::Bdi {
        crate::ctmc::gillespie_refuse_empty_start(&cfg.params)?;
    }
    let finals: Vec<Final> = with_workers(cfg.workers, || {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| run_replicate(cfg, r))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut sizes = EmpiricalDistribution::new(cfg.seed);
    let (mut partitions, mut groups) = match cfg.engine {
        EngineKind::Bdi => (None, None),
        _ => (
            Some(EmpiricalDistribution::new(cfg.seed)),
            Some(EmpiricalDistribution::new(cfg.seed)),
        ),
    };
    for f in finals {
        match f {
            Final::Partition(m) => {
                sizes.record(m.size());
                if let Some(g) = groups.as_mut() {
                    g.record(m.num_groups());
                }
                if let Some(p) = partitions.as_mut() {
                    p.record(m);
                }
            }
            Final::Size(n) => sizes.record(n),
        }
    }
    Ok(EnsembleResult {
        partitions,
        sizes,
        groups,
    })
}

/// Total variation distance `1/2 sum |p - q|` over the union of supports,
/// plus half the gap between the missing (tail) masses `1 - sum p` and
/// `1 - sum q`, which are treated as one extra atom.
pub fn tv_distance<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut diff = 0.0;
    for (k, &pk) in p {
        diff += (pk - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &qk) in q {
        if !p.contains_key(k) {
            diff += qk.abs();
        }
    }
    let tail_p = 1.0 - p.values().sum::<f64>();
    let tail_q = 1.0 - q.values().sum::<f64>();
    (0.5 * (diff + (tail_p - tail_q).abs())).clamp(0.0, 1.0)
}

/// Keeps only the keys satisfying `keep`; the dropped mass becomes tail mass
/// in [`tv_distance`].
pub fn restrict<K: Ord + Clone>(
    p: &BTreeMap<K, f64>,
    keep: impl Fn(&K) -> bool,
) -> BTreeMap<K, f64> {
    p.iter()
        .filter(|(k, _)| keep(k))
        .map(|(k, &v)| (k.clone(), v))
        .collect()
}

/// Time-weighted occupation of each state on `[burn_in, horizon]` along a
/// single run from `e0`, split into `batches` equal windows.
pub fn stationary_occupation_batches(
    params: &ModelParams,
    horizon: f64,
    burn_in: f64,
    batches: usize,
    seed: u64,
) -> Result<Vec<EmpiricalDistribution<AllelicPartition>>> {
    params.require_reversible()?;
    crate::ctmc::gillespie_refuse_empty_start(params)?;
    if !(horizon > burn_in) || !(burn_in >= 0.0) || !horizon.is_finite() {
        return Err(Error::domain(format!(
            "occupation window [{burn_in}, {horizon}] is empty"
        )));
    }
    if batches == 0 {
        return Err(Error::domain("at least one batch is required"));
    }
    let width = (horizon - burn_in) / batches as f64;
    let edges: Vec<f64> = (0..=batches)
        .map(|b| {
            if b == batches {
                horizon
            } else {
                burn_in + b as f64 * width
            }
        })
        .collect();
    let mut out: Vec<EmpiricalDistribution<AllelicPartition>> = (0..batches)
        .map(|_| EmpiricalDistribution::new(seed))
        .collect();

    let mut rng = replicate_rng(seed, 0);
    let mut engine =
        MultiplicityEngine::new(*params, AllelicPartition::empty(), SimOptions::default());
    let mut credit = |state: &AllelicPartition, from: f64, to: f64| {
        let (from, to) = (from.max(burn_in), to.min(horizon));
        if to <= from {
            return;
        }
        // the holding interval may straddle batch edges
        let first = (((from - burn_in) / width) as usize).min(batches - 1);
        for (b, dist) in out.iter_mut().enumerate().skip(first) {
            let lo = from.max(edges[b]);
            let hi = to.min(edges[b + 1]);
            if hi <= lo {
                if edges[b] >= to {
                    break;
                }
                continue;
            }
            dist.add(state.clone(), hi - lo);
        }
    };
    let mut last = 0.0;
    let mut current = AllelicPartition::empty();
    while let Some((t, _)) = engine.next_jump(horizon, &mut rng)? {
        credit(&current, last, t);
        current = engine.state().clone();
        last = t;
    }
    credit(&current, last, horizon);
    for d in &mut out {
        d.replicates = 1;
    }
    Ok(out)
}

/// Time-weighted occupation on `[burn_in, horizon]` along one run from `e0`.
pub fn stationary_occupation(
    params: &ModelParams,
    horizon: f64,
    burn_in: f64,
    seed: u64,
) -> Result<EmpiricalDistribution<AllelicPartition>> {
    let mut batches = stationary_occupation_batches(params, horizon, burn_in, 1, seed)?;
    Ok(batches.remove(0))
}

/// Default burn-in (time units) for occupation measures.
pub const DEFAULT_BURN_IN: f64 = 100.0;

/// Mean and batch-means standard error of one state's occupation fraction.
pub fn batch_mean_se<K: Ord + Clone>(batches: &[EmpiricalDistribution<K>], key: &K) -> (f64, f64) {
    let xs: Vec<f64> = batches.iter().map(|b| b.probability(key)).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One row of a growth report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub mean_k: f64,
    /// Mean and coefficient of variation of `K_n / ln n`.
    pub mean_k_over_log: f64,
    pub cv_k_over_log: f64,
    /// Mean and coefficient of variation of `K_n / n^exponent`.
    pub mean_k_over_pow: f64,
    pub cv_k_over_pow: f64,
}

fn mean_cv(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 || mean == 0.0 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt() / mean)
}

/// `K_n` statistics over `runs` independent urn runs, at the growth
/// checkpoints with `n >= 2`. Both normalizations are reported: by `ln n`
/// and by `n^exponent`.
pub fn growth_report(
    params: &ModelParams,
    n_max: usize,
    runs: usize,
    seed: u64,
    exponent: f64,
    workers: Option<usize>,
) -> Result<Vec<GrowthRow>> {
    if runs == 0 {
        return Err(Error::domain("growth reports need at least one run"));
    }
    let traces = with_workers(workers, || {
        (0..runs as u64)
            .into_par_iter()
            .map(|r| urn::k_growth_trace(n_max, params, &mut replicate_rng(seed, r)))
            .collect::<Result<Vec<_>>>()
    })??;
    let points = traces[0].len();
    let mut rows = Vec::with_capacity(points);
    for j in 0..points {
        let n = traces[0][j].n;
        if n < 2 {
            continue;
        }
        let ks: Vec<f64> = traces.iter().map(|t| t[j].groups as f64).collect();
        let ln_n = (n as f64).ln();
        let pow_n = (n as f64).powf(exponent);
        let (mean_k, _) = mean_cv(&ks);
        let (ml, cl) = mean_cv(&ks.iter().map(|k| k / ln_n).collect::<Vec<_>>());
        let (mp, cp) = mean_cv(&ks.iter().map(|k| k / pow_n).collect::<Vec<_>>());
        rows.push(GrowthRow {
            n,
            mean_k,
            mean_k_over_log: ml,
            cv_k_over_log: cl,
            mean_k_over_pow: mp,
            cv_k_over_pow: cp,
        });
    }
    Ok(rows)
}

pub fn write_growth_csv<W: Write>(mut out: W, rows: &[GrowthRow], header: &[String]) -> Result<()> {
    writeln!(out, "# allelic {}", crate::VERSION)?;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(
        out,
        "n,mean_k,mean_k_over_log,cv_k_over_log,mean_k_over_pow,cv_k_over_pow"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n, r.mean_k, r.mean_k_over_log, r.cv_k_over_log, r.mean_k_over_pow, r.cv_k_over_pow
        )?;
    }
    Ok(())
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` from `n` samples.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powf(j - 1.0) * (-2.0 * j * j * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
