//! Sequential urn constructions of random partitions.
//!
//! Starting from `e0`, each step adds one item: it founds a new group with
//! probability `(theta + alpha k) / (theta + s)` or joins a group of size `i`
//! with probability `(i - alpha) m_i / (theta + s)`. After `n` steps the
//! state follows the Pitman sampling formula (Ewens at `alpha = 0`).

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulae::ModelParams;
use crate::partitions::{AllelicPartition, TransitionEvent};

/// State of an urn run: `partition.size() == step` always.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnChainState {
    partition: AllelicPartition,
    step: usize,
}

impl Default for UrnChainState {
    fn default() -> Self {
        Self::new()
    }
}

impl UrnChainState {
    pub fn new() -> Self {
        Self {
            partition: AllelicPartition::empty(),
            step: 0,
        }
    }

    pub fn partition(&self) -> &AllelicPartition {
        &self.partition
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Draws and applies one urn step.
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        params: &ModelParams,
        rng: &mut R,
    ) -> Result<TransitionEvent> {
        let dist = urn_step_distribution(&self.partition, params)?;
        let event = sample_event(&dist, rng);
        self.partition.apply_in_place(event)?;
        self.step += 1;
        Ok(event)
    }
}

fn check_urn_params(params: &ModelParams) -> Result<()> {
    if params.alpha() == 0.0 && params.theta() <= 0.0 {
        return Err(Error::domain("the urn with alpha = 0 requires theta > 0"));
    }
    Ok(())
}

/// One-step law of the urn from `m`, ordered `NewFamily` then `GrowthAt(i)`
/// for increasing `i`. Zero-probability events are omitted. From `e0` the
/// first item always founds a group, for any admissible `theta`.
pub fn urn_step_distribution(
    m: &AllelicPartition,
    params: &ModelParams,
) -> Result<Vec<(TransitionEvent, f64)>> {
    check_urn_params(params)?;
    let (alpha, theta) = (params.alpha(), params.theta());
    if m.is_empty() {
        return Ok(vec![(TransitionEvent::NewFamily, 1.0)]);
    }
    let norm = theta + m.size() as f64;
    if norm <= 0.0 {
        return Err(Error::domain(format!(
            "urn normalizer theta + s(m) = {norm} is not positive"
        )));
    }
    let mut out = Vec::with_capacity(m.support_len() + 1);
    let new_family = theta + alpha * m.num_groups() as f64;
    if new_family > 0.0 {
        out.push((TransitionEvent::NewFamily, new_family / norm));
    }
    for (i, mi) in m.iter() {
        out.push((
            TransitionEvent::GrowthAt(i),
            (i as f64 - alpha) * mi as f64 / norm,
        ));
    }
    Ok(out)
}

/// Inverse-CDF draw over a finite event list in its given order.
pub(crate) fn sample_event<R: Rng + ?Sized>(
    dist: &[(TransitionEvent, f64)],
    rng: &mut R,
) -> TransitionEvent {
    let total: f64 = dist.iter().map(|(_, w)| w).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for &(event, w) in dist {
        acc += w;
        if u < acc {
            return event;
        }
    }
    dist.last().expect("nonempty event list").0
}

/// Draws a partition of `n` from `PSF_n` by running the urn for `n` steps.
pub fn sample_psf<R: Rng + ?Sized>(
    n: usize,
    params: &ModelParams,
    rng: &mut R,
) -> Result<AllelicPartition> {
    check_urn_params(params)?;
    let mut state = UrnChainState::new();
    for _ in 0..n {
        state.advance(params, rng)?;
    }
    Ok(state.partition)
}

/// Checkpoints `ceil(10^{j/4})` for `j = 0, 1, ...` up to `n_max`, plus `n_max`.
pub fn growth_checkpoints(n_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut j = 0i32;
    loop {
        let x = 10f64.powf(j as f64 / 4.0);
        // exact powers of ten must not round up
        let n = if (x - x.round()).abs() < 1e-9 {
            x.round()
        } else {
            x.ceil()
        } as usize;
        if n > n_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        j += 1;
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

/// One point of a growth trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub n: usize,
    pub groups: usize,
}

/// Number of groups `K_n` along one urn run, at [`growth_checkpoints`].
///
/// Only `K_n` is needed, and under the urn it is itself a Markov chain:
/// the `(n+1)`-th item founds a group with probability
/// `(theta + alpha K_n) / (theta + n)`. Simulating that chain directly is
/// exact for the law of the trace and costs one uniform per step.
pub fn k_growth_trace<R: Rng + ?Sized>(
    n_max: usize,
    params: &ModelParams,
    rng: &mut R,
) -> Result<Vec<GrowthPoint>> {
    check_urn_params(params)?;
    if n_max < 10 {
        return Err(Error::domain(format!(
            "growth traces need n_max >= 10, got {n_max}"
        )));
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let checkpoints = growth_checkpoints(n_max);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut k = 0usize;
    for n in 0..n_max {
        let p_new = if n == 0 {
            1.0
        } else {
            (theta + alpha * k as f64) / (theta + n as f64)
        };
        if rng.random::<f64>() < p_new {
            k += 1;
        }
        if next.peek() == Some(&&(n + 1)) {
            out.push(GrowthPoint {
                n: n + 1,
                groups: k,
            });
            next.next();
        }
    }
    Ok(out)
}
