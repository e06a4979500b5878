use rand::Rng;
use rand_distr::Exp1;

use super::{Engine, SimOptions, Trajectory};
use crate::error::{Error, Result};
use crate::formulae::ModelParams;
use crate::partitions::{AllelicPartition, TransitionEvent};

/// Exact SSA on multiplicities.
///
/// The total rate `theta + (1 + mu) s` is known from the running item count,
/// so only the event choice scans the stored sizes.
#[derive(Debug, Clone)]
pub struct MultiplicityEngine {
    params: ModelParams,
    state: AllelicPartition,
    time: f64,
    jumps: u64,
    max_events: u64,
}

impl MultiplicityEngine {
    pub fn new(params: ModelParams, initial: AllelicPartition, opts: SimOptions) -> Self {
        Self {
            params,
            state: initial,
            time: 0.0,
            jumps: 0,
            max_events: opts.max_events,
        }
    }

    pub fn jumps(&self) -> u64 {
        self.jumps
    }

    fn pick_event(&self, mut u: f64) -> TransitionEvent {
        let (alpha, theta, mu) = (self.params.alpha(), self.params.theta(), self.params.mu());
        let new_family = theta + alpha * self.state.num_groups() as f64;
        if u < new_family {
            return TransitionEvent::NewFamily;
        }
        u -= new_family;
        let mut last = TransitionEvent::NewFamily;
        for (i, mi) in self.state.iter() {
            let (fi, fm) = (i as f64, mi as f64);
            let growth = (fi - alpha) * fm;
            if u < growth {
                return TransitionEvent::GrowthAt(i);
            }
            u -= growth;
            let death = mu * fi * fm;
            if u < death {
                return TransitionEvent::DeathAt(i);
            }
            u -= death;
            last = if death > 0.0 {
                TransitionEvent::DeathAt(i)
            } else {
                TransitionEvent::GrowthAt(i)
            };
        }
        // rounding left u just past the last bucket
        last
    }
}

impl Engine for MultiplicityEngine {
    fn state(&self) -> &AllelicPartition {
        &self.state
    }

    fn time(&self) -> f64 {
        self.time
    }

    fn next_jump<R: Rng + ?Sized>(
        &mut self,
        t_end: f64,
        rng: &mut R,
    ) -> Result<Option<(f64, TransitionEvent)>> {
        let total = super::total_rate(&self.state, &self.params);
        if total <= 0.0 {
            // e0 with theta <= 0 is absorbing
            self.time = self.time.max(t_end);
            return Ok(None);
        }
        let hold: f64 = rng.sample::<f64, _>(Exp1) / total;
        let t = self.time + hold;
        if t > t_end {
            self.time = t_end;
            return Ok(None);
        }
        if self.jumps >= self.max_events {
            return Err(Error::Runaway {
                limit: self.max_events,
                time: t,
            });
        }
        let event = self.pick_event(rng.random::<f64>() * total);
        self.state.apply_in_place(event)?;
        self.time = t;
        self.jumps += 1;
        Ok(Some((t, event)))
    }
}

pub(crate) fn refuse_empty_start(params: &ModelParams) -> Result<()> {
    if params.theta() <= 0.0 {
        return Err(Error::domain(format!(
            "theta = {} <= 0: the chain cannot leave the empty initial state; \
             start from a non-empty partition instead",
            params.theta()
        )));
    }
    Ok(())
}

/// Simulates from `e0` up to `t_end`. Requires `theta > 0`.
pub fn simulate<R: Rng + ?Sized>(
    params: &ModelParams,
    t_end: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    refuse_empty_start(params)?;
    simulate_from(
        params,
        AllelicPartition::empty(),
        t_end,
        SimOptions::default(),
        rng,
    )
}

/// Simulates from an arbitrary initial partition.
pub fn simulate_from<R: Rng + ?Sized>(
    params: &ModelParams,
    initial: AllelicPartition,
    t_end: f64,
    opts: SimOptions,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::domain(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    let mut engine = MultiplicityEngine::new(*params, initial.clone(), opts);
    let mut events = Vec::new();
    engine.run_until(t_end, rng, |t, e, _| events.push((t, e)))?;
    Ok(Trajectory {
        initial,
        events,
        horizon: t_end,
    })
}
