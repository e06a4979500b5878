//! Continuous-time engines for the birth-death-immigration chain on
//! allelic partitions.
//!
//! From state `m` the chain jumps to
//!
//! | target              | rate                 |
//! |---------------------|----------------------|
//! | `m + e_1`           | `theta + alpha k(m)` |
//! | `m - e_i + e_{i+1}` | `(i - alpha) m_i`    |
//! | `m - e_i + e_{i-1}` | `mu i m_i`           |
//!
//! so the total jump rate is `theta + (1 + mu) s(m)` and the item count
//! `s(m)` is itself a birth-death-immigration process with birth rate
//! `theta + n` and death rate `mu n`.

mod bdi;
mod branching;
mod gillespie;
mod trajectory;

pub use bdi::{simulate_bdi, SizeEngine, SizeTrajectory};
pub use branching::{
    simulate_branching, simulate_branching_from, AgentPopulation, BranchingEngine,
};
pub(crate) use gillespie::refuse_empty_start as gillespie_refuse_empty_start;
pub use gillespie::{simulate, simulate_from, MultiplicityEngine};
pub use trajectory::{Trajectory, TrajectoryMeta};

use rand::Rng;

use crate::error::{Error, Result};
use crate::formulae::ModelParams;
use crate::partitions::{AllelicPartition, TransitionEvent};

/// Default cap on the number of jumps in one simulation.
pub const DEFAULT_MAX_EVENTS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Abort once more than this many jumps have occurred.
    pub max_events: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            max_events: DEFAULT_MAX_EVENTS,
        }
    }
}

/// A jump process on allelic partitions that can be advanced event by event.
pub trait Engine {
    fn state(&self) -> &AllelicPartition;

    fn time(&self) -> f64;

    /// Advances to the next jump if it happens no later than `t_end` and
    /// returns it. Otherwise moves the clock to `t_end` and returns `None`;
    /// an absorbed chain also returns `None`.
    fn next_jump<R: Rng + ?Sized>(
        &mut self,
        t_end: f64,
        rng: &mut R,
    ) -> Result<Option<(f64, TransitionEvent)>>;

    /// Runs until `t_end`, calling `on_jump` after every jump.
    fn run_until<R, F>(&mut self, t_end: f64, rng: &mut R, mut on_jump: F) -> Result<()>
    where
        R: Rng + ?Sized,
        F: FnMut(f64, TransitionEvent, &AllelicPartition),
    {
        while let Some((t, e)) = self.next_jump(t_end, rng)? {
            on_jump(t, e, self.state());
        }
        Ok(())
    }
}

/// Jump rates out of `m`, in the order `NewFamily`, then for each stored
/// size `i` ascending `GrowthAt(i)` and `DeathAt(i)`. Zero rates are omitted.
pub fn rates(m: &AllelicPartition, params: &ModelParams) -> Result<Vec<(TransitionEvent, f64)>> {
    let (alpha, theta, mu) = (params.alpha(), params.theta(), params.mu());
    let new_family = theta + alpha * m.num_groups() as f64;
    if new_family < 0.0 {
        return Err(Error::domain(format!(
            "new-family rate theta + alpha k = {new_family} is negative at {m}"
        )));
    }
    let mut out = Vec::with_capacity(2 * m.support_len() + 1);
    if new_family > 0.0 {
        out.push((TransitionEvent::NewFamily, new_family));
    }
    for (i, mi) in m.iter() {
        let (fi, fm) = (i as f64, mi as f64);
        out.push((TransitionEvent::GrowthAt(i), (fi - alpha) * fm));
        if mu > 0.0 {
            out.push((TransitionEvent::DeathAt(i), mu * fi * fm));
        }
    }
    Ok(out)
}

/// Total jump rate `theta + (1 + mu) s(m)`.
pub fn total_rate(m: &AllelicPartition, params: &ModelParams) -> f64 {
    params.theta() + (1.0 + params.mu()) * m.size() as f64
}

/// Birth and death rates `(theta + n, mu n)` of the item-count process.
pub fn size_process_rates(n: usize, params: &ModelParams) -> (f64, f64) {
    let n = n as f64;
    (params.theta() + n, params.mu() * n)
}
