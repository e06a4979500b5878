use std::io::Write;

use crate::error::{Error, Result};
use crate::formulae::ModelParams;
use crate::partitions::{AllelicPartition, TransitionEvent};

/// A simulated path: initial state plus time-stamped jumps on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) initial: AllelicPartition,
    pub(crate) events: Vec<(f64, TransitionEvent)>,
    pub(crate) horizon: f64,
}

/// Metadata written as comment lines ahead of the CSV rows.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryMeta<'a> {
    pub params: &'a ModelParams,
    pub seed: u64,
    pub engine: &'a str,
}

impl Trajectory {
    /// Validates the jump times and that every event replays cleanly.
    pub fn new(
        initial: AllelicPartition,
        events: Vec<(f64, TransitionEvent)>,
        horizon: f64,
    ) -> Result<Self> {
        let mut last = 0.0f64;
        let mut state = initial.clone();
        for (n, &(t, e)) in events.iter().enumerate() {
            if !(t >= 0.0 && t <= horizon) || (n > 0 && t <= last) {
                return Err(Error::domain(format!(
                    "jump {n} at time {t} breaks strict ordering within [0, {horizon}]"
                )));
            }
            last = t;
            state.apply_in_place(e)?;
        }
        Ok(Self {
            initial,
            events,
            horizon,
        })
    }

    pub fn initial(&self) -> &AllelicPartition {
        &self.initial
    }

    pub fn events(&self) -> &[(f64, TransitionEvent)] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// State at time `t`: all jumps at times `<= t` applied to the initial state.
    pub fn state_at(&self, t: f64) -> Result<AllelicPartition> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        let upto = self.events.partition_point(|&(s, _)| s <= t);
        let mut state = self.initial.clone();
        for &(_, e) in &self.events[..upto] {
            state.apply_in_place(e)?;
        }
        Ok(state)
    }

    pub fn final_state(&self) -> AllelicPartition {
        self.state_at(self.horizon)
            .expect("trajectory events were validated on construction")
    }

    /// Writes `time,event_kind,event_index,s,k` rows, `s` and `k` taken after
    /// each jump, preceded by `#` lines carrying parameters and seed.
    pub fn write_csv<W: Write>(&self, mut out: W, meta: &TrajectoryMeta<'_>) -> Result<()> {
        writeln!(out, "# allelic {}", crate::VERSION)?;
        writeln!(
            out,
            "# engine={} alpha={} theta={} mu={} seed={} horizon={} initial={}",
            meta.engine,
            meta.params.alpha(),
            meta.params.theta(),
            meta.params.mu(),
            meta.seed,
            self.horizon,
            self.initial
        )?;
        writeln!(out, "time,event_kind,event_index,s,k")?;
        let mut state = self.initial.clone();
        for &(t, e) in &self.events {
            state.apply_in_place(e)?;
            writeln!(
                out,
                "{t},{},{},{},{}",
                e.kind_str(),
                e.index(),
                state.size(),
                state.num_groups()
            )?;
        }
        Ok(())
    }
}
