use rand::Rng;
use rand_distr::Exp1;

use super::SimOptions;
use crate::error::{Error, Result};
use crate::formulae::ModelParams;

/// Scalar birth-death-immigration chain: `n -> n+1` at `theta + n`,
/// `n -> n-1` at `mu n`.
#[derive(Debug, Clone)]
pub struct SizeEngine {
    params: ModelParams,
    size: usize,
    time: f64,
    jumps: u64,
    max_events: u64,
}

impl SizeEngine {
    pub fn new(params: ModelParams, initial: usize, opts: SimOptions) -> Self {
        Self {
            params,
            size: initial,
            time: 0.0,
            jumps: 0,
            max_events: opts.max_events,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Next jump `(time, new size)` no later than `t_end`.
    pub fn next_jump<R: Rng + ?Sized>(
        &mut self,
        t_end: f64,
        rng: &mut R,
    ) -> Result<Option<(f64, usize)>> {
        let (birth, death) = super::size_process_rates(self.size, &self.params);
        let birth = birth.max(0.0);
        let total = birth + death;
        if total <= 0.0 {
            self.time = self.time.max(t_end);
            return Ok(None);
        }
        let t = self.time + rng.sample::<f64, _>(Exp1) / total;
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
        if rng.random::<f64>() * total < birth {
            self.size += 1;
        } else {
            self.size -= 1;
        }
        self.time = t;
        self.jumps += 1;
        Ok(Some((t, self.size)))
    }
}

/// Path of the item count: `(jump time, size after the jump)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeTrajectory {
    pub jumps: Vec<(f64, usize)>,
    pub horizon: f64,
}

impl SizeTrajectory {
    pub fn value_at(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        let upto = self.jumps.partition_point(|&(s, _)| s <= t);
        Ok(if upto == 0 { 0 } else { self.jumps[upto - 1].1 })
    }

    pub fn final_value(&self) -> usize {
        self.jumps.last().map_or(0, |&(_, n)| n)
    }
}

/// Simulates the item count from 0 up to `t_end`.
pub fn simulate_bdi<R: Rng + ?Sized>(
    params: &ModelParams,
    t_end: f64,
    opts: SimOptions,
    rng: &mut R,
) -> Result<SizeTrajectory> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::domain(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    let mut engine = SizeEngine::new(*params, 0, opts);
    let mut jumps = Vec::new();
    while let Some(j) = engine.next_jump(t_end, rng)? {
        jumps.push(j);
    }
    Ok(SizeTrajectory {
        jumps,
        horizon: t_end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_horizon_is_constant_zero() {
        let params = ModelParams::new(0.0, 1.0, 2.0).unwrap();
        let traj = simulate_bdi(
            &params,
            0.0,
            SimOptions::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert!(traj.jumps.is_empty());
        assert_eq!(traj.value_at(0.0).unwrap(), 0);
    }

    #[test]
    fn steps_are_unit_and_nonnegative() {
        let params = ModelParams::new(0.0, 1.5, 1.2).unwrap();
        let traj = simulate_bdi(
            &params,
            50.0,
            SimOptions::default(),
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let mut prev = 0usize;
        for &(_, n) in &traj.jumps {
            assert_eq!(n.abs_diff(prev), 1);
            prev = n;
        }
        assert_eq!(traj.value_at(50.0).unwrap(), traj.final_value());
        assert!(traj.value_at(51.0).is_err());
    }

    #[test]
    fn p_zero_at_unit_time_with_critical_death_rate() {
        // b_1 = 1/2 at mu = 1, so P(S(1) = 0) = (1 - b_1)^theta = 1/2
        let params = ModelParams::new(0.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let reps = 100_000;
        let zeros = (0..reps)
            .filter(|_| {
                simulate_bdi(&params, 1.0, SimOptions::default(), &mut rng)
                    .unwrap()
                    .final_value()
                    == 0
            })
            .count();
        let freq = zeros as f64 / reps as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn long_run_occupation_is_geometric() {
        // theta = 1, mu = 2: stationary law 2^{-(n+1)}
        let params = ModelParams::new(0.0, 1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut engine = SizeEngine::new(params, 0, SimOptions::default());
        let (burn, horizon) = (100.0, 100_100.0);
        let mut occ = vec![0.0; 64];
        let mut last_t = 0.0f64;
        let mut cur = 0usize;
        while let Some((t, n)) = engine.next_jump(horizon, &mut rng).unwrap() {
            let from = last_t.max(burn);
            if t > from {
                occ[cur.min(63)] += t - from;
            }
            last_t = t;
            cur = n;
        }
        occ[cur.min(63)] += horizon - last_t.max(burn);
        let total: f64 = occ.iter().sum();
        for (n, o) in occ.iter().take(6).enumerate() {
            let expected = 0.5f64.powi(n as i32 + 1);
            assert!((o / total - expected).abs() < 0.01, "n={n}: {}", o / total);
        }
    }
}
