//! Individual-level construction of the chain.
//!
//! Every individual dies at rate `mu` and reproduces at unit rate. A child of
//! the oldest member of a family founds a new family with probability
//! `alpha` and otherwise joins the parent's family; children of all other
//! members stay in the family. For `theta > 0` immigrants found new
//! families at rate `theta`. For `theta <= 0` there is no immigration;
//! instead the oldest living individual overall has offspring joining its
//! family at rate `1 - alpha` and founding new families at rate
//! `alpha + theta`.
//!
//! Recording only family sizes turns this into the multiplicity chain, which
//! makes the engine an independent check on [`MultiplicityEngine`](super::MultiplicityEngine).

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::Exp1;

use super::{Engine, SimOptions, Trajectory};
use crate::error::{Error, Result};
use crate::formulae::ModelParams;
use crate::partitions::{AllelicPartition, TransitionEvent};

#[derive(Debug, Clone, Default)]
struct Family {
    /// Individual id -> birth time; ids grow with birth order, so the first
    /// entry is the oldest member.
    members: BTreeMap<u64, f64>,
}

#[derive(Debug, Clone, Copy)]
struct Individual {
    id: u64,
    family: usize,
}

/// A population of individuals grouped into families.
#[derive(Debug, Clone, Default)]
pub struct AgentPopulation {
    families: Vec<Option<Family>>,
    free_slots: Vec<usize>,
    alive: Vec<Individual>,
    /// Every living id, for locating the overall oldest.
    ids: BTreeSet<u64>,
    family_of: BTreeMap<u64, usize>,
    next_id: u64,
    partition: AllelicPartition,
}

impl AgentPopulation {
    pub fn new() -> Self {
        Self::default()
    }

    /// One family per group of `m`, all members born at `time`.
    pub fn from_partition(m: &AllelicPartition, time: f64) -> Self {
        let mut pop = Self::new();
        for size in m.family_sizes() {
            let fam = pop.found_family(time);
            for _ in 1..size {
                pop.add_member(fam, time);
            }
        }
        pop
    }

    /// Induced multiplicity vector.
    pub fn partition(&self) -> &AllelicPartition {
        &self.partition
    }

    pub fn size(&self) -> usize {
        self.alive.len()
    }

    pub fn num_families(&self) -> usize {
        self.families.len() - self.free_slots.len()
    }

    /// Birth times of each family, oldest member first.
    pub fn families(&self) -> Vec<Vec<f64>> {
        self.families
            .iter()
            .flatten()
            .map(|f| f.members.values().copied().collect())
            .collect()
    }

    fn family_size(&self, fam: usize) -> usize {
        self.families[fam].as_ref().map_or(0, |f| f.members.len())
    }

    fn is_family_oldest(&self, ind: Individual) -> bool {
        self.families[ind.family]
            .as_ref()
            .and_then(|f| f.members.keys().next())
            == Some(&ind.id)
    }

    fn global_oldest(&self) -> Option<Individual> {
        let id = *self.ids.iter().next()?;
        Some(Individual {
            id,
            family: self.family_of[&id],
        })
    }

    fn push_individual(&mut self, fam: usize, time: f64) {
        let id = self.next_id;
        self.next_id += 1;
        self.families[fam]
            .as_mut()
            .expect("live family")
            .members
            .insert(id, time);
        self.alive.push(Individual { id, family: fam });
        self.ids.insert(id);
        self.family_of.insert(id, fam);
    }

    fn found_family(&mut self, time: f64) -> usize {
        let fam = match self.free_slots.pop() {
            Some(slot) => {
                self.families[slot] = Some(Family::default());
                slot
            }
            None => {
                self.families.push(Some(Family::default()));
                self.families.len() - 1
            }
        };
        self.push_individual(fam, time);
        self.partition
            .apply_in_place(TransitionEvent::NewFamily)
            .expect("new family always applies");
        fam
    }

    fn add_member(&mut self, fam: usize, time: f64) -> TransitionEvent {
        let event = TransitionEvent::GrowthAt(self.family_size(fam));
        self.push_individual(fam, time);
        self.partition
            .apply_in_place(event)
            .expect("family size is present in the partition");
        event
    }

    fn remove_at(&mut self, idx: usize) -> TransitionEvent {
        let ind = self.alive.swap_remove(idx);
        let size = self.family_size(ind.family);
        let event = TransitionEvent::DeathAt(size);
        let family = self.families[ind.family].as_mut().expect("live family");
        family.members.remove(&ind.id);
        if family.members.is_empty() {
            self.families[ind.family] = None;
            self.free_slots.push(ind.family);
        }
        self.ids.remove(&ind.id);
        self.family_of.remove(&ind.id);
        self.partition
            .apply_in_place(event)
            .expect("family size is present in the partition");
        event
    }

    /// Birth, immigration and death clock totals `(births, immigration, deaths)`.
    fn clock_totals(&self, params: &ModelParams) -> (f64, f64, f64) {
        let n = self.alive.len() as f64;
        let theta = params.theta();
        if theta > 0.0 {
            (n, theta, params.mu() * n)
        } else if self.alive.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            // the overall oldest reproduces at 1 + theta instead of 1
            (n + theta, 0.0, params.mu() * n)
        }
    }

    /// Multiplicity-level event rates obtained by summing every individual
    /// clock, in the same order as [`rates`](super::rates).
    pub fn event_rates(&self, params: &ModelParams) -> Vec<(TransitionEvent, f64)> {
        let (alpha, theta, mu) = (params.alpha(), params.theta(), params.mu());
        let mut acc: BTreeMap<TransitionEvent, f64> = BTreeMap::new();
        let mut add = |e: TransitionEvent, r: f64| {
            if r > 0.0 {
                *acc.entry(e).or_insert(0.0) += r;
            }
        };
        if theta > 0.0 {
            add(TransitionEvent::NewFamily, theta);
        }
        let oldest = if theta <= 0.0 {
            self.global_oldest().map(|i| i.id)
        } else {
            None
        };
        for &ind in &self.alive {
            let size = self.family_size(ind.family);
            if Some(ind.id) == oldest {
                add(TransitionEvent::GrowthAt(size), 1.0 - alpha);
                add(TransitionEvent::NewFamily, alpha + theta);
            } else if self.is_family_oldest(ind) {
                add(TransitionEvent::GrowthAt(size), 1.0 - alpha);
                add(TransitionEvent::NewFamily, alpha);
            } else {
                add(TransitionEvent::GrowthAt(size), 1.0);
            }
            add(TransitionEvent::DeathAt(size), mu);
        }
        let mut out: Vec<(TransitionEvent, f64)> = Vec::with_capacity(acc.len());
        if let Some(&r) = acc.get(&TransitionEvent::NewFamily) {
            out.push((TransitionEvent::NewFamily, r));
        }
        for (i, _) in self.partition.iter() {
            for e in [TransitionEvent::GrowthAt(i), TransitionEvent::DeathAt(i)] {
                if let Some(&r) = acc.get(&e) {
                    out.push((e, r));
                }
            }
        }
        out
    }
}

/// SSA over individual clocks.
///
/// Deaths use one exponential clock of rate `mu * n` with a uniformly chosen
/// victim, which is equivalent to `n` independent clocks of rate `mu`.
#[derive(Debug, Clone)]
pub struct BranchingEngine {
    params: ModelParams,
    population: AgentPopulation,
    time: f64,
    jumps: u64,
    max_events: u64,
}

impl BranchingEngine {
    pub fn new(params: ModelParams, initial: &AllelicPartition, opts: SimOptions) -> Self {
        Self {
            params,
            population: AgentPopulation::from_partition(initial, 0.0),
            time: 0.0,
            jumps: 0,
            max_events: opts.max_events,
        }
    }

    pub fn population(&self) -> &AgentPopulation {
        &self.population
    }

    fn birth<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> TransitionEvent {
        let (alpha, theta) = (self.params.alpha(), self.params.theta());
        let pop = &self.population;
        let n = pop.alive.len();
        let parent;
        let p_join;
        if theta > 0.0 {
            parent = pop.alive[rng.random_range(0..n)];
            p_join = if pop.is_family_oldest(parent) {
                1.0 - alpha
            } else {
                1.0
            };
        } else {
            let oldest = pop
                .global_oldest()
                .expect("births need a living individual");
            let births = n as f64 + theta;
            if rng.random::<f64>() * births < 1.0 + theta {
                parent = oldest;
                p_join = (1.0 - alpha) / (1.0 + theta);
            } else {
                // uniform among the other n - 1 individuals
                parent = loop {
                    let cand = pop.alive[rng.random_range(0..n)];
                    if cand.id != oldest.id {
                        break cand;
                    }
                };
                p_join = if pop.is_family_oldest(parent) {
                    1.0 - alpha
                } else {
                    1.0
                };
            }
        }
        if rng.random::<f64>() < p_join {
            self.population.add_member(parent.family, t)
        } else {
            self.population.found_family(t);
            TransitionEvent::NewFamily
        }
    }
}

impl Engine for BranchingEngine {
    fn state(&self) -> &AllelicPartition {
        self.population.partition()
    }

    fn time(&self) -> f64 {
        self.time
    }

    fn next_jump<R: Rng + ?Sized>(
        &mut self,
        t_end: f64,
        rng: &mut R,
    ) -> Result<Option<(f64, TransitionEvent)>> {
        let (births, immigration, deaths) = self.population.clock_totals(&self.params);
        let total = births + immigration + deaths;
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
        let u = rng.random::<f64>() * total;
        let event = if u < immigration {
            self.population.found_family(t);
            TransitionEvent::NewFamily
        } else if u < immigration + births {
            self.birth(t, rng)
        } else {
            let victim = rng.random_range(0..self.population.alive.len());
            self.population.remove_at(victim)
        };
        self.time = t;
        self.jumps += 1;
        Ok(Some((t, event)))
    }
}

/// Individual-level simulation from an empty population. Requires `theta > 0`.
pub fn simulate_branching<R: Rng + ?Sized>(
    params: &ModelParams,
    t_end: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    super::gillespie::refuse_empty_start(params)?;
    simulate_branching_from(
        params,
        AllelicPartition::empty(),
        t_end,
        SimOptions::default(),
        rng,
    )
}

/// Individual-level simulation from families matching `initial`.
pub fn simulate_branching_from<R: Rng + ?Sized>(
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
    let mut engine = BranchingEngine::new(*params, &initial, opts);
    let mut events = Vec::new();
    engine.run_until(t_end, rng, |t, e, _| events.push((t, e)))?;
    Ok(Trajectory {
        initial,
        events,
        horizon: t_end,
    })
}
