//! Adaptive lower-bound constructions: execution-time oracles that fix the
//! hidden times lazily, as a function of the algorithm's observed behavior,
//! together with explicit offline witness schedules certifying how well an
//! omniscient scheduler would have done on the same realized instance.
//!
//! Each construction designates at most `m` jobs as heavy (execution time 1)
//! and leaves the rest light (execution time 0). The witness bounds are
//! tight enough that the forced online makespans translate into
//! competitive-ratio lower bounds.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    simulate, simulate_with_oracle, AlgorithmAction, EngineSettings, ExecutionOracle,
    ExecutionOrder, MachineView, ObservableState, SimRun,
};
use crate::error::Error;
use crate::instance::{Batch, Instance, Job, JobId, MachineId};
use crate::setup::SetupModel;
use crate::strategy::Strategy;
use crate::time::{isqrt, TimeValue};

/// The four hard-instance families, one per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    /// Single-machine batches, no preemption: n = m³ jobs with constant
    /// setups; a batch of more than m jobs gets m heavy members.
    NpSingle,
    /// Single-machine batches with preemption: n = (m+1)^m jobs; at every
    /// integer time the remaining heavy jobs hide in the largest of the
    /// unassigned pool and the per-machine assigned sets.
    PSingle,
    /// Multi-machine batches, no preemption: m types × m jobs; a batch that
    /// is large relative to its machine count gets heavy members.
    NpMulti,
    /// Multi-machine batches with preemption, per-type queues: job groups
    /// are ranked by machine attention and the neglected group stays busy
    /// past time q+1.
    PMulti,
}

pub const CONSTRUCTION_NAMES: &[&str] = &["np-single", "p-single", "np-multi", "p-multi"];

impl Construction {
    pub fn by_name(name: &str) -> Result<Self, Error> {
        match name.trim() {
            "np-single" => Ok(Construction::NpSingle),
            "p-single" => Ok(Construction::PSingle),
            "np-multi" => Ok(Construction::NpMulti),
            "p-multi" => Ok(Construction::PMulti),
            other => Err(Error::Parse(format!(
                "unknown construction `{other}` (expected one of {CONSTRUCTION_NAMES:?})"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Construction::NpSingle => "np-single",
            Construction::PSingle => "p-single",
            Construction::NpMulti => "np-multi",
            Construction::PMulti => "p-multi",
        }
    }

    /// The engine setting the construction is hard for.
    pub fn settings(&self) -> EngineSettings {
        match self {
            Construction::NpSingle => EngineSettings::single_machine_nonpreemptive(),
            Construction::PSingle => EngineSettings::single_machine_preemptive(),
            Construction::NpMulti => EngineSettings::multi_machine_nonpreemptive(),
            Construction::PMulti => {
                let mut settings = EngineSettings::multi_machine_preemptive();
                settings.execution_order = ExecutionOrder::PerTypeQueue;
                settings
            }
        }
    }

    /// The job count the construction uses for m machines.
    pub fn job_count(&self, m: usize) -> usize {
        match self {
            Construction::NpSingle => m * m * m,
            Construction::PSingle => (m + 1).pow(m as u32),
            Construction::NpMulti => m * m,
            Construction::PMulti => {
                let q = self_power_floor(m as u64) as usize;
                q.pow(q as u32) * m * m
            }
        }
    }

    /// The instance template: all execution times start at zero and are
    /// overwritten by the adaptive oracle as jobs start.
    pub fn template(&self, m: usize) -> Result<Instance, Error> {
        match self {
            Construction::NpSingle => {
                if m < 2 {
                    return Err(Error::InvalidInstance(
                        "np-single needs at least 2 machines".into(),
                    ));
                }
                let n = self.job_count(m);
                Ok(Instance {
                    machines: m,
                    setup_model: SetupModel::constant(),
                    jobs: (0..n).map(|id| Job::plain(id, TimeValue::zero())).collect(),
                })
            }
            Construction::PSingle => {
                if !(2..=4).contains(&m) {
                    return Err(Error::InvalidInstance(
                        "p-single is sized for 2 to 4 machines".into(),
                    ));
                }
                let n = self.job_count(m);
                Ok(Instance {
                    machines: m,
                    setup_model: SetupModel::constant(),
                    jobs: (0..n).map(|id| Job::plain(id, TimeValue::zero())).collect(),
                })
            }
            Construction::NpMulti => {
                let s = isqrt(m as u64) as usize;
                if m < 2 || s * s != m {
                    return Err(Error::InvalidInstance(
                        "np-multi needs a square machine count (4, 9, ...)".into(),
                    ));
                }
                // Group i is the m jobs of type i.
                let jobs = (0..m * m)
                    .map(|id| Job::typed(id, TimeValue::zero(), (id / m) as u32))
                    .collect();
                Ok(Instance {
                    machines: m,
                    setup_model: SetupModel::unweighted_type_specific(0..m as u32),
                    jobs,
                })
            }
            Construction::PMulti => {
                if m < 2 {
                    return Err(Error::InvalidInstance(
                        "p-multi needs at least 2 machines".into(),
                    ));
                }
                let q = self_power_floor(m as u64) as usize;
                let groups = q.pow(q as u32);
                let per_group = m * m;
                let jobs = (0..groups * per_group)
                    .map(|id| Job::typed(id, TimeValue::zero(), (id / per_group) as u32))
                    .collect();
                Ok(Instance {
                    machines: m,
                    setup_model: SetupModel::unweighted_type_specific(0..groups as u32),
                    jobs,
                })
            }
        }
    }

    /// A fresh adaptive oracle for one run against m machines.
    pub fn adversary(&self, m: usize) -> Result<AdaptiveAdversary, Error> {
        // Template construction doubles as the argument check.
        let template = self.template(m)?;
        let state = match self {
            Construction::NpSingle => ConstructionState::NpSingle { heavy: None },
            Construction::PSingle => ConstructionState::PSingle {
                candidates: template.all_jobs(),
            },
            Construction::NpMulti => ConstructionState::NpMulti {
                threshold: isqrt(m as u64) as usize,
                heavy: None,
            },
            Construction::PMulti => {
                let q = self_power_floor(m as u64) as usize;
                ConstructionState::PMulti {
                    q,
                    jobs_per_group: m * m,
                    round_of: BTreeMap::new(),
                    next_round: 1,
                }
            }
        };
        Ok(AdaptiveAdversary {
            m,
            budget: m,
            decided: BTreeMap::new(),
            log: Vec::new(),
            state,
        })
    }

    /// An explicit offline schedule for the realized instance, certifying
    /// the optimal makespan is small: heavy jobs run one per machine, light
    /// jobs piggyback in single-setup batches.
    pub fn witness(&self, realized: &Instance) -> Result<SimRun, Error> {
        let m = realized.m();
        let heavy: Vec<JobId> = realized
            .jobs
            .iter()
            .filter(|j| !j.execution.is_zero())
            .map(|j| j.id)
            .collect();
        let lights: Vec<JobId> = realized
            .jobs
            .iter()
            .filter(|j| j.execution.is_zero())
            .map(|j| j.id)
            .collect();
        let mut queues: Vec<VecDeque<Batch>> = vec![VecDeque::new(); m];
        match self {
            Construction::NpSingle | Construction::PSingle => {
                // One heavy job per machine; every light job shares machine
                // 0's first batch, adding setup-free work.
                for (i, &job) in heavy.iter().enumerate() {
                    let mut ids: BTreeSet<JobId> = BTreeSet::from([job]);
                    if i == 0 {
                        ids.extend(lights.iter().copied());
                    }
                    queues[i % m].push_back(Batch::of(ids));
                }
                if heavy.is_empty() && !lights.is_empty() {
                    queues[0].push_back(Batch::of(lights.iter().copied()));
                }
            }
            Construction::NpMulti | Construction::PMulti => {
                // Heavy singletons first, then machine g clears the light
                // jobs of group g in one single-type batch.
                for (i, &job) in heavy.iter().enumerate() {
                    queues[i % m].push_back(Batch::of([job]));
                }
                let catalog = realized.catalog();
                let mut by_group: BTreeMap<u32, BTreeSet<JobId>> = BTreeMap::new();
                for &job in &lights {
                    let tag = catalog.get(job)?.type_tag.ok_or(Error::MissingTag {
                        job,
                        what: "type",
                    })?;
                    by_group.entry(tag).or_default().insert(job);
                }
                for (tag, ids) in by_group {
                    queues[tag as usize % m].push_back(Batch::of(ids));
                }
            }
        }
        let mut plan = OfflinePlan { queues };
        simulate(realized, &mut plan, &self.settings())
    }
}

/// Largest q ≥ 1 with q^q ≤ m.
fn self_power_floor(m: u64) -> u64 {
    let mut q: u64 = 1;
    loop {
        let next = q + 1;
        let mut pow: u128 = 1;
        for _ in 0..next {
            pow = pow.saturating_mul(next as u128);
        }
        if pow <= m as u128 {
            q = next;
        } else {
            return q;
        }
    }
}

enum ConstructionState {
    NpSingle {
        /// Set once the first oversized batch is seen.
        heavy: Option<BTreeSet<JobId>>,
    },
    PSingle {
        /// Where the remaining heavy jobs currently hide.
        candidates: BTreeSet<JobId>,
    },
    NpMulti {
        threshold: usize,
        heavy: Option<BTreeSet<JobId>>,
    },
    PMulti {
        q: usize,
        jobs_per_group: usize,
        /// Group -> the round it was classified in (1-based). Groups left
        /// unclassified after round q belong to round q+1.
        round_of: BTreeMap<u32, usize>,
        next_round: usize,
    },
}

/// An execution-time oracle that decides heavy/light lazily from the run's
/// observable prefix. Decisions are committed the moment a job first starts
/// and never change afterwards.
pub struct AdaptiveAdversary {
    m: usize,
    /// Heavy designations still available (constructions keep this ≤ m).
    budget: usize,
    decided: BTreeMap<JobId, TimeValue>,
    log: Vec<String>,
    state: ConstructionState,
}

impl AdaptiveAdversary {
    /// Every committed decision, job -> execution time.
    pub fn decisions(&self) -> &BTreeMap<JobId, TimeValue> {
        &self.decided
    }

    /// The jobs committed as heavy so far.
    pub fn heavy_jobs(&self) -> BTreeSet<JobId> {
        self.decided
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(&j, _)| j)
            .collect()
    }

    /// Human-readable record of every adaptive choice, in order.
    pub fn log(&self) -> &[String] {
        &self.log
    }

    fn commit(&mut self, job: JobId, heavy: bool) -> TimeValue {
        let p = if heavy { TimeValue::one() } else { TimeValue::zero() };
        self.decided.insert(job, p.clone());
        if heavy && self.budget > 0 {
            self.budget -= 1;
        }
        p
    }
}

impl ExecutionOracle for AdaptiveAdversary {
    fn sample_times(&self) -> Vec<TimeValue> {
        match &self.state {
            ConstructionState::PSingle { .. } => {
                (1..=self.m as u64).map(TimeValue::from_integer).collect()
            }
            ConstructionState::PMulti { q, .. } => {
                (1..=*q as u64).map(TimeValue::from_integer).collect()
            }
            _ => Vec::new(),
        }
    }

    fn on_sample(&mut self, state: &ObservableState) {
        match &mut self.state {
            ConstructionState::PSingle { candidates } => {
                // The m+1 candidate locations: the unassigned pool, then the
                // not-yet-started members of each machine's live batch.
                let mut sets: Vec<BTreeSet<JobId>> = vec![state.pool.clone()];
                sets.resize(self.m + 1, BTreeSet::new());
                for live in &state.live_batches {
                    for &machine in &live.machines {
                        sets[machine + 1] = live.unstarted.clone();
                    }
                }
                let best = sets
                    .iter()
                    .enumerate()
                    .max_by(|(i, a), (j, b)| a.len().cmp(&b.len()).then(j.cmp(i)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                *candidates = sets[best].clone();
                self.log.push(format!(
                    "t={}: heavy jobs now hide in location {} ({} jobs, {} designations left)",
                    state.now,
                    if best == 0 { "pool".to_string() } else { format!("machine {}", best - 1) },
                    candidates.len(),
                    self.budget,
                ));
            }
            ConstructionState::PMulti { q, jobs_per_group: _, round_of, next_round } => {
                if *next_round > *q {
                    return;
                }
                let t = *next_round;
                // kappa: machines executing or setting up each group's jobs.
                let mut kappa: BTreeMap<u32, usize> = BTreeMap::new();
                for view in &state.machines {
                    let tag = match view {
                        MachineView::SettingUp { setup_type, .. } => *setup_type,
                        MachineView::Executing { job, .. } | MachineView::Finishing { job } => {
                            state.catalog.get(*job).ok().and_then(|meta| meta.type_tag)
                        }
                        MachineView::Idle => None,
                    };
                    if let Some(tag) = tag {
                        *kappa.entry(tag).or_insert(0) += 1;
                    }
                }
                let groups = (*q as u32).pow(*q as u32);
                let mut remaining: Vec<u32> = (0..groups)
                    .filter(|g| !round_of.contains_key(g))
                    .collect();
                remaining.sort_by_key(|g| {
                    (std::cmp::Reverse(kappa.get(g).copied().unwrap_or(0)), *g)
                });
                let take = (*q as usize).pow((*q - t + 1) as u32)
                    - (*q as usize).pow((*q - t) as u32);
                let chosen: Vec<u32> = remaining.into_iter().take(take).collect();
                for &g in &chosen {
                    round_of.insert(g, t);
                }
                self.log.push(format!(
                    "t={}: round {t} claims groups {chosen:?} (busiest first)",
                    state.now,
                ));
                *next_round += 1;
            }
            _ => {}
        }
    }

    fn on_assign(&mut self, batch: &Batch, machines: &[MachineId], now: &TimeValue) {
        match &mut self.state {
            ConstructionState::NpSingle { heavy } => {
                if heavy.is_none() && batch.len() > self.m {
                    let chosen: BTreeSet<JobId> = batch.iter().take(self.m).collect();
                    self.log.push(format!(
                        "t={now}: batch of {} exceeds m={}; jobs {chosen:?} become heavy",
                        batch.len(),
                        self.m,
                    ));
                    *heavy = Some(chosen);
                }
            }
            ConstructionState::NpMulti { threshold, heavy } => {
                let s = machines.len();
                if heavy.is_none() && s < *threshold && batch.len() > *threshold * s {
                    let chosen: BTreeSet<JobId> = batch.iter().take(*threshold * s).collect();
                    self.log.push(format!(
                        "t={now}: batch of {} on {s} machines beats sqrt(m)*s={}; jobs {chosen:?} become heavy",
                        batch.len(),
                        *threshold * s,
                    ));
                    *heavy = Some(chosen);
                }
            }
            _ => {}
        }
    }

    fn pick_next(&mut self, candidates: &BTreeSet<JobId>) -> JobId {
        if let ConstructionState::PSingle { candidates: hiding } = &self.state {
            if self.budget > 0 {
                if let Some(&job) = candidates.iter().find(|j| hiding.contains(j)) {
                    return job;
                }
            }
        }
        *candidates.iter().next().expect("candidates nonempty")
    }

    fn execution_time(&mut self, job: JobId, now: &TimeValue) -> TimeValue {
        let heavy = match &self.state {
            ConstructionState::NpSingle { heavy } | ConstructionState::NpMulti { heavy, .. } => {
                heavy.as_ref().is_some_and(|set| set.contains(&job))
            }
            ConstructionState::PSingle { candidates } => {
                self.budget > 0 && candidates.contains(&job)
            }
            ConstructionState::PMulti { q, jobs_per_group, round_of, .. } => {
                // A group classified in round t has heavy members iff they
                // start strictly before time t; unclassified groups are
                // round q+1 in the end, and any job starting now starts
                // before every later classification instant.
                let group = (job / *jobs_per_group) as u32;
                let t = round_of.get(&group).copied().unwrap_or(*q + 1);
                *now < TimeValue::from_integer(t as u64)
            }
        };
        if heavy {
            self.log.push(format!("t={now}: job {job} starts and is revealed heavy"));
        }
        self.commit(job, heavy)
    }
}

/// Replays a fixed per-machine plan of batches: each machine takes its next
/// planned batch as soon as it is free.
struct OfflinePlan {
    queues: Vec<VecDeque<Batch>>,
}

impl Strategy for OfflinePlan {
    fn name(&self) -> String {
        "offline-plan".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        for (machine, queue) in self.queues.iter_mut().enumerate() {
            if machine < state.machines.len()
                && state.machines[machine].is_idle()
                && !queue.is_empty()
            {
                let batch = queue.pop_front().expect("checked non-empty");
                return Ok(AlgorithmAction::AssignBatch { batch, machines: vec![machine] });
            }
        }
        Ok(AlgorithmAction::Wait)
    }
}

/// Everything one adversarial run produces: the online run, the instance it
/// turned out to be, the witness schedule for that instance, and the
/// decision log.
pub struct AdversaryRun {
    pub construction: Construction,
    pub m: usize,
    pub run: SimRun,
    pub realized: Instance,
    pub heavy_jobs: BTreeSet<JobId>,
    pub witness: SimRun,
    pub log: Vec<String>,
}

/// Runs a strategy against a construction and pairs the outcome with the
/// witness schedule on the realized instance.
pub fn run_construction(
    construction: Construction,
    m: usize,
    strategy: &mut dyn Strategy,
) -> Result<AdversaryRun, Error> {
    let template = construction.template(m)?;
    let settings = construction.settings();
    let mut adversary = construction.adversary(m)?;
    let run = simulate_with_oracle(&template, strategy, &settings, &mut adversary)?;
    let realized = run.realized_instance(&template);
    let witness = construction.witness(&realized)?;
    Ok(AdversaryRun {
        construction,
        m,
        run,
        realized,
        heavy_jobs: adversary.heavy_jobs(),
        witness,
        log: adversary.log.clone(),
    })
}

/// Setup-model family for generated instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SetupFamily {
    Constant,
    /// Unweighted type-specific: each job draws one of `types` tags.
    TypeSpecific { types: u32 },
}

/// Deterministic pseudo-random instance: the same arguments always produce
/// the same jobs. Execution times draw uniformly from `p_choices`.
pub fn gen_random_instance(
    seed: u64,
    n: usize,
    m: usize,
    family: &SetupFamily,
    p_choices: &[TimeValue],
) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(n);
    for id in 0..n {
        let p = if p_choices.is_empty() {
            TimeValue::zero()
        } else {
            p_choices[(rng.next_u64() % p_choices.len() as u64) as usize].clone()
        };
        jobs.push(match family {
            SetupFamily::Constant => Job::plain(id, p),
            SetupFamily::TypeSpecific { types } => {
                Job::typed(id, p, (rng.next_u64() % u64::from((*types).max(1))) as u32)
            }
        });
    }
    let setup_model = match family {
        SetupFamily::Constant => SetupModel::constant(),
        SetupFamily::TypeSpecific { types } => {
            SetupModel::unweighted_type_specific(0..(*types).max(1))
        }
    };
    Instance { machines: m, setup_model, jobs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::strategy_by_name;
    use crate::trace::validate_trace;

    fn tv(n: u64) -> TimeValue {
        TimeValue::from_integer(n)
    }

    fn check_witness(outcome: &AdversaryRun) {
        let report = validate_trace(
            &outcome.realized,
            &outcome.witness.trace,
            &outcome.construction.settings(),
        );
        assert!(report.is_valid(), "witness violations: {:?}", report.violations);
        assert_eq!(
            outcome.witness.trace.completed_makespan(&outcome.realized).unwrap(),
            *outcome.witness.makespan(),
        );
    }

    #[test]
    fn np_single_oversized_batch_turns_heavy() {
        let mut strategy = strategy_by_name("single-batch").unwrap();
        let outcome = run_construction(Construction::NpSingle, 3, strategy.as_mut()).unwrap();
        // The whole pool (27 > 3) goes into one batch, so jobs 0..3 get
        // execution time 1 and that machine takes 1 + 3 = 4.
        assert_eq!(outcome.heavy_jobs, BTreeSet::from([0, 1, 2]));
        assert_eq!(*outcome.run.makespan(), tv(4));
        assert!(*outcome.witness.makespan() <= tv(2));
        assert!(outcome.heavy_jobs.len() <= 3);
        check_witness(&outcome);
    }

    #[test]
    fn np_single_small_batches_pay_setups_instead() {
        let mut strategy = strategy_by_name("list-singletons").unwrap();
        let outcome = run_construction(Construction::NpSingle, 2, strategy.as_mut()).unwrap();
        // 8 singleton batches over 2 machines: four setups in a row each.
        assert!(outcome.heavy_jobs.is_empty());
        assert_eq!(*outcome.run.makespan(), tv(4));
        assert!(*outcome.witness.makespan() <= tv(2));
        check_witness(&outcome);
    }

    #[test]
    fn p_single_tracks_the_largest_hiding_set() {
        let mut strategy = strategy_by_name("single-batch").unwrap();
        let outcome = run_construction(Construction::PSingle, 3, strategy.as_mut()).unwrap();
        // One batch of 64: the adversary follows it and reveals one heavy
        // job per unit of time, so three heavies run back-to-back.
        assert!(*outcome.run.makespan() >= tv(3), "got {}", outcome.run.makespan());
        assert!(outcome.heavy_jobs.len() <= 3);
        assert!(!outcome.heavy_jobs.is_empty());
        assert_eq!(*outcome.witness.makespan(), tv(2));
        check_witness(&outcome);
    }

    #[test]
    fn p_single_forces_every_single_machine_strategy() {
        for name in ["list-singletons", "phased-refinement", "auto-np-single"] {
            let mut strategy = strategy_by_name(name).unwrap();
            let outcome =
                run_construction(Construction::PSingle, 2, strategy.as_mut()).unwrap();
            assert!(
                *outcome.run.makespan() >= tv(2),
                "{name} got away with {}",
                outcome.run.makespan()
            );
            assert!(outcome.heavy_jobs.len() <= 2);
            check_witness(&outcome);
        }
    }

    #[test]
    fn np_multi_narrow_overload_turns_heavy() {
        // A hand-rolled strategy that puts everything on one machine in one
        // batch: 16 jobs on 1 machine beats sqrt(m)*s = 2, so 2 jobs become
        // heavy and the machine needs 4 setups... rather, c(X)=4 plus 2.
        struct OneMachineAll {
            fired: bool,
        }
        impl Strategy for OneMachineAll {
            fn name(&self) -> String {
                "one-machine-all".into()
            }
            fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
                if self.fired || state.pool.is_empty() {
                    return Ok(AlgorithmAction::Wait);
                }
                self.fired = true;
                Ok(AlgorithmAction::AssignBatch {
                    batch: Batch::of(state.pool.iter().copied()),
                    machines: vec![0],
                })
            }
        }
        let mut strategy = OneMachineAll { fired: false };
        let outcome = run_construction(Construction::NpMulti, 4, &mut strategy).unwrap();
        assert_eq!(outcome.heavy_jobs, BTreeSet::from([0, 1]));
        // c = 4 types, then 16 jobs with two heavies: 4 + 2 = 6.
        assert_eq!(*outcome.run.makespan(), tv(6));
        assert!(*outcome.witness.makespan() <= tv(3));
        check_witness(&outcome);
    }

    #[test]
    fn np_multi_group_spread_pays_wide_setups() {
        let mut strategy = strategy_by_name("group-spread").unwrap();
        let outcome = run_construction(Construction::NpMulti, 4, strategy.as_mut()).unwrap();
        // Batches on sqrt(m) machines never trigger the heavy rule, but
        // every part spans at least two types, so setup alone costs 2.
        assert!(*outcome.run.makespan() >= tv(2), "got {}", outcome.run.makespan());
        assert!(outcome.heavy_jobs.len() <= 4);
        assert!(*outcome.witness.makespan() <= tv(3));
        check_witness(&outcome);
    }

    #[test]
    fn p_multi_neglected_group_finishes_late() {
        let mut strategy = strategy_by_name("phased-widening").unwrap();
        let outcome = run_construction(Construction::PMulti, 4, strategy.as_mut()).unwrap();
        // q = 2: whichever group the machines neglect keeps 16 jobs whose
        // early starts all count heavy, so something runs at time 3+.
        assert!(*outcome.run.makespan() >= tv(3), "got {}", outcome.run.makespan());
        assert!(outcome.heavy_jobs.len() <= 4, "heavy: {:?}", outcome.heavy_jobs);
        assert!(*outcome.witness.makespan() <= tv(3));
        check_witness(&outcome);
    }

    #[test]
    fn adversary_runs_are_deterministic() {
        let mut first = strategy_by_name("phased-widening").unwrap();
        let mut second = strategy_by_name("phased-widening").unwrap();
        let a = run_construction(Construction::PMulti, 4, first.as_mut()).unwrap();
        let b = run_construction(Construction::PMulti, 4, second.as_mut()).unwrap();
        assert_eq!(a.run.trace.to_jsonl(), b.run.trace.to_jsonl());
        assert_eq!(a.heavy_jobs, b.heavy_jobs);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn construction_names_round_trip() {
        for name in CONSTRUCTION_NAMES {
            assert_eq!(Construction::by_name(name).unwrap().name(), *name);
        }
        assert!(Construction::by_name("nonsense").is_err());
        assert_eq!(Construction::NpSingle.job_count(3), 27);
        assert_eq!(Construction::PSingle.job_count(3), 64);
        assert_eq!(Construction::NpMulti.job_count(4), 16);
        assert_eq!(Construction::PMulti.job_count(4), 64);
    }

    #[test]
    fn generated_instances_are_reproducible() {
        let family = SetupFamily::TypeSpecific { types: 3 };
        let choices = [tv(0), tv(1), tv(2)];
        let a = gen_random_instance(7, 8, 2, &family, &choices);
        let b = gen_random_instance(7, 8, 2, &family, &choices);
        assert_eq!(a, b);
        assert_eq!(a.n(), 8);
        assert!(a.validate().is_ok());
        assert!(a.jobs.iter().all(|j| choices.contains(&j.execution)));
        assert!(a.jobs.iter().all(|j| j.type_tag.is_some_and(|t| t < 3)));
        let c = gen_random_instance(8, 8, 2, &family, &choices);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_only_distribution_keeps_everything_light() {
        let inst = gen_random_instance(1, 6, 2, &SetupFamily::Constant, &[tv(0)]);
        assert!(inst.jobs.iter().all(|j| j.execution.is_zero()));
    }
}
