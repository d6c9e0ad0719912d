//! Online scheduling strategies.
//!
//! Each strategy reacts to [`ObservableState`] snapshots at event instants
//! and never sees the execution time of a job that has not completed. The
//! guarantees quoted per strategy are worst-case makespan multipliers over
//! the offline optimum when all jobs are released at time zero; the
//! [`IgnoreReleaseTimes`] wrapper extends any of them to release times at a
//! factor of two plus one.

use std::collections::{BTreeSet, VecDeque};

use crate::engine::{AlgorithmAction, ObservableState};
use crate::error::Error;
use crate::instance::{Batch, JobId};
use crate::partition::{
    exact_min_max_partition, greedy_lpt_partition, rebalance_parts, size_limited_partition,
    split_near_equal, SizeLimitMode,
};
use crate::setup::UNIVERSE_LIMIT;
use crate::time::{ceil_sqrt_ratio, isqrt, min_self_power_at_least, TimeValue};

/// Which engine permissions a strategy relies on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SettingNeeds {
    pub multi_machine: bool,
    pub preemption: bool,
}

pub trait Strategy {
    /// Stable, role-describing name (appears in reports and traces).
    fn name(&self) -> String;

    /// Called at every event instant, repeatedly, until it returns `Wait`.
    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error>;

    fn needs(&self) -> SettingNeeds {
        SettingNeeds::default()
    }

    /// Proven worst-case makespan multiplier over the offline optimum for
    /// n jobs on m machines, all released at time zero. `None` when no
    /// bound is claimed for these parameters.
    fn guarantee(&self, n: usize, m: usize) -> Option<TimeValue> {
        let _ = (n, m);
        None
    }
}

/// Min-max setup partition of `jobs` into at most `k` parts: exhaustive for
/// small sets, greedy beyond that.
fn min_max_parts(
    state: &ObservableState,
    jobs: &BTreeSet<JobId>,
    k: usize,
) -> Result<Vec<BTreeSet<JobId>>, Error> {
    let partition = if jobs.len() <= UNIVERSE_LIMIT {
        exact_min_max_partition(jobs, k, state.model, state.catalog)?
    } else {
        greedy_lpt_partition(jobs, k, state.model, state.catalog)?
    };
    Ok(partition.parts)
}

/// Size-capped min-max partition: exhaustive for small sets; for larger
/// ones falls back to near-equal contiguous chunks, which always respect
/// the cap but carry no optimality claim.
fn capped_parts(
    state: &ObservableState,
    jobs: &BTreeSet<JobId>,
    k: usize,
    cap: usize,
) -> Result<Vec<BTreeSet<JobId>>, Error> {
    if jobs.len() <= UNIVERSE_LIMIT {
        let p = size_limited_partition(jobs, k, cap, state.model, state.catalog, SizeLimitMode::Exact)?;
        return Ok(p.parts);
    }
    if k.saturating_mul(cap) < jobs.len() {
        return Err(Error::InfeasiblePartition(format!(
            "{} jobs cannot fit in {k} parts of size at most {cap}",
            jobs.len()
        )));
    }
    let pieces = k.min(jobs.len()).max(1);
    let mut parts = split_near_equal(jobs, pieces);
    parts.resize(k, BTreeSet::new());
    Ok(parts)
}

/// The whole pool as one batch on one machine. The single setup plus total
/// execution never exceeds m times the per-machine average an optimum pays,
/// so the multiplier is m.
#[derive(Debug, Default)]
pub struct SingleBatch;

impl Strategy for SingleBatch {
    fn name(&self) -> String {
        "single-batch".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if state.pool.is_empty() || !state.live_batches.is_empty() {
            return Ok(AlgorithmAction::Wait);
        }
        let Some(&machine) = state.idle_machines().first() else {
            return Ok(AlgorithmAction::Wait);
        };
        Ok(AlgorithmAction::AssignBatch {
            batch: Batch::new(state.pool.clone())?,
            machines: vec![machine],
        })
    }

    fn guarantee(&self, _n: usize, m: usize) -> Option<TimeValue> {
        Some(TimeValue::from_integer(m as u64))
    }
}

/// One job per batch, list-scheduled: lowest pool job onto the lowest idle
/// machine. Every singleton batch costs at most the optimum, and greedy
/// list scheduling of n such pieces on m machines stays within total/m plus
/// one piece, hence n/m + 1.
#[derive(Debug, Default)]
pub struct ListSingletons;

impl Strategy for ListSingletons {
    fn name(&self) -> String {
        "list-singletons".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        match (state.idle_machines().first(), state.pool.iter().next()) {
            (Some(&machine), Some(&job)) => Ok(AlgorithmAction::AssignBatch {
                batch: Batch::new(BTreeSet::from([job]))?,
                machines: vec![machine],
            }),
            _ => Ok(AlgorithmAction::Wait),
        }
    }

    fn guarantee(&self, n: usize, m: usize) -> Option<TimeValue> {
        let per_machine = TimeValue::new(n as u64, m as u64).ok()?;
        Some(per_machine + TimeValue::one())
    }
}

/// Splits the jobs into k = m + ⌈√(mn)⌉ batches of at most ⌈√(n/m)⌉ jobs
/// each (minimizing the max setup cost), then list-schedules the batches.
/// Multiplier k/m + 1 + ⌈√(n/m)⌉, claimed only when the partition is
/// exhaustive (n small enough to enumerate).
#[derive(Debug, Default)]
pub struct CappedBatches {
    pending: Option<VecDeque<BTreeSet<JobId>>>,
}

impl CappedBatches {
    fn parameters(n: usize, m: usize) -> (usize, usize) {
        let k = m + ceil_sqrt_ratio((m as u64).saturating_mul(n as u64), 1) as usize;
        let cap = ceil_sqrt_ratio(n as u64, m as u64) as usize;
        (k, cap)
    }
}

impl Strategy for CappedBatches {
    fn name(&self) -> String {
        "capped-batches".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if self.pending.is_none() {
            if state.pool.is_empty() {
                return Ok(AlgorithmAction::Wait);
            }
            let (k, cap) = Self::parameters(state.pool.len(), state.machine_count);
            let parts = capped_parts(state, &state.pool, k, cap)?;
            self.pending =
                Some(parts.into_iter().filter(|p| !p.is_empty()).collect());
        }
        let pending = self.pending.as_mut().expect("initialized above");
        let Some(next) = pending.front() else {
            return Ok(AlgorithmAction::Wait);
        };
        let Some(&machine) = state.idle_machines().first() else {
            return Ok(AlgorithmAction::Wait);
        };
        let batch = Batch::new(next.clone())?;
        pending.pop_front();
        Ok(AlgorithmAction::AssignBatch { batch, machines: vec![machine] })
    }

    fn guarantee(&self, n: usize, m: usize) -> Option<TimeValue> {
        if n > UNIVERSE_LIMIT {
            return None;
        }
        let (k, cap) = Self::parameters(n, m);
        let spread = TimeValue::new(k as u64, m as u64).ok()?;
        Some(spread + TimeValue::from_integer(1 + cap as u64))
    }
}

/// Preemptive refinement in phases: start with min(m, n) capped batches,
/// and whenever at most ⌊m/q⌋ of the current phase's batches are still
/// live, preempt them and re-split the leftovers with a q-fold smaller size
/// cap. Here q is the smallest integer with q^q ≥ n; multiplier 6q + 1.
/// With fewer than 2q machines the single-batch rule is used instead
/// (m < 2q ≤ 6q + 1 keeps the same bound).
#[derive(Debug, Default)]
pub struct PhasedRefinement {
    initialized: bool,
    delegate: Option<SingleBatch>,
    q: u64,
    cap: usize,
    first_phase_done: bool,
    phase_size: usize,
    pending: VecDeque<BTreeSet<JobId>>,
    cutting: bool,
}

impl PhasedRefinement {
    fn start_phase(&mut self, state: &ObservableState) -> Result<(), Error> {
        if !self.first_phase_done {
            self.cap = state.pool.len().div_ceil(state.machine_count);
            self.first_phase_done = true;
        }
        let k = state.machine_count.min(state.pool.len());
        let parts = capped_parts(state, &state.pool, k, self.cap)?;
        let parts = rebalance_parts(parts, k);
        self.pending = parts.into_iter().filter(|p| !p.is_empty()).collect();
        self.phase_size = self.pending.len();
        Ok(())
    }
}

impl Strategy for PhasedRefinement {
    fn name(&self) -> String {
        "phased-refinement".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if !self.initialized {
            if state.pool.is_empty() {
                return Ok(AlgorithmAction::Wait);
            }
            self.q = min_self_power_at_least(state.pool.len() as u64);
            if (state.machine_count as u64) < 2 * self.q {
                self.delegate = Some(SingleBatch);
            }
            self.initialized = true;
        }
        if let Some(delegate) = self.delegate.as_mut() {
            return delegate.decide(state);
        }
        let threshold = (state.machine_count as u64 / self.q) as usize;
        loop {
            if let Some(next) = self.pending.front() {
                let Some(&machine) = state.idle_machines().first() else {
                    return Ok(AlgorithmAction::Wait);
                };
                let batch = Batch::new(next.clone())?;
                self.pending.pop_front();
                return Ok(AlgorithmAction::AssignBatch { batch, machines: vec![machine] });
            }
            if self.cutting {
                if let Some(live) = state.live_batches.first() {
                    return Ok(AlgorithmAction::PreemptBatch { batch: live.batch.clone() });
                }
                self.cutting = false;
            }
            let live = state.live_batches.len();
            if live == 0 {
                if state.pool.is_empty() {
                    return Ok(AlgorithmAction::Wait);
                }
                self.start_phase(state)?;
                continue;
            }
            if self.cap > 1 && live <= threshold && live < self.phase_size {
                // Next phase uses a q-fold smaller cap.
                self.cutting = true;
                self.cap = self.cap.div_ceil(self.q as usize).max(1);
                continue;
            }
            return Ok(AlgorithmAction::Wait);
        }
    }

    fn needs(&self) -> SettingNeeds {
        SettingNeeds { multi_machine: false, preemption: true }
    }

    fn guarantee(&self, n: usize, _m: usize) -> Option<TimeValue> {
        let q = min_self_power_at_least(n.max(1) as u64);
        Some(TimeValue::from_integer(6 * q + 1))
    }
}

/// One-shot spread for multi-machine batches: split the jobs into
/// k = ⌊√m⌋ batches minimizing the max setup, split the machines into the
/// same number of near-equal groups, and run batch i on group i.
/// Multiplier ⌈m/k⌉ + m/⌊m/k⌋ + 1.
#[derive(Debug, Default)]
pub struct GroupSpread {
    pending: Option<VecDeque<(BTreeSet<JobId>, Vec<usize>)>>,
}

impl Strategy for GroupSpread {
    fn name(&self) -> String {
        "group-spread".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if self.pending.is_none() {
            if state.pool.is_empty() {
                return Ok(AlgorithmAction::Wait);
            }
            let m = state.machine_count;
            let k = isqrt(m as u64).max(1) as usize;
            let target = k.min(state.pool.len());
            let parts = rebalance_parts(min_max_parts(state, &state.pool, target)?, target);
            let parts: Vec<BTreeSet<JobId>> =
                parts.into_iter().filter(|p| !p.is_empty()).collect();
            let group_count = parts.len();
            let base = m / group_count;
            let extra = m % group_count;
            let mut queue = VecDeque::new();
            let mut at = 0;
            for (i, part) in parts.into_iter().enumerate() {
                let size = base + usize::from(i < extra);
                queue.push_back((part, (at..at + size).collect()));
                at += size;
            }
            self.pending = Some(queue);
        }
        let pending = self.pending.as_mut().expect("initialized above");
        let Some((jobs, machines)) = pending.pop_front() else {
            return Ok(AlgorithmAction::Wait);
        };
        Ok(AlgorithmAction::AssignBatch { batch: Batch::new(jobs)?, machines })
    }

    fn needs(&self) -> SettingNeeds {
        SettingNeeds { multi_machine: true, preemption: false }
    }

    fn guarantee(&self, _n: usize, m: usize) -> Option<TimeValue> {
        let k = isqrt(m as u64).max(1);
        let group = (m as u64) / k;
        let spread = TimeValue::from_integer((m as u64).div_ceil(k));
        let balance = TimeValue::new(m as u64, group).ok()?;
        Some(spread + balance + TimeValue::one())
    }
}

/// Preemptive widening in phases: phase k runs ⌊m/q^k⌋ batches on machine
/// groups that grow q-fold each phase, cutting a phase once at most
/// ⌊m/q^(k+1)⌋ of its batches are live. Here q is the smallest integer with
/// q^q ≥ m; multiplier 9q − 2.
#[derive(Debug, Default)]
pub struct PhasedWidening {
    initialized: bool,
    q: u64,
    level: u32,
    phase_size: usize,
    pending: VecDeque<(BTreeSet<JobId>, usize)>,
    cutting: bool,
}

impl PhasedWidening {
    fn batches_at(&self, m: usize, level: u32) -> usize {
        match self.q.checked_pow(level) {
            Some(d) if d > 0 => (m as u64 / d) as usize,
            _ => 0,
        }
    }

    fn start_phase(&mut self, state: &ObservableState) -> Result<(), Error> {
        let m = state.machine_count;
        let target = self.batches_at(m, self.level).max(1).min(state.pool.len());
        let parts = rebalance_parts(min_max_parts(state, &state.pool, target)?, target);
        let parts: Vec<BTreeSet<JobId>> = parts.into_iter().filter(|p| !p.is_empty()).collect();
        let count = parts.len();
        let base = m / count;
        let extra = m % count;
        self.pending = parts
            .into_iter()
            .enumerate()
            .map(|(i, part)| (part, base + usize::from(i < extra)))
            .collect();
        self.phase_size = self.pending.len();
        Ok(())
    }
}

impl Strategy for PhasedWidening {
    fn name(&self) -> String {
        "phased-widening".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if !self.initialized {
            if state.pool.is_empty() {
                return Ok(AlgorithmAction::Wait);
            }
            self.q = min_self_power_at_least(state.machine_count as u64);
            self.initialized = true;
        }
        loop {
            if let Some((jobs, width)) = self.pending.front() {
                let idle = state.idle_machines();
                if idle.is_empty() {
                    return Ok(AlgorithmAction::Wait);
                }
                // Work-conserving: a batch takes up to its target width but
                // never waits for more machines to free.
                let take = (*width).min(idle.len());
                let machines = idle[..take].to_vec();
                let batch = Batch::new(jobs.clone())?;
                self.pending.pop_front();
                return Ok(AlgorithmAction::AssignBatch { batch, machines });
            }
            if self.cutting {
                if let Some(live) = state.live_batches.first() {
                    return Ok(AlgorithmAction::PreemptBatch { batch: live.batch.clone() });
                }
                self.cutting = false;
            }
            let live = state.live_batches.len();
            if live == 0 {
                if state.pool.is_empty() {
                    return Ok(AlgorithmAction::Wait);
                }
                self.start_phase(state)?;
                continue;
            }
            let next_b = self.batches_at(state.machine_count, self.level + 1);
            if next_b >= 1 && live <= next_b && live < self.phase_size {
                self.cutting = true;
                self.level += 1;
                continue;
            }
            return Ok(AlgorithmAction::Wait);
        }
    }

    fn needs(&self) -> SettingNeeds {
        SettingNeeds { multi_machine: true, preemption: true }
    }

    fn guarantee(&self, _n: usize, m: usize) -> Option<TimeValue> {
        let q = min_self_power_at_least(m.max(1) as u64);
        Some(TimeValue::from_integer(9 * q - 2))
    }
}

/// Selector for single-machine batches without preemption: with n ≥ m³ the
/// one-batch rule's multiplier m is the smaller, otherwise capped batches
/// win.
pub struct AutoNpSingle {
    inner: Option<Box<dyn Strategy>>,
}

impl AutoNpSingle {
    pub fn new() -> Self {
        AutoNpSingle { inner: None }
    }

    fn chooses_single(n: usize, m: usize) -> bool {
        m.saturating_mul(m).saturating_mul(m) <= n
    }
}

impl Default for AutoNpSingle {
    fn default() -> Self {
        Self::new()
    }
}

impl Strategy for AutoNpSingle {
    fn name(&self) -> String {
        "auto-np-single".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if self.inner.is_none() {
            if state.pool.is_empty() {
                return Ok(AlgorithmAction::Wait);
            }
            self.inner = Some(if Self::chooses_single(state.pool.len(), state.machine_count) {
                Box::new(SingleBatch)
            } else {
                Box::new(CappedBatches::default())
            });
        }
        self.inner.as_mut().expect("chosen above").decide(state)
    }

    fn guarantee(&self, n: usize, m: usize) -> Option<TimeValue> {
        if Self::chooses_single(n, m) {
            SingleBatch.guarantee(n, m)
        } else {
            CappedBatches::default().guarantee(n, m)
        }
    }
}

/// Selector for multi-machine batches without preemption: with n ≥ m² the
/// group spread's ~2√m multiplier beats list scheduling's n/m + 1, and vice
/// versa below.
pub struct AutoNpMulti {
    inner: Option<Box<dyn Strategy>>,
}

impl AutoNpMulti {
    pub fn new() -> Self {
        AutoNpMulti { inner: None }
    }

    fn chooses_spread(n: usize, m: usize) -> bool {
        m.saturating_mul(m) <= n
    }
}

impl Default for AutoNpMulti {
    fn default() -> Self {
        Self::new()
    }
}

impl Strategy for AutoNpMulti {
    fn name(&self) -> String {
        "auto-np-multi".into()
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if self.inner.is_none() {
            if state.pool.is_empty() {
                return Ok(AlgorithmAction::Wait);
            }
            self.inner = Some(if Self::chooses_spread(state.pool.len(), state.machine_count) {
                Box::new(GroupSpread::default())
            } else {
                Box::new(ListSingletons)
            });
        }
        self.inner.as_mut().expect("chosen above").decide(state)
    }

    fn needs(&self) -> SettingNeeds {
        SettingNeeds { multi_machine: true, preemption: false }
    }

    fn guarantee(&self, n: usize, m: usize) -> Option<TimeValue> {
        if Self::chooses_spread(n, m) {
            GroupSpread::default().guarantee(n, m)
        } else {
            ListSingletons.guarantee(n, m)
        }
    }
}

/// Release-time wrapper: ignore arrivals while a wave is in flight. Each
/// wave hands everything currently available to a fresh copy of the inner
/// strategy and hides the rest; a new wave starts when the previous one is
/// fully completed. Multiplier 2ρ + 1 for an inner multiplier of ρ.
pub struct IgnoreReleaseTimes {
    factory: Box<dyn Fn() -> Box<dyn Strategy>>,
    probe: Box<dyn Strategy>,
    inner: Option<Box<dyn Strategy>>,
    wave: BTreeSet<JobId>,
}

impl IgnoreReleaseTimes {
    pub fn new(factory: impl Fn() -> Box<dyn Strategy> + 'static) -> Self {
        let probe = factory();
        IgnoreReleaseTimes { factory: Box::new(factory), probe, inner: None, wave: BTreeSet::new() }
    }

    /// Wraps a strategy given by name, e.g. `"single-batch"`.
    pub fn wrapping(inner_spec: &str) -> Result<Self, Error> {
        strategy_by_name(inner_spec)?;
        let spec = inner_spec.to_string();
        Ok(Self::new(move || {
            strategy_by_name(&spec).expect("validated at construction")
        }))
    }
}

fn filter_for_wave<'a>(
    state: &ObservableState<'a>,
    wave: &BTreeSet<JobId>,
) -> ObservableState<'a> {
    let mut filtered = state.clone();
    filtered.pool = state.pool.intersection(wave).copied().collect();
    filtered
        .unreleased
        .extend(state.pool.difference(wave).copied());
    filtered.completed = state
        .completed
        .iter()
        .filter(|(id, _)| wave.contains(*id))
        .map(|(id, p)| (*id, p.clone()))
        .collect();
    filtered
        .live_batches
        .retain(|b| b.batch.iter().all(|j| wave.contains(&j)));
    filtered
}

impl Strategy for IgnoreReleaseTimes {
    fn name(&self) -> String {
        format!("ignore({})", self.probe.name())
    }

    fn decide(&mut self, state: &ObservableState) -> Result<AlgorithmAction, Error> {
        if !self.wave.is_empty() && self.wave.iter().all(|j| state.completed.contains_key(j)) {
            self.wave.clear();
            self.inner = None;
        }
        if self.wave.is_empty() {
            if state.pool.is_empty() {
                return Ok(AlgorithmAction::Wait);
            }
            self.wave = state.pool.clone();
            self.inner = Some((self.factory)());
        }
        let filtered = filter_for_wave(state, &self.wave);
        self.inner.as_mut().expect("wave open").decide(&filtered)
    }

    fn needs(&self) -> SettingNeeds {
        self.probe.needs()
    }

    fn guarantee(&self, n: usize, m: usize) -> Option<TimeValue> {
        let inner = self.probe.guarantee(n, m)?;
        Some(&inner * &TimeValue::from_integer(2) + TimeValue::one())
    }
}

/// Every plain strategy name `strategy_by_name` accepts (the ignore wrapper
/// additionally accepts `ignore(<name>)`).
pub const STRATEGY_NAMES: &[&str] = &[
    "single-batch",
    "list-singletons",
    "capped-batches",
    "phased-refinement",
    "group-spread",
    "phased-widening",
    "auto-np-single",
    "auto-np-multi",
];

pub fn strategy_by_name(spec: &str) -> Result<Box<dyn Strategy>, Error> {
    let spec = spec.trim();
    if let Some(inner) = spec.strip_prefix("ignore(").and_then(|s| s.strip_suffix(')')) {
        return Ok(Box::new(IgnoreReleaseTimes::wrapping(inner)?));
    }
    match spec {
        "single-batch" => Ok(Box::new(SingleBatch)),
        "list-singletons" => Ok(Box::new(ListSingletons)),
        "capped-batches" => Ok(Box::new(CappedBatches::default())),
        "phased-refinement" => Ok(Box::new(PhasedRefinement::default())),
        "group-spread" => Ok(Box::new(GroupSpread::default())),
        "phased-widening" => Ok(Box::new(PhasedWidening::default())),
        "auto-np-single" => Ok(Box::new(AutoNpSingle::new())),
        "auto-np-multi" => Ok(Box::new(AutoNpMulti::new())),
        other => Err(Error::Parse(format!("unknown strategy '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, EngineSettings, ExecutionOrder};
    use crate::instance::{Instance, Job, MachineId};
    use crate::setup::SetupModel;
    use crate::trace::{validate_trace, TraceEvent};

    fn tv(x: u64) -> TimeValue {
        TimeValue::from_integer(x)
    }

    fn constant_instance(m: usize, execs: &[u64]) -> Instance {
        Instance {
            machines: m,
            setup_model: SetupModel::constant(),
            jobs: execs.iter().enumerate().map(|(id, &p)| Job::plain(id, tv(p))).collect(),
        }
    }

    fn assigned_batches(events: &[TraceEvent]) -> Vec<(TimeValue, Vec<JobId>, Vec<MachineId>)> {
        events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::AssignBatch { time, batch, machines } => {
                    Some((time.clone(), batch.to_vec(), machines.clone()))
                }
                _ => None,
            })
            .collect()
    }

    #[test]
    fn single_batch_runs_everything_in_one_setup() {
        let instance = constant_instance(2, &[1, 2, 3]);
        let settings = EngineSettings::single_machine_nonpreemptive();
        let run = simulate(&instance, &mut SingleBatch, &settings).unwrap();
        // One setup of cost 1, then 6 units of work on one machine.
        assert_eq!(run.trace.makespan, tv(7));
        assert_eq!(assigned_batches(&run.trace.events).len(), 1);
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
    }

    #[test]
    fn list_singletons_schedules_greedily() {
        let instance = constant_instance(2, &[0, 0, 2]);
        let settings = EngineSettings::single_machine_nonpreemptive();
        let run = simulate(&instance, &mut ListSingletons, &settings).unwrap();
        // Jobs 0 and 1 take [0,1] on both machines; job 2 runs [1,2]+[2,4].
        assert_eq!(run.trace.makespan, tv(4));
        assert_eq!(assigned_batches(&run.trace.events).len(), 3);
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
    }

    #[test]
    fn capped_batches_respects_the_size_cap() {
        let instance = constant_instance(2, &[0; 8]);
        let settings = EngineSettings::single_machine_nonpreemptive();
        let run = simulate(&instance, &mut CappedBatches::default(), &settings).unwrap();
        let batches = assigned_batches(&run.trace.events);
        // cap = ⌈√(8/2)⌉ = 2, so four pairs, two rounds on two machines.
        assert_eq!(batches.len(), 4);
        assert!(batches.iter().all(|(_, jobs, _)| jobs.len() <= 2));
        assert_eq!(run.trace.makespan, tv(2));
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
    }

    #[test]
    fn capped_batches_guarantee_value() {
        // n = 8, m = 2: k = 2 + ⌈√16⌉ = 6, cap = 2 -> 6/2 + 1 + 2 = 6.
        assert_eq!(CappedBatches::default().guarantee(8, 2), Some(tv(6)));
        assert!(CappedBatches::default().guarantee(40, 2).is_none());
    }

    #[test]
    fn phased_refinement_delegates_on_few_machines() {
        // n = 5 -> q = 3; m = 2 < 6 delegates to the one-batch rule.
        let instance = constant_instance(2, &[1, 1, 1, 1, 1]);
        let settings = EngineSettings::single_machine_preemptive();
        let run = simulate(&instance, &mut PhasedRefinement::default(), &settings).unwrap();
        assert_eq!(assigned_batches(&run.trace.events).len(), 1);
        assert_eq!(run.trace.makespan, tv(6));
    }

    #[test]
    fn phased_refinement_cuts_and_resplits() {
        // n = 9 -> q = 3 (3^3 >= 9), m = 6 >= 2q, threshold ⌊6/3⌋ = 2,
        // first cap ⌈9/6⌉ = 2. The capped lex partition is
        // {0,1},{2,3},{4,5},{6,7},{8}; rebalancing splits {0,1} so six
        // batches deploy. Jobs 2 and 8 run long, so at t=1 exactly their two
        // batches are live: the phase is cut, job 3 returns and re-runs.
        let mut instance = constant_instance(6, &[0, 0, 5, 0, 0, 0, 0, 0, 5]);
        instance.machines = 6;
        let settings = EngineSettings::single_machine_preemptive();
        let run = simulate(&instance, &mut PhasedRefinement::default(), &settings).unwrap();
        let preempts = run
            .trace
            .events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Preempt { .. }))
            .count();
        assert_eq!(preempts, 2);
        // Job 3 is reassigned as a singleton second-phase batch at t=1.
        let batches = assigned_batches(&run.trace.events);
        assert!(batches.contains(&(tv(1), vec![3], vec![0])));
        // The preempted running jobs finish at 6; job 3 finishes at 2.
        assert_eq!(run.trace.makespan, tv(6));
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
    }

    #[test]
    fn group_spread_uses_machine_groups() {
        let instance = Instance {
            machines: 4,
            setup_model: SetupModel::unweighted_type_specific([0, 1]),
            jobs: vec![
                Job::typed(0, tv(1), 0),
                Job::typed(1, tv(1), 0),
                Job::typed(2, tv(1), 1),
                Job::typed(3, tv(1), 1),
            ],
        };
        let settings = EngineSettings::multi_machine_nonpreemptive();
        let run = simulate(&instance, &mut GroupSpread::default(), &settings).unwrap();
        let batches = assigned_batches(&run.trace.events);
        // k = ⌊√4⌋ = 2: the exact split keeps types whole; groups {0,1} and
        // {2,3} of machines.
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].2, vec![0, 1]);
        assert_eq!(batches[1].2, vec![2, 3]);
        // Each group: setup 1, two unit jobs on two machines -> makespan 2.
        assert_eq!(run.trace.makespan, tv(2));
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
    }

    #[test]
    fn phased_widening_widens_after_a_cut() {
        // m = 4 -> q = 2. Phase 0: four singleton-machine batches. With jobs
        // 5 and 7 long-running, their two batches are live at t=1 (threshold
        // ⌊4/2⌋ = 2): cut. Leftovers {5,7} re-split into two batches on two
        // machines each (work-conserving deployment may narrow them).
        let instance = constant_instance(4, &[0, 0, 0, 0, 5, 0, 5, 0]);
        let settings = EngineSettings::multi_machine_preemptive();
        let run = simulate(&instance, &mut PhasedWidening::default(), &settings).unwrap();
        let preempts = run
            .trace
            .events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Preempt { .. }))
            .count();
        assert!(preempts >= 2, "expected the first phase to be cut");
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
        // Jobs 5 and 7 must be re-run after the cut.
        let reassigned: BTreeSet<JobId> = assigned_batches(&run.trace.events)
            .iter()
            .filter(|(t, _, _)| *t > tv(0))
            .flat_map(|(_, jobs, _)| jobs.clone())
            .collect();
        assert!(reassigned.contains(&5) && reassigned.contains(&7));
    }

    #[test]
    fn auto_selectors_pick_the_documented_branch() {
        assert_eq!(AutoNpSingle::new().guarantee(8, 2), SingleBatch.guarantee(8, 2));
        assert_eq!(
            AutoNpSingle::new().guarantee(4, 2),
            CappedBatches::default().guarantee(4, 2)
        );
        assert_eq!(
            AutoNpMulti::new().guarantee(9, 3),
            GroupSpread::default().guarantee(9, 3)
        );
        assert_eq!(AutoNpMulti::new().guarantee(5, 3), ListSingletons.guarantee(5, 3));

        // Behavior matches the chosen branch: n = 8 = m³ on two machines
        // runs as one batch.
        let instance = constant_instance(2, &[1; 8]);
        let settings = EngineSettings::single_machine_nonpreemptive();
        let run = simulate(&instance, &mut AutoNpSingle::new(), &settings).unwrap();
        assert_eq!(assigned_batches(&run.trace.events).len(), 1);
    }

    #[test]
    fn ignore_wrapper_runs_in_waves() {
        let mut instance = constant_instance(2, &[1, 1, 1, 1]);
        instance.jobs[2].release = tv(1);
        instance.jobs[3].release = tv(1);
        let settings = EngineSettings::single_machine_nonpreemptive();
        let mut wrapper = IgnoreReleaseTimes::wrapping("single-batch").unwrap();
        assert_eq!(wrapper.name(), "ignore(single-batch)");
        let run = simulate(&instance, &mut wrapper, &settings).unwrap();
        let batches = assigned_batches(&run.trace.events);
        // Wave one: {0,1} assigned at 0, done at 3. Wave two: {2,3} at 3.
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0], (tv(0), vec![0, 1], vec![0]));
        assert_eq!(batches[1], (tv(3), vec![2, 3], vec![0]));
        assert_eq!(run.trace.makespan, tv(6));
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
    }

    #[test]
    fn ignore_wrapper_hides_mid_wave_arrivals() {
        let mut instance = constant_instance(1, &[1, 1, 1]);
        instance.jobs[2].release = TimeValue::new(1, 2).unwrap();
        let settings = EngineSettings::single_machine_nonpreemptive();
        let mut wrapper = IgnoreReleaseTimes::wrapping("list-singletons").unwrap();
        let run = simulate(&instance, &mut wrapper, &settings).unwrap();
        let batches = assigned_batches(&run.trace.events);
        // Job 2 arrives at 1/2 but waits for the {0,1} wave to finish at 4.
        assert_eq!(
            batches,
            vec![
                (tv(0), vec![0], vec![0]),
                (tv(2), vec![1], vec![0]),
                (tv(4), vec![2], vec![0]),
            ]
        );
        assert_eq!(run.trace.makespan, tv(6));
    }

    #[test]
    fn ignore_guarantee_doubles_and_adds_one() {
        let wrapper = IgnoreReleaseTimes::wrapping("single-batch").unwrap();
        assert_eq!(wrapper.guarantee(5, 3), Some(tv(7)));
    }

    #[test]
    fn names_parse_back_to_strategies() {
        for name in STRATEGY_NAMES {
            assert_eq!(strategy_by_name(name).unwrap().name(), *name);
        }
        assert_eq!(
            strategy_by_name("ignore(capped-batches)").unwrap().name(),
            "ignore(capped-batches)"
        );
        assert!(strategy_by_name("mystery").is_err());
        assert!(strategy_by_name("ignore(mystery)").is_err());
    }

    #[test]
    fn strategies_work_under_the_per_type_order() {
        // Sanity: a realistic combination used by the widening adversary.
        let instance = Instance {
            machines: 4,
            setup_model: SetupModel::unweighted_type_specific([0, 1, 2, 3]),
            jobs: (0..8).map(|id| Job::typed(id, tv(0), (id % 4) as u32)).collect(),
        };
        let settings = EngineSettings {
            allow_multi_machine: true,
            allow_preemption: true,
            restart_from_scratch: false,
            execution_order: ExecutionOrder::PerTypeQueue,
        };
        let run = simulate(&instance, &mut PhasedWidening::default(), &settings).unwrap();
        assert!(validate_trace(&instance, &run.trace, &settings).is_valid());
    }
}
