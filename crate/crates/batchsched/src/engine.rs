//! Deterministic discrete-event simulator.
//!
//! The engine owns the hidden execution times. An online strategy sees only
//! an [`ObservableState`] (no execution time of an uncompleted job appears
//! there), proposes actions at event instants, and the engine enforces the
//! scheduling rules: each machine pays the full batch setup before
//! executing, jobs are pulled from a shared per-batch queue first-come
//! first-served, preempting a batch frees setting-up machines instantly
//! while running jobs finish, and every quantity is an exact rational.
//!
//! Determinism: pending timers are processed in order of (time, kind,
//! machine, job) with kind ranked sample < setup-done < job-done < release,
//! so identical inputs always produce byte-identical traces.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instance::{Batch, Instance, JobCatalog, JobId, MachineId};
use crate::setup::SetupModel;
use crate::strategy::Strategy;
use crate::time::TimeValue;
use crate::trace::{ScheduleTrace, TraceEvent};

/// Which of the four problem variants the engine enforces, plus the restart
/// flavor of preemption and the intra-batch execution order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineSettings {
    /// Allow one batch to occupy several machines at once.
    pub allow_multi_machine: bool,
    pub allow_preemption: bool,
    /// On preemption, completed members of the batch lose their completed
    /// status and must be executed again (re-runs take the same time).
    pub restart_from_scratch: bool,
    pub execution_order: ExecutionOrder,
}

impl EngineSettings {
    pub fn single_machine_nonpreemptive() -> Self {
        EngineSettings {
            allow_multi_machine: false,
            allow_preemption: false,
            restart_from_scratch: false,
            execution_order: ExecutionOrder::FcfsByJobId,
        }
    }

    pub fn single_machine_preemptive() -> Self {
        EngineSettings { allow_preemption: true, ..Self::single_machine_nonpreemptive() }
    }

    pub fn multi_machine_nonpreemptive() -> Self {
        EngineSettings { allow_multi_machine: true, ..Self::single_machine_nonpreemptive() }
    }

    pub fn multi_machine_preemptive() -> Self {
        EngineSettings {
            allow_multi_machine: true,
            allow_preemption: true,
            restart_from_scratch: false,
            execution_order: ExecutionOrder::FcfsByJobId,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionOrder {
    /// All machines of a batch share one queue ordered by job id.
    FcfsByJobId,
    /// Each machine walks the batch's types in ascending order, paying every
    /// type's setup and executing whatever jobs of the current type are
    /// still unstarted. Requires a type-specific model.
    PerTypeQueue,
}

/// What a strategy may do at a decision point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgorithmAction {
    AssignBatch { batch: Batch, machines: Vec<MachineId> },
    PreemptBatch { batch: Batch },
    Wait,
}

/// One machine as the strategy sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineView {
    Idle,
    SettingUp {
        batch: Batch,
        /// Under the per-type walk, the type currently being set up;
        /// `None` when the whole batch shares one setup.
        setup_type: Option<u32>,
    },
    Executing { batch: Batch, job: JobId },
    /// Preempted mid-execution: the job runs to completion, then the
    /// machine frees.
    Finishing { job: JobId },
}

impl MachineView {
    pub fn is_idle(&self) -> bool {
        matches!(self, MachineView::Idle)
    }
}

/// A currently assigned batch as the strategy sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveBatchView {
    pub batch: Batch,
    pub machines: Vec<MachineId>,
    pub assigned_at: TimeValue,
    pub completed_members: BTreeSet<JobId>,
    pub unstarted: BTreeSet<JobId>,
}

/// Everything the online side is allowed to observe. Execution times appear
/// only for completed jobs.
#[derive(Debug, Clone)]
pub struct ObservableState<'a> {
    pub now: TimeValue,
    pub machine_count: usize,
    pub machines: Vec<MachineView>,
    /// Released, uncompleted, unassigned jobs.
    pub pool: BTreeSet<JobId>,
    pub unreleased: BTreeSet<JobId>,
    /// Completed jobs with their revealed execution times.
    pub completed: BTreeMap<JobId, TimeValue>,
    pub live_batches: Vec<LiveBatchView>,
    pub catalog: &'a JobCatalog,
    pub model: &'a SetupModel,
}

impl ObservableState<'_> {
    pub fn setup_cost(&self, ids: &BTreeSet<JobId>) -> Result<TimeValue, Error> {
        self.model.cost(self.catalog, ids)
    }

    pub fn idle_machines(&self) -> Vec<MachineId> {
        self.machines
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_idle())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Supplies execution times. The fixed oracle reads the instance; adaptive
/// adversaries decide lazily from observed behavior. Once committed for a
/// job, the value never changes (re-executions after a restart reuse it).
pub trait ExecutionOracle {
    /// Instants at which `on_sample` should observe the run. Each instant is
    /// observed before any event at that instant is applied.
    fn sample_times(&self) -> Vec<TimeValue> {
        Vec::new()
    }

    fn on_sample(&mut self, _state: &ObservableState) {}

    fn on_assign(&mut self, _batch: &Batch, _machines: &[MachineId], _now: &TimeValue) {}

    /// Which candidate a machine pulls next; candidates are the unstarted
    /// jobs visible to it. Default: lowest id (first-come by id).
    fn pick_next(&mut self, candidates: &BTreeSet<JobId>) -> JobId {
        *candidates.iter().next().expect("candidates nonempty")
    }

    /// The execution time of `job`, committed the moment it first starts.
    fn execution_time(&mut self, job: JobId, now: &TimeValue) -> TimeValue;
}

/// Reads execution times straight from the instance.
pub struct FixedOracle {
    exec: Vec<TimeValue>,
}

impl FixedOracle {
    pub fn new(instance: &Instance) -> Self {
        FixedOracle { exec: instance.jobs.iter().map(|j| j.execution.clone()).collect() }
    }
}

impl ExecutionOracle for FixedOracle {
    fn execution_time(&mut self, job: JobId, _now: &TimeValue) -> TimeValue {
        self.exec[job].clone()
    }
}

/// The outcome of a simulation: the audit trace and the execution times
/// that were actually committed.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub trace: ScheduleTrace,
    pub realized: BTreeMap<JobId, TimeValue>,
}

impl SimRun {
    /// The base instance with execution times replaced by the realized
    /// ones — what an adaptive run "really was" in hindsight.
    pub fn realized_instance(&self, base: &Instance) -> Instance {
        let mut instance = base.clone();
        for job in &mut instance.jobs {
            if let Some(p) = self.realized.get(&job.id) {
                job.execution = p.clone();
            }
        }
        instance
    }

    pub fn makespan(&self) -> &TimeValue {
        &self.trace.makespan
    }
}

const RANK_SAMPLE: u8 = 0;
const RANK_SETUP_DONE: u8 = 1;
const RANK_JOB_DONE: u8 = 2;
const RANK_RELEASE: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
enum EntryKind {
    Sample,
    SetupDone { epoch: u64 },
    JobDone { job: JobId, epoch: u64 },
    Release { job: JobId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    time: TimeValue,
    rank: u8,
    machine: usize,
    job: usize,
    kind: EntryKind,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .cmp(&other.time)
            .then_with(|| self.rank.cmp(&other.rank))
            .then_with(|| self.machine.cmp(&other.machine))
            .then_with(|| self.job.cmp(&other.job))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum MachineStatus {
    Idle,
    SettingUp,
    Running(JobId),
    /// Preempted while executing; finishes the job, then frees.
    Finishing(JobId),
}

struct MachineState {
    status: MachineStatus,
    assignment: Option<usize>,
    epoch: u64,
    current_type: Option<u32>,
    walk_rest: Vec<u32>,
}

struct Assignment {
    batch: Batch,
    t0: TimeValue,
    unstarted: BTreeSet<JobId>,
    completed_members: BTreeSet<JobId>,
    attached: BTreeSet<MachineId>,
    live: bool,
}

struct Sim<'a> {
    instance: &'a Instance,
    catalog: JobCatalog,
    settings: &'a EngineSettings,
    machines: Vec<MachineState>,
    assignments: Vec<Assignment>,
    queue: BinaryHeap<std::cmp::Reverse<Entry>>,
    events: Vec<TraceEvent>,
    released: BTreeSet<JobId>,
    completed: BTreeMap<JobId, TimeValue>,
    /// Jobs belonging to a live batch or currently executing.
    engaged: BTreeSet<JobId>,
    realized: BTreeMap<JobId, TimeValue>,
}

const MAX_TOTAL_STEPS: u64 = 2_000_000;
const MAX_DECISIONS_PER_INSTANT: u64 = 100_000;

/// Runs a strategy against an instance with execution times taken from the
/// instance itself.
pub fn simulate(
    instance: &Instance,
    strategy: &mut dyn Strategy,
    settings: &EngineSettings,
) -> Result<SimRun, Error> {
    let mut oracle = FixedOracle::new(instance);
    simulate_with_oracle(instance, strategy, settings, &mut oracle)
}

/// Runs a strategy with an arbitrary execution-time oracle (the adaptive
/// adversaries plug in here).
pub fn simulate_with_oracle(
    instance: &Instance,
    strategy: &mut dyn Strategy,
    settings: &EngineSettings,
    oracle: &mut dyn ExecutionOracle,
) -> Result<SimRun, Error> {
    if instance.machines == 0 {
        return Err(Error::InvalidInstance("machine count must be positive".into()));
    }
    if settings.restart_from_scratch && !settings.allow_preemption {
        return Err(Error::SettingsMismatch(
            "restart-from-scratch requires preemption".into(),
        ));
    }
    if settings.execution_order == ExecutionOrder::PerTypeQueue {
        if !matches!(instance.setup_model, SetupModel::TypeSpecific { .. }) {
            return Err(Error::SettingsMismatch(
                "the per-type execution order requires a type-specific model".into(),
            ));
        }
        if instance.jobs.iter().any(|j| j.type_tag.is_none()) {
            return Err(Error::SettingsMismatch(
                "the per-type execution order requires every job to carry a type".into(),
            ));
        }
    }

    let mut sim = Sim {
        instance,
        catalog: instance.catalog(),
        settings,
        machines: (0..instance.machines)
            .map(|_| MachineState {
                status: MachineStatus::Idle,
                assignment: None,
                epoch: 0,
                current_type: None,
                walk_rest: Vec::new(),
            })
            .collect(),
        assignments: Vec::new(),
        queue: BinaryHeap::new(),
        events: Vec::new(),
        released: BTreeSet::new(),
        completed: BTreeMap::new(),
        engaged: BTreeSet::new(),
        realized: BTreeMap::new(),
    };
    for job in &instance.jobs {
        sim.queue.push(std::cmp::Reverse(Entry {
            time: job.release.clone(),
            rank: RANK_RELEASE,
            machine: 0,
            job: job.id,
            kind: EntryKind::Release { job: job.id },
        }));
    }
    for t in oracle.sample_times() {
        sim.queue.push(std::cmp::Reverse(Entry {
            time: t,
            rank: RANK_SAMPLE,
            machine: 0,
            job: 0,
            kind: EntryKind::Sample,
        }));
    }

    let n = instance.n();
    let mut now = TimeValue::zero();
    let mut steps: u64 = 0;
    loop {
        // Apply every pending effect at the current instant.
        while sim.next_entry_time().is_some_and(|t| *t == now) {
            let entry = sim.queue.pop().expect("peeked").0;
            sim.process_entry(entry, oracle)?;
            steps += 1;
            if steps > MAX_TOTAL_STEPS {
                return Err(Error::Livelock);
            }
        }
        if sim.completed.len() == n {
            break;
        }
        // Let the strategy act until it waits or spawns same-instant work.
        let mut decisions: u64 = 0;
        loop {
            decisions += 1;
            steps += 1;
            if decisions > MAX_DECISIONS_PER_INSTANT || steps > MAX_TOTAL_STEPS {
                return Err(Error::Livelock);
            }
            let action = {
                let state = sim.view(&now);
                strategy.decide(&state)?
            };
            match action {
                AlgorithmAction::Wait => break,
                act => sim.apply_action(act, &now, oracle)?,
            }
            if sim.next_entry_time().is_some_and(|t| *t == now) {
                break;
            }
        }
        if sim.next_entry_time().is_some_and(|t| *t == now) {
            continue;
        }
        match sim.next_entry_time() {
            Some(t) => now = t.clone(),
            None => return Err(Error::Livelock),
        }
    }

    Ok(SimRun {
        trace: ScheduleTrace::from_events(sim.events),
        realized: sim.realized,
    })
}

impl Sim<'_> {
    fn next_entry_time(&self) -> Option<&TimeValue> {
        self.queue.peek().map(|e| &e.0.time)
    }

    fn view(&self, now: &TimeValue) -> ObservableState<'_> {
        let pool: BTreeSet<JobId> = self
            .released
            .iter()
            .copied()
            .filter(|id| !self.completed.contains_key(id) && !self.engaged.contains(id))
            .collect();
        let unreleased: BTreeSet<JobId> =
            (0..self.instance.n()).filter(|id| !self.released.contains(id)).collect();
        let machines = self
            .machines
            .iter()
            .map(|st| match &st.status {
                MachineStatus::Idle => MachineView::Idle,
                MachineStatus::SettingUp => MachineView::SettingUp {
                    batch: self.assignments[st.assignment.expect("setting up")].batch.clone(),
                    setup_type: match self.settings.execution_order {
                        ExecutionOrder::FcfsByJobId => None,
                        ExecutionOrder::PerTypeQueue => st.current_type,
                    },
                },
                MachineStatus::Running(job) => MachineView::Executing {
                    batch: self.assignments[st.assignment.expect("running")].batch.clone(),
                    job: *job,
                },
                MachineStatus::Finishing(job) => MachineView::Finishing { job: *job },
            })
            .collect();
        let live_batches = self
            .assignments
            .iter()
            .filter(|a| a.live)
            .map(|a| LiveBatchView {
                batch: a.batch.clone(),
                machines: a.attached.iter().copied().collect(),
                assigned_at: a.t0.clone(),
                completed_members: a.completed_members.clone(),
                unstarted: a.unstarted.clone(),
            })
            .collect();
        ObservableState {
            now: now.clone(),
            machine_count: self.instance.machines,
            machines,
            pool,
            unreleased,
            completed: self.completed.clone(),
            live_batches,
            catalog: &self.catalog,
            model: &self.instance.setup_model,
        }
    }

    fn process_entry(
        &mut self,
        entry: Entry,
        oracle: &mut dyn ExecutionOracle,
    ) -> Result<(), Error> {
        let now = entry.time.clone();
        match entry.kind {
            EntryKind::Sample => {
                let state = self.view(&now);
                oracle.on_sample(&state);
            }
            EntryKind::Release { job } => {
                self.released.insert(job);
            }
            EntryKind::SetupDone { epoch } => {
                let machine = entry.machine;
                if self.machines[machine].epoch != epoch
                    || self.machines[machine].status != MachineStatus::SettingUp
                {
                    return Ok(());
                }
                match self.settings.execution_order {
                    ExecutionOrder::FcfsByJobId => self.continue_default(machine, &now, oracle)?,
                    ExecutionOrder::PerTypeQueue => {
                        self.continue_per_type(machine, &now, oracle)?
                    }
                }
            }
            EntryKind::JobDone { job, epoch } => {
                let machine = entry.machine;
                if self.machines[machine].epoch != epoch {
                    return Ok(());
                }
                let status = self.machines[machine].status.clone();
                let finishing = match status {
                    MachineStatus::Running(j) if j == job => false,
                    MachineStatus::Finishing(j) if j == job => true,
                    _ => return Ok(()),
                };
                self.events.push(TraceEvent::JobComplete { time: now.clone(), machine, job });
                let p = self.realized.get(&job).expect("started jobs are realized").clone();
                self.completed.insert(job, p);
                self.engaged.remove(&job);
                if let Some(aidx) = self.machines[machine].assignment {
                    if self.assignments[aidx].live {
                        self.assignments[aidx].completed_members.insert(job);
                    }
                }
                if finishing {
                    self.detach(machine, &now);
                } else {
                    match self.settings.execution_order {
                        ExecutionOrder::FcfsByJobId => {
                            self.continue_default(machine, &now, oracle)?
                        }
                        ExecutionOrder::PerTypeQueue => {
                            self.continue_per_type(machine, &now, oracle)?
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Shared-queue mode: pull the next unstarted job of the batch, or free.
    fn continue_default(
        &mut self,
        machine: MachineId,
        now: &TimeValue,
        oracle: &mut dyn ExecutionOracle,
    ) -> Result<(), Error> {
        let aidx = self.machines[machine].assignment.expect("attached");
        let candidates = self.assignments[aidx].unstarted.clone();
        if candidates.is_empty() {
            self.detach(machine, now);
            return Ok(());
        }
        self.start_job(machine, aidx, &candidates, now, oracle)
    }

    /// Per-type walk: execute the current type while it has unstarted jobs,
    /// otherwise pay the next type's setup, and free after the last type.
    fn continue_per_type(
        &mut self,
        machine: MachineId,
        now: &TimeValue,
        oracle: &mut dyn ExecutionOracle,
    ) -> Result<(), Error> {
        let aidx = self.machines[machine].assignment.expect("attached");
        let Some(current) = self.machines[machine].current_type else {
            self.detach(machine, now);
            return Ok(());
        };
        let candidates: BTreeSet<JobId> = self.assignments[aidx]
            .unstarted
            .iter()
            .copied()
            .filter(|&id| self.catalog.get(id).ok().and_then(|m| m.type_tag) == Some(current))
            .collect();
        if !candidates.is_empty() {
            return self.start_job(machine, aidx, &candidates, now, oracle);
        }
        if self.machines[machine].walk_rest.is_empty() {
            self.machines[machine].current_type = None;
            self.detach(machine, now);
            return Ok(());
        }
        let next = self.machines[machine].walk_rest.remove(0);
        self.machines[machine].current_type = Some(next);
        self.machines[machine].status = MachineStatus::SettingUp;
        let batch = self.assignments[aidx].batch.clone();
        self.events.push(TraceEvent::SetupStart { time: now.clone(), machine, batch });
        let w = self.type_weight(next)?;
        let epoch = self.machines[machine].epoch;
        self.queue.push(std::cmp::Reverse(Entry {
            time: now + &w,
            rank: RANK_SETUP_DONE,
            machine,
            job: 0,
            kind: EntryKind::SetupDone { epoch },
        }));
        Ok(())
    }

    fn start_job(
        &mut self,
        machine: MachineId,
        aidx: usize,
        candidates: &BTreeSet<JobId>,
        now: &TimeValue,
        oracle: &mut dyn ExecutionOracle,
    ) -> Result<(), Error> {
        let job = oracle.pick_next(candidates);
        if !candidates.contains(&job) {
            return Err(Error::IllegalAction(format!(
                "oracle picked job {job} outside the candidate set"
            )));
        }
        self.assignments[aidx].unstarted.remove(&job);
        let p = self
            .realized
            .entry(job)
            .or_insert_with(|| oracle.execution_time(job, now))
            .clone();
        self.events.push(TraceEvent::JobStart { time: now.clone(), machine, job });
        self.machines[machine].status = MachineStatus::Running(job);
        let epoch = self.machines[machine].epoch;
        self.queue.push(std::cmp::Reverse(Entry {
            time: now + &p,
            rank: RANK_JOB_DONE,
            machine,
            job,
            kind: EntryKind::JobDone { job, epoch },
        }));
        Ok(())
    }

    /// Machine leaves its assignment and goes idle; closes the assignment
    /// when it was the last one attached.
    fn detach(&mut self, machine: MachineId, now: &TimeValue) {
        let st = &mut self.machines[machine];
        st.status = MachineStatus::Idle;
        st.current_type = None;
        st.walk_rest.clear();
        if let Some(aidx) = st.assignment.take() {
            self.assignments[aidx].attached.remove(&machine);
            if self.assignments[aidx].attached.is_empty() {
                self.assignments[aidx].live = false;
            }
        }
        self.events.push(TraceEvent::MachineFree { time: now.clone(), machine });
    }

    fn type_weight(&self, tag: u32) -> Result<TimeValue, Error> {
        match &self.instance.setup_model {
            SetupModel::TypeSpecific { type_weights } => type_weights
                .get(&tag)
                .cloned()
                .ok_or(Error::UnknownTag { job: 0, what: "type", tag: tag.to_string() }),
            _ => Err(Error::SettingsMismatch(
                "per-type execution requires a type-specific model".into(),
            )),
        }
    }

    fn apply_action(
        &mut self,
        action: AlgorithmAction,
        now: &TimeValue,
        oracle: &mut dyn ExecutionOracle,
    ) -> Result<(), Error> {
        match action {
            AlgorithmAction::Wait => Ok(()),
            AlgorithmAction::AssignBatch { batch, machines } => {
                self.assign(batch, machines, now, oracle)
            }
            AlgorithmAction::PreemptBatch { batch } => self.preempt(batch, now),
        }
    }

    fn assign(
        &mut self,
        batch: Batch,
        machines: Vec<MachineId>,
        now: &TimeValue,
        oracle: &mut dyn ExecutionOracle,
    ) -> Result<(), Error> {
        if machines.is_empty() {
            return Err(Error::IllegalAction("assignment names no machines".into()));
        }
        let mut ms = machines;
        ms.sort_unstable();
        ms.dedup();
        if ms.len() > 1 && !self.settings.allow_multi_machine {
            return Err(Error::IllegalAction(
                "multi-machine batches are not allowed in this setting".into(),
            ));
        }
        for &machine in &ms {
            if machine >= self.instance.machines {
                return Err(Error::IllegalAction(format!("machine {machine} does not exist")));
            }
            if self.machines[machine].status != MachineStatus::Idle {
                return Err(Error::IllegalAction(format!("machine {machine} is not idle")));
            }
        }
        for id in batch.iter() {
            if id >= self.instance.n() {
                return Err(Error::IllegalAction(format!("job {id} does not exist")));
            }
            if !self.released.contains(&id) {
                return Err(Error::IllegalAction(format!("job {id} is not released yet")));
            }
            if self.completed.contains_key(&id) {
                return Err(Error::IllegalAction(format!("job {id} is already completed")));
            }
            if self.engaged.contains(&id) {
                return Err(Error::IllegalAction(format!(
                    "job {id} is already part of a live batch"
                )));
            }
        }
        let cost = self.instance.setup_model.cost(&self.catalog, batch.ids())?;
        let aidx = self.assignments.len();
        self.assignments.push(Assignment {
            batch: batch.clone(),
            t0: now.clone(),
            unstarted: batch.ids().clone(),
            completed_members: BTreeSet::new(),
            attached: ms.iter().copied().collect(),
            live: true,
        });
        self.engaged.extend(batch.iter());
        self.events.push(TraceEvent::AssignBatch {
            time: now.clone(),
            batch: batch.clone(),
            machines: ms.clone(),
        });
        let walk: Vec<u32> = if self.settings.execution_order == ExecutionOrder::PerTypeQueue {
            let mut types: Vec<u32> = batch
                .iter()
                .filter_map(|id| self.catalog.get(id).ok().and_then(|m| m.type_tag))
                .collect();
            types.sort_unstable();
            types.dedup();
            types
        } else {
            Vec::new()
        };
        for &machine in &ms {
            let st = &mut self.machines[machine];
            st.epoch += 1;
            st.assignment = Some(aidx);
            st.status = MachineStatus::SettingUp;
            let epoch = st.epoch;
            self.events.push(TraceEvent::SetupStart {
                time: now.clone(),
                machine,
                batch: batch.clone(),
            });
            let setup_ends = match self.settings.execution_order {
                ExecutionOrder::FcfsByJobId => now + &cost,
                ExecutionOrder::PerTypeQueue => {
                    let first = walk[0];
                    self.machines[machine].current_type = Some(first);
                    self.machines[machine].walk_rest = walk[1..].to_vec();
                    now + &self.type_weight(first)?
                }
            };
            self.queue.push(std::cmp::Reverse(Entry {
                time: setup_ends,
                rank: RANK_SETUP_DONE,
                machine,
                job: 0,
                kind: EntryKind::SetupDone { epoch },
            }));
        }
        oracle.on_assign(&batch, &ms, now);
        Ok(())
    }

    fn preempt(&mut self, batch: Batch, now: &TimeValue) -> Result<(), Error> {
        if !self.settings.allow_preemption {
            return Err(Error::IllegalAction(
                "preemption is not allowed in this setting".into(),
            ));
        }
        let Some(aidx) = self
            .assignments
            .iter()
            .position(|a| a.live && a.batch == batch)
        else {
            return Err(Error::IllegalAction("no live assignment carries that batch".into()));
        };
        let completed_members = self.assignments[aidx].completed_members.clone();
        self.events.push(TraceEvent::Preempt {
            time: now.clone(),
            batch: batch.clone(),
            completed: completed_members.iter().copied().collect(),
        });
        let attached: Vec<MachineId> =
            self.assignments[aidx].attached.iter().copied().collect();
        for machine in attached {
            match self.machines[machine].status.clone() {
                MachineStatus::SettingUp => {
                    // Cancel the pending setup timer and free instantly.
                    self.machines[machine].epoch += 1;
                    self.detach(machine, now);
                }
                MachineStatus::Running(job) => {
                    // Runs to completion, then frees.
                    self.machines[machine].status = MachineStatus::Finishing(job);
                }
                _ => {}
            }
        }
        let unstarted = std::mem::take(&mut self.assignments[aidx].unstarted);
        for id in unstarted {
            self.engaged.remove(&id);
        }
        if self.settings.restart_from_scratch {
            for id in &completed_members {
                self.completed.remove(id);
            }
        }
        self.assignments[aidx].live = false;
        Ok(())
    }
}
