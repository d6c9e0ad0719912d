//! Schedule traces: the audit log every simulation emits, plus an
//! independent replay validator.
//!
//! The validator re-derives machine and job state from the events alone and
//! reports every rule it sees broken; it shares no code with the engine, so
//! it can catch engine bugs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::engine::{EngineSettings, ExecutionOrder};
use crate::error::Error;
use crate::instance::{Batch, Instance, JobId, MachineId};
use crate::time::TimeValue;

/// One schedule event. Within a single instant, events are ordered
/// completion first, then preemptions, machine frees, assignments, setup
/// starts, and job starts; ties break on machine id then job id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    AssignBatch { time: TimeValue, batch: Batch, machines: Vec<MachineId> },
    SetupStart { time: TimeValue, machine: MachineId, batch: Batch },
    JobStart { time: TimeValue, machine: MachineId, job: JobId },
    JobComplete { time: TimeValue, machine: MachineId, job: JobId },
    Preempt { time: TimeValue, batch: Batch, completed: Vec<JobId> },
    MachineFree { time: TimeValue, machine: MachineId },
}

impl TraceEvent {
    pub fn time(&self) -> &TimeValue {
        match self {
            TraceEvent::AssignBatch { time, .. }
            | TraceEvent::SetupStart { time, .. }
            | TraceEvent::JobStart { time, .. }
            | TraceEvent::JobComplete { time, .. }
            | TraceEvent::Preempt { time, .. }
            | TraceEvent::MachineFree { time, .. } => time,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            TraceEvent::JobComplete { .. } => 0,
            TraceEvent::Preempt { .. } => 1,
            TraceEvent::MachineFree { .. } => 2,
            TraceEvent::AssignBatch { .. } => 3,
            TraceEvent::SetupStart { .. } => 4,
            TraceEvent::JobStart { .. } => 5,
        }
    }

    fn machine_key(&self) -> usize {
        match self {
            TraceEvent::AssignBatch { machines, .. } => {
                machines.iter().copied().min().unwrap_or(usize::MAX)
            }
            TraceEvent::SetupStart { machine, .. }
            | TraceEvent::JobStart { machine, .. }
            | TraceEvent::JobComplete { machine, .. }
            | TraceEvent::MachineFree { machine, .. } => *machine,
            TraceEvent::Preempt { .. } => usize::MAX,
        }
    }

    fn job_key(&self) -> usize {
        match self {
            TraceEvent::JobStart { job, .. } | TraceEvent::JobComplete { job, .. } => *job,
            TraceEvent::AssignBatch { batch, .. }
            | TraceEvent::SetupStart { batch, .. }
            | TraceEvent::Preempt { batch, .. } => batch.min_id(),
            TraceEvent::MachineFree { .. } => usize::MAX,
        }
    }

    fn sort_key(&self) -> (TimeValue, u8, usize, usize) {
        (self.time().clone(), self.kind_rank(), self.machine_key(), self.job_key())
    }
}

/// A time-ordered event log with the makespan it implies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub events: Vec<TraceEvent>,
    pub makespan: TimeValue,
}

impl ScheduleTrace {
    /// Sorts the events into canonical order and computes the makespan
    /// (the latest completion, or 0 when nothing completes).
    pub fn from_events(mut events: Vec<TraceEvent>) -> Self {
        let mut decorated: Vec<((TimeValue, u8, usize, usize), TraceEvent)> =
            events.drain(..).map(|e| (e.sort_key(), e)).collect();
        decorated.sort_by(|a, b| a.0.cmp(&b.0));
        let events: Vec<TraceEvent> = decorated.into_iter().map(|(_, e)| e).collect();
        let makespan = events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::JobComplete { time, .. } => Some(time.clone()),
                _ => None,
            })
            .max()
            .unwrap_or_else(TimeValue::zero);
        ScheduleTrace { events, makespan }
    }

    /// The makespan, requiring every instance job to have completed.
    pub fn completed_makespan(&self, instance: &Instance) -> Result<TimeValue, Error> {
        let done: BTreeSet<JobId> = self
            .events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::JobComplete { job, .. } => Some(*job),
                _ => None,
            })
            .collect();
        let missing: Vec<JobId> =
            (0..instance.n()).filter(|id| !done.contains(id)).collect();
        if !missing.is_empty() {
            return Err(Error::UnfinishedJobs { missing });
        }
        Ok(self.makespan.clone())
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("event serialization"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(s: &str) -> Result<Self, Error> {
        let mut events = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let event: TraceEvent = serde_json::from_str(line)
                .map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 1)))?;
            events.push(event);
        }
        Ok(ScheduleTrace::from_events(events))
    }
}

/// A broken rule found while replaying a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub message: String,
}

impl Violation {
    fn new(rule: &str, message: String) -> Self {
        Violation { rule: rule.to_string(), message }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

struct AssignmentState {
    batch: Batch,
    machines: Vec<MachineId>,
    t0: TimeValue,
    setup_seen: BTreeSet<MachineId>,
    first_start_seen: BTreeSet<MachineId>,
    completed_members: BTreeSet<JobId>,
    preempted: bool,
}

struct Replay<'a> {
    instance: &'a Instance,
    settings: &'a EngineSettings,
    catalog: crate::instance::JobCatalog,
    default_order: bool,
    n: usize,
    m: usize,
    assignments: Vec<AssignmentState>,
    // Machine -> index into `assignments` it is currently serving.
    machine_at: Vec<Option<usize>>,
    // Job -> (machine, start time) for starts without a completion yet.
    open_start: BTreeMap<JobId, (MachineId, TimeValue)>,
    // Job -> live assignment index.
    job_assigned: BTreeMap<JobId, usize>,
    effectively_completed: BTreeSet<JobId>,
    ever_completed: BTreeSet<JobId>,
    report: ValidationReport,
}

impl<'a> Replay<'a> {
    fn check_machine(&mut self, machine: MachineId) -> bool {
        if machine >= self.m {
            self.report.violations.push(Violation::new(
                "unknown-machine",
                format!("machine {machine} outside [0, {})", self.m),
            ));
            return false;
        }
        true
    }

    fn check_job(&mut self, job: JobId) -> bool {
        if job >= self.n {
            self.report.violations.push(Violation::new(
                "unknown-job",
                format!("job {job} outside [0, {})", self.n),
            ));
            return false;
        }
        true
    }

    /// Whether applying `event` now would be consistent with the replayed
    /// state. The canonical within-instant order puts completions before
    /// starts, so a zero-length execution legitimately presents its
    /// completion ahead of its own start; events that are not yet
    /// consistent wait for the rest of the instant before being judged.
    fn ready(&self, event: &TraceEvent) -> bool {
        match event {
            TraceEvent::AssignBatch { machines, .. } => machines
                .iter()
                .all(|&machine| machine >= self.m || self.machine_at[machine].is_none()),
            TraceEvent::SetupStart { machine, batch, .. } => {
                *machine >= self.m
                    || self.machine_at[*machine]
                        .is_some_and(|idx| self.assignments[idx].batch == *batch)
            }
            TraceEvent::JobStart { machine, job, .. } => {
                *machine >= self.m
                    || *job >= self.n
                    || (self.machine_at[*machine]
                        .is_some_and(|idx| self.assignments[idx].batch.contains(*job))
                        && !self.open_start.contains_key(job)
                        && !self.effectively_completed.contains(job))
            }
            TraceEvent::JobComplete { machine, job, .. } => {
                *machine >= self.m || *job >= self.n || self.open_start.contains_key(job)
            }
            TraceEvent::Preempt { batch, completed, .. } => {
                let declared: BTreeSet<JobId> = completed.iter().copied().collect();
                batch
                    .iter()
                    .find_map(|job| self.job_assigned.get(&job).copied())
                    .filter(|&idx| {
                        let a = &self.assignments[idx];
                        a.batch == *batch && !a.preempted && a.completed_members == declared
                    })
                    .is_some()
            }
            TraceEvent::MachineFree { machine, .. } => {
                if *machine >= self.m {
                    return true;
                }
                let Some(idx) = self.machine_at[*machine] else {
                    return false;
                };
                if self.open_start.values().any(|(on, _)| on == machine) {
                    return false;
                }
                let a = &self.assignments[idx];
                a.preempted
                    || a.batch.iter().all(|j| {
                        a.completed_members.contains(&j) || self.open_start.contains_key(&j)
                    })
            }
        }
    }

    fn apply(&mut self, event: &TraceEvent) {
        match event {
            TraceEvent::AssignBatch { time, batch, machines } => {
                if machines.is_empty() {
                    self.report.violations.push(Violation::new(
                        "empty-assignment",
                        format!("batch assigned to no machines at t={time}"),
                    ));
                    return;
                }
                if machines.len() > 1 && !self.settings.allow_multi_machine {
                    self.report.violations.push(Violation::new(
                        "multi-machine-forbidden",
                        format!("batch on {} machines in a single-machine setting", machines.len()),
                    ));
                }
                let mut ok = true;
                for &machine in machines {
                    if !self.check_machine(machine) {
                        ok = false;
                        continue;
                    }
                    if self.machine_at[machine].is_some() {
                        self.report.violations.push(Violation::new(
                            "machine-busy",
                            format!("machine {machine} assigned while busy at t={time}"),
                        ));
                        ok = false;
                    }
                }
                for job in batch.iter() {
                    if !self.check_job(job) {
                        ok = false;
                        continue;
                    }
                    if self.job_assigned.contains_key(&job) || self.open_start.contains_key(&job)
                    {
                        self.report.violations.push(Violation::new(
                            "double-assign",
                            format!("job {job} placed in two live batches at t={time}"),
                        ));
                        ok = false;
                    }
                    if self.effectively_completed.contains(&job) {
                        self.report.violations.push(Violation::new(
                            "completed-reassigned",
                            format!("completed job {job} reassigned at t={time}"),
                        ));
                        ok = false;
                    }
                    if self.instance.jobs[job].release > *time {
                        self.report.violations.push(Violation::new(
                            "unreleased",
                            format!("job {job} assigned at t={time} before release"),
                        ));
                    }
                }
                if !ok {
                    return;
                }
                let idx = self.assignments.len();
                self.assignments.push(AssignmentState {
                    batch: batch.clone(),
                    machines: machines.clone(),
                    t0: time.clone(),
                    setup_seen: BTreeSet::new(),
                    first_start_seen: BTreeSet::new(),
                    completed_members: BTreeSet::new(),
                    preempted: false,
                });
                for &machine in machines {
                    self.machine_at[machine] = Some(idx);
                }
                for job in batch.iter() {
                    self.job_assigned.insert(job, idx);
                }
            }
            TraceEvent::SetupStart { time, machine, batch } => {
                if !self.check_machine(*machine) {
                    return;
                }
                let Some(idx) = self.machine_at[*machine] else {
                    self.report.violations.push(Violation::new(
                        "machine-idle",
                        format!("setup on idle machine {machine} at t={time}"),
                    ));
                    return;
                };
                let a = &self.assignments[idx];
                // Per-type walks pay one setup per visited type, so several
                // SetupStart events per machine are fine; each must name the
                // batch the machine is serving.
                if a.batch != *batch {
                    self.report.violations.push(Violation::new(
                        "setup-batch-mismatch",
                        format!("machine {machine} setup names a batch it is not serving at t={time}"),
                    ));
                }
                if self.default_order && *time != a.t0 && !a.setup_seen.contains(machine) {
                    let t0 = a.t0.clone();
                    self.report.violations.push(Violation::new(
                        "setup-accounting",
                        format!(
                            "machine {machine} setup at t={time}, expected the assignment instant t={t0}"
                        ),
                    ));
                }
                self.assignments[idx].setup_seen.insert(*machine);
            }
            TraceEvent::JobStart { time, machine, job } => {
                if !self.check_machine(*machine) || !self.check_job(*job) {
                    return;
                }
                let Some(idx) = self.machine_at[*machine] else {
                    self.report.violations.push(Violation::new(
                        "machine-idle",
                        format!("job {job} started on idle machine {machine} at t={time}"),
                    ));
                    return;
                };
                if !self.assignments[idx].batch.contains(*job) {
                    self.report.violations.push(Violation::new(
                        "job-not-in-batch",
                        format!("machine {machine} started job {job} outside its batch at t={time}"),
                    ));
                }
                if self.open_start.contains_key(job) {
                    self.report.violations.push(Violation::new(
                        "double-start",
                        format!("job {job} started twice without completing at t={time}"),
                    ));
                }
                if self.effectively_completed.contains(job) {
                    self.report.violations.push(Violation::new(
                        "completed-restarted",
                        format!("completed job {job} started again at t={time}"),
                    ));
                }
                if self.instance.jobs[*job].release > *time {
                    self.report.violations.push(Violation::new(
                        "unreleased",
                        format!("job {job} started at t={time} before release"),
                    ));
                }
                if self.default_order && !self.assignments[idx].first_start_seen.contains(machine)
                {
                    let a = &self.assignments[idx];
                    match self.instance.setup_model.cost(&self.catalog, a.batch.ids()) {
                        Ok(c) => {
                            let expected = &a.t0 + &c;
                            if *time != expected {
                                self.report.violations.push(Violation::new(
                                    "setup-accounting",
                                    format!(
                                        "machine {machine} first start at t={time}, expected assignment + setup = {expected}"
                                    ),
                                ));
                            }
                        }
                        Err(e) => self.report.violations.push(Violation::new(
                            "setup-accounting",
                            format!("setup cost unavailable: {e}"),
                        )),
                    }
                }
                self.assignments[idx].first_start_seen.insert(*machine);
                self.open_start.insert(*job, (*machine, time.clone()));
            }
            TraceEvent::JobComplete { time, machine, job } => {
                if !self.check_machine(*machine) || !self.check_job(*job) {
                    return;
                }
                match self.open_start.remove(job) {
                    None => {
                        self.report.violations.push(Violation::new(
                            "completion-without-start",
                            format!("job {job} completed at t={time} without a start"),
                        ));
                    }
                    Some((started_on, started_at)) => {
                        if started_on != *machine {
                            self.report.violations.push(Violation::new(
                                "machine-mismatch",
                                format!(
                                    "job {job} started on machine {started_on} but completed on {machine}"
                                ),
                            ));
                        }
                        let expected = &started_at + &self.instance.jobs[*job].execution;
                        if *time != expected {
                            self.report.violations.push(Violation::new(
                                "execution-duration",
                                format!(
                                    "job {job} completed at t={time}, expected start + p = {expected}"
                                ),
                            ));
                        }
                    }
                }
                if self.ever_completed.contains(job) && !self.settings.restart_from_scratch {
                    self.report.violations.push(Violation::new(
                        "duplicate-completion",
                        format!("job {job} completed twice at t={time}"),
                    ));
                }
                if self.effectively_completed.contains(job) {
                    self.report.violations.push(Violation::new(
                        "duplicate-completion",
                        format!("job {job} completed again without a restart at t={time}"),
                    ));
                }
                self.ever_completed.insert(*job);
                self.effectively_completed.insert(*job);
                if let Some(idx) = self.job_assigned.remove(job) {
                    self.assignments[idx].completed_members.insert(*job);
                }
            }
            TraceEvent::Preempt { time, batch, completed } => {
                if !self.settings.allow_preemption {
                    self.report.violations.push(Violation::new(
                        "preemption-forbidden",
                        format!("preempt at t={time} in a non-preemptive setting"),
                    ));
                }
                let idx = batch
                    .iter()
                    .find_map(|job| self.job_assigned.get(&job).copied())
                    .filter(|&idx| {
                        self.assignments[idx].batch == *batch && !self.assignments[idx].preempted
                    });
                let Some(idx) = idx else {
                    self.report.violations.push(Violation::new(
                        "preempt-unassigned",
                        format!("preempt of a batch with no live assignment at t={time}"),
                    ));
                    return;
                };
                let completed_set: BTreeSet<JobId> = completed.iter().copied().collect();
                {
                    let a = &self.assignments[idx];
                    if completed_set != a.completed_members {
                        self.report.violations.push(Violation::new(
                            "preempt-bookkeeping",
                            format!(
                                "preempt at t={time} reports completed {completed:?}, replay saw {:?}",
                                a.completed_members
                            ),
                        ));
                    }
                    // Elapsed-time feasibility: setup plus the completed
                    // work split over the machines plus one straggler job
                    // must account for the processing time so far.
                    let k = a.machines.len() as u64;
                    let elapsed = time.checked_sub(&a.t0).unwrap_or_else(|_| TimeValue::zero());
                    let c = self
                        .instance
                        .setup_model
                        .cost(&self.catalog, a.batch.ids())
                        .unwrap_or_else(|_| TimeValue::zero());
                    let completed_work = completed_set
                        .iter()
                        .map(|&j| self.instance.jobs[j].execution.clone())
                        .sum::<TimeValue>();
                    let max_p = a
                        .batch
                        .iter()
                        .map(|j| self.instance.jobs[j].execution.clone())
                        .max()
                        .unwrap_or_else(TimeValue::zero);
                    let budget = c + completed_work.div_int(k.max(1)).unwrap() + max_p;
                    if budget < elapsed {
                        self.report.violations.push(Violation::new(
                            "preemption-timing",
                            format!(
                                "preempt after {elapsed} exceeds the feasible budget {budget} at t={time}"
                            ),
                        ));
                    }
                }
                self.assignments[idx].preempted = true;
                // Members neither completed nor mid-execution leave the
                // batch; a restart also puts completed members back in play.
                for job in batch.iter() {
                    if !self.open_start.contains_key(&job) {
                        self.job_assigned.remove(&job);
                    }
                }
                if self.settings.restart_from_scratch {
                    for &job in &completed_set {
                        self.effectively_completed.remove(&job);
                    }
                }
            }
            TraceEvent::MachineFree { time, machine } => {
                if !self.check_machine(*machine) {
                    return;
                }
                let Some(idx) = self.machine_at[*machine] else {
                    self.report.violations.push(Violation::new(
                        "machine-idle",
                        format!("free of already idle machine {machine} at t={time}"),
                    ));
                    return;
                };
                if let Some((job, _)) =
                    self.open_start.iter().find(|(_, (on, _))| on == machine)
                {
                    self.report.violations.push(Violation::new(
                        "free-with-open-job",
                        format!("machine {machine} freed at t={time} while job {job} is running"),
                    ));
                }
                let a = &self.assignments[idx];
                if !a.preempted {
                    let unstarted: Vec<JobId> = a
                        .batch
                        .iter()
                        .filter(|j| {
                            !a.completed_members.contains(j) && !self.open_start.contains_key(j)
                        })
                        .collect();
                    if !unstarted.is_empty() {
                        self.report.violations.push(Violation::new(
                            "premature-free",
                            format!(
                                "machine {machine} freed at t={time} with jobs {unstarted:?} unstarted"
                            ),
                        ));
                    }
                }
                self.machine_at[*machine] = None;
            }
        }
    }
}

/// Replays a trace against the instance and settings, reporting every rule
/// violation found. An empty report means the trace is a legal schedule.
///
/// Replay walks the canonical order instant by instant. Within one instant
/// the canonical order is presentational — completions sort before the
/// frees, assignments, and starts they enable, so a zero-length execution
/// shows its completion ahead of its own start. Events whose preconditions
/// are not yet met therefore wait for the rest of the instant; whatever
/// still cannot apply once the instant settles is applied anyway and
/// reported through the usual rules.
pub fn validate_trace(
    instance: &Instance,
    trace: &ScheduleTrace,
    settings: &EngineSettings,
) -> ValidationReport {
    let m = instance.m();
    let n = instance.n();
    let mut replay = Replay {
        instance,
        settings,
        catalog: instance.catalog(),
        default_order: settings.execution_order == ExecutionOrder::FcfsByJobId,
        n,
        m,
        assignments: Vec::new(),
        machine_at: vec![None; m],
        open_start: BTreeMap::new(),
        job_assigned: BTreeMap::new(),
        effectively_completed: BTreeSet::new(),
        ever_completed: BTreeSet::new(),
        report: ValidationReport::default(),
    };

    // Rule: canonical event ordering.
    for window in trace.events.windows(2) {
        if window[0].sort_key() > window[1].sort_key() {
            replay.report.violations.push(Violation::new(
                "ordering",
                format!("event out of order at t={}", window[1].time()),
            ));
        }
    }

    let events = &trace.events;
    let mut at = 0;
    while at < events.len() {
        let mut end = at;
        while end < events.len() && events[end].time() == events[at].time() {
            end += 1;
        }
        let mut pending: VecDeque<&TraceEvent> = events[at..end].iter().collect();
        loop {
            let mut progressed = false;
            for _ in 0..pending.len() {
                let event = pending.pop_front().expect("pending is non-empty");
                if replay.ready(event) {
                    replay.apply(event);
                    progressed = true;
                } else {
                    pending.push_back(event);
                }
            }
            if pending.is_empty() || !progressed {
                break;
            }
        }
        // Anything still stuck is genuinely inconsistent; apply it in
        // canonical order so the rules report exactly what is wrong.
        for event in pending {
            replay.apply(event);
        }
        at = end;
    }

    for id in 0..n {
        if !replay.effectively_completed.contains(&id) {
            replay.report.violations.push(Violation::new(
                "missing-completion",
                format!("job {id} never completed"),
            ));
        }
    }

    let max_complete = trace
        .events
        .iter()
        .filter_map(|e| match e {
            TraceEvent::JobComplete { time, .. } => Some(time.clone()),
            _ => None,
        })
        .max()
        .unwrap_or_else(TimeValue::zero);
    if trace.makespan != max_complete {
        replay.report.violations.push(Violation::new(
            "makespan-mismatch",
            format!(
                "trace reports makespan {}, completions end at {max_complete}",
                trace.makespan
            ),
        ));
    }

    replay.report
}

/// Checks the batch-duration envelope on every assignment that ran to
/// natural completion: the elapsed time T from assignment to the last
/// member completion satisfies T ≤ c(X) + p(X)/k + max p, and in the
/// default execution order also T ≥ c(X) + p(X)/k. The lower bound does
/// not hold under the per-type walk, where a machine can move on to later
/// setups while others still execute.
pub fn check_batch_completion_bounds(
    instance: &Instance,
    trace: &ScheduleTrace,
    settings: &EngineSettings,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let catalog = instance.catalog();
    struct Live {
        t0: TimeValue,
        k: u64,
        remaining: BTreeSet<JobId>,
        batch: Batch,
        last_complete: TimeValue,
    }
    let mut live: Vec<Live> = Vec::new();
    let mut job_to_live: BTreeMap<JobId, usize> = BTreeMap::new();
    for event in &trace.events {
        match event {
            TraceEvent::AssignBatch { time, batch, machines } => {
                let idx = live.len();
                live.push(Live {
                    t0: time.clone(),
                    k: machines.len() as u64,
                    remaining: batch.ids().clone(),
                    batch: batch.clone(),
                    last_complete: time.clone(),
                });
                for job in batch.iter() {
                    job_to_live.insert(job, idx);
                }
            }
            TraceEvent::Preempt { batch, .. } => {
                // A preempted assignment never finishes naturally; drop it.
                for job in batch.iter() {
                    job_to_live.remove(&job);
                }
            }
            TraceEvent::JobComplete { time, job, .. } => {
                let Some(&idx) = job_to_live.get(job) else { continue };
                job_to_live.remove(job);
                let entry = &mut live[idx];
                entry.remaining.remove(job);
                entry.last_complete = time.clone();
                if entry.remaining.is_empty() {
                    let elapsed = entry
                        .last_complete
                        .checked_sub(&entry.t0)
                        .unwrap_or_else(|_| TimeValue::zero());
                    let Ok(c) = instance.setup_model.cost(&catalog, entry.batch.ids()) else {
                        continue;
                    };
                    let total_p = entry
                        .batch
                        .iter()
                        .map(|j| instance.jobs[j].execution.clone())
                        .sum::<TimeValue>();
                    let max_p = entry
                        .batch
                        .iter()
                        .map(|j| instance.jobs[j].execution.clone())
                        .max()
                        .unwrap_or_else(TimeValue::zero);
                    let share = total_p.div_int(entry.k.max(1)).unwrap();
                    let lower = &c + &share;
                    let upper = &lower + &max_p;
                    if elapsed > upper {
                        violations.push(Violation::new(
                            "batch-upper-bound",
                            format!(
                                "batch {:?} took {elapsed}, above c + p/k + max p = {upper}",
                                entry.batch.to_vec()
                            ),
                        ));
                    }
                    if settings.execution_order == ExecutionOrder::FcfsByJobId && elapsed < lower {
                        violations.push(Violation::new(
                            "batch-lower-bound",
                            format!(
                                "batch {:?} took {elapsed}, below c + p/k = {lower}",
                                entry.batch.to_vec()
                            ),
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    violations
}
