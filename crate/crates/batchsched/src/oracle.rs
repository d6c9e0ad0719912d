//! Offline optimum and lower bounds.
//!
//! With every execution time on the table, an optimal offline schedule
//! needs neither preemption nor machine sharing: restarting a batch only
//! repeats setup work, and splitting a shared batch into per-machine
//! pieces never raises any machine's finish time (setups are monotone).
//! When all jobs are available at time zero that leaves one batch per
//! machine, i.e. a partition of the job set into at most m parts, and the
//! optimum is the best achievable max over parts of setup plus work. With
//! release times each machine instead runs a sequence of batches, and a
//! batch cannot start before its latest release.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::instance::{Instance, JobId};
use crate::partition::{exact_min_max_partition, Partition};
use crate::setup::{SetupModel, UNIVERSE_LIMIT};
use crate::time::TimeValue;

/// Largest job count the release-respecting oracle enumerates. Splitting
/// jobs into batch sequences grows much faster than the partition search,
/// so this sits below [`UNIVERSE_LIMIT`].
pub const RELEASE_ORACLE_LIMIT: usize = 8;

/// Exhaustive minimum over partitions of the jobs into at most m parts of
/// the largest part's setup-plus-work, with a witnessing partition (padded
/// with empty parts to exactly m). Requires every release at time zero.
pub fn optimal_makespan(instance: &Instance) -> Result<(TimeValue, Partition), Error> {
    let n = instance.n();
    if n > UNIVERSE_LIMIT {
        return Err(Error::UniverseTooLarge { size: n, limit: UNIVERSE_LIMIT });
    }
    if instance.has_releases() {
        return Err(Error::InvalidInstance(
            "the partition oracle requires all releases at time zero; \
             use optimal_makespan_with_releases"
                .into(),
        ));
    }
    let m = instance.m();
    if n == 0 {
        return Ok((TimeValue::zero(), Partition::new(vec![BTreeSet::new(); m])));
    }
    let catalog = instance.catalog();
    let mut search = MakespanSearch {
        items: instance.all_jobs().into_iter().collect(),
        executions: instance.jobs.iter().map(|j| j.execution.clone()).collect(),
        k: m.min(n),
        model: &instance.setup_model,
        catalog: &catalog,
        blocks: Vec::new(),
        block_values: Vec::new(),
        best_value: None,
        best_blocks: Vec::new(),
    };
    search.run(0, TimeValue::zero())?;
    let value = search.best_value.expect("nonempty search always finds a partition");
    let mut parts = search.best_blocks;
    parts.resize(m, BTreeSet::new());
    Ok((value, Partition::new(parts)))
}

/// Canonical-form partition search minimizing max (setup + work): the first
/// member of each new block appears in increasing order, lower block
/// indices are tried first, and only strict improvements are recorded, so
/// the first optimum kept is the lexicographically smallest assignment.
/// Pruning on the running maximum is sound because setups are monotone and
/// work is nonnegative: growing a block never lowers its value.
struct MakespanSearch<'a> {
    items: Vec<JobId>,
    /// Execution time by job id (ids are dense).
    executions: Vec<TimeValue>,
    k: usize,
    model: &'a SetupModel,
    catalog: &'a crate::instance::JobCatalog,
    blocks: Vec<BTreeSet<JobId>>,
    /// Setup plus work per open block.
    block_values: Vec<TimeValue>,
    best_value: Option<TimeValue>,
    best_blocks: Vec<BTreeSet<JobId>>,
}

impl MakespanSearch<'_> {
    fn run(&mut self, pos: usize, running_max: TimeValue) -> Result<(), Error> {
        if let Some(best) = &self.best_value {
            if running_max >= *best {
                return Ok(());
            }
        }
        if pos == self.items.len() {
            self.best_value = Some(running_max);
            self.best_blocks = self.blocks.clone();
            return Ok(());
        }
        let id = self.items[pos];
        let open = self.blocks.len();
        let choices = if open < self.k { open + 1 } else { open };
        for b in 0..choices {
            if b == open {
                self.blocks.push(BTreeSet::new());
                self.block_values.push(TimeValue::zero());
            }
            self.blocks[b].insert(id);
            let setup = self.model.cost(self.catalog, &self.blocks[b])?;
            let work: TimeValue = self.blocks[b]
                .iter()
                .map(|&j| self.executions[j].clone())
                .sum();
            let prev_value = std::mem::replace(&mut self.block_values[b], setup + work);
            let next_max = running_max.clone().max(self.block_values[b].clone());
            self.run(pos + 1, next_max)?;
            self.block_values[b] = prev_value;
            self.blocks[b].remove(&id);
            if b == open {
                self.blocks.pop();
                self.block_values.pop();
            }
        }
        Ok(())
    }
}

/// The analytic lower bound on the optimal makespan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaBound {
    pub value: TimeValue,
    /// True when the instance was too large for the exact min-max setup
    /// partition term and a weaker substitute was used instead.
    pub partial: bool,
}

/// The largest of three quantities no schedule can beat: the best
/// achievable max setup over an m-part split (some machine pays it), total
/// setup-plus-work spread over m machines, and the costliest single job.
pub fn lemma_lower_bound(instance: &Instance) -> Result<LemmaBound, Error> {
    let n = instance.n();
    let m = instance.m();
    if n == 0 {
        return Ok(LemmaBound { value: TimeValue::zero(), partial: false });
    }
    let catalog = instance.catalog();
    let model = &instance.setup_model;
    let all = instance.all_jobs();

    let mut partial = false;
    let setup_term = if n <= UNIVERSE_LIMIT {
        exact_min_max_partition(&all, m, model, &catalog)?.max_cost(model, &catalog)?
    } else {
        partial = true;
        // Weaker stand-in: whichever part holds a type-t job costs at
        // least that type's weight. Other models fall back to zero — the
        // single-job term below still covers them.
        match model {
            SetupModel::TypeSpecific { type_weights } => catalog
                .types_present()
                .iter()
                .filter_map(|t| type_weights.get(t))
                .cloned()
                .max()
                .unwrap_or_else(TimeValue::zero),
            _ => TimeValue::zero(),
        }
    };

    let total_work: TimeValue = instance.jobs.iter().map(|j| j.execution.clone()).sum();
    let full_setup = match model.cost(&catalog, &all) {
        Ok(c) => c,
        // The one cost that can fail on a valid instance is the routing
        // model past its exact-solve limit; its priciest single stop is
        // still a floor.
        Err(Error::TspLimitExceeded { .. }) => {
            partial = true;
            singleton_costs(instance)?
                .into_iter()
                .max()
                .unwrap_or_else(TimeValue::zero)
        }
        Err(e) => return Err(e),
    };
    let average_term = (full_setup + total_work).div_int(m as u64)?;

    let single_term = instance
        .jobs
        .iter()
        .zip(singleton_costs(instance)?)
        .map(|(job, c)| c + job.execution.clone())
        .max()
        .unwrap_or_else(TimeValue::zero);

    let value = setup_term.max(average_term).max(single_term);
    Ok(LemmaBound { value, partial })
}

fn singleton_costs(instance: &Instance) -> Result<Vec<TimeValue>, Error> {
    let catalog = instance.catalog();
    instance
        .jobs
        .iter()
        .map(|j| instance.setup_model.cost(&catalog, &BTreeSet::from([j.id])))
        .collect()
}

/// Exhaustive optimum when jobs carry release times: each machine runs a
/// sequence of single-machine batches, and a batch's setup cannot start
/// before its latest member release (the engine enforces the same rule).
/// Within one machine, running batches in order of ascending latest
/// release is optimal (any inversion can be swapped away without delaying
/// the finish), so the search ranges over job partitions into batches and
/// batch assignments to machines.
pub fn optimal_makespan_with_releases(instance: &Instance) -> Result<TimeValue, Error> {
    let n = instance.n();
    if n > RELEASE_ORACLE_LIMIT {
        return Err(Error::UniverseTooLarge { size: n, limit: RELEASE_ORACLE_LIMIT });
    }
    if n == 0 {
        return Ok(TimeValue::zero());
    }
    let catalog = instance.catalog();
    let items: Vec<JobId> = instance.all_jobs().into_iter().collect();
    let mut search = ReleaseSearch {
        instance,
        catalog: &catalog,
        items,
        blocks: Vec::new(),
        best: None,
    };
    search.split(0)?;
    Ok(search.best.expect("nonempty search always finds a schedule"))
}

/// A batch with its derived scheduling data.
#[derive(Clone)]
struct TimedBatch {
    release: TimeValue,
    duration: TimeValue,
}

struct ReleaseSearch<'a> {
    instance: &'a Instance,
    catalog: &'a crate::instance::JobCatalog,
    items: Vec<JobId>,
    blocks: Vec<BTreeSet<JobId>>,
    best: Option<TimeValue>,
}

impl ReleaseSearch<'_> {
    /// Phase one: canonical enumeration of job partitions into any number
    /// of batches (machine count does not cap the batch count here — one
    /// machine may run many batches back to back).
    fn split(&mut self, pos: usize) -> Result<(), Error> {
        if pos == self.items.len() {
            return self.assign();
        }
        let id = self.items[pos];
        let open = self.blocks.len();
        for b in 0..=open {
            if b == open {
                self.blocks.push(BTreeSet::new());
            }
            self.blocks[b].insert(id);
            self.split(pos + 1)?;
            self.blocks[b].remove(&id);
            if b == open {
                self.blocks.pop();
            }
        }
        Ok(())
    }

    /// Phase two: price the current batches and spread them over machines.
    fn assign(&mut self) -> Result<(), Error> {
        let mut timed = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let setup = self.instance.setup_model.cost(self.catalog, block)?;
            let work: TimeValue = block
                .iter()
                .map(|&j| self.instance.jobs[j].execution.clone())
                .sum();
            let release = block
                .iter()
                .map(|&j| self.instance.jobs[j].release.clone())
                .max()
                .expect("blocks are nonempty");
            timed.push(TimedBatch { release, duration: setup + work });
        }
        // Ascending release is the optimal within-machine order, so machine
        // load folds cleanly if batches arrive release-sorted.
        timed.sort_by(|a, b| a.release.cmp(&b.release));
        let mut loads = vec![TimeValue::zero(); self.instance.m().min(timed.len())];
        self.place(&timed, 0, &mut loads);
        Ok(())
    }

    fn place(&mut self, timed: &[TimedBatch], pos: usize, loads: &mut Vec<TimeValue>) {
        let running_max = loads.iter().max().cloned().unwrap_or_else(TimeValue::zero);
        if let Some(best) = &self.best {
            if running_max >= *best {
                return;
            }
        }
        if pos == timed.len() {
            self.best = Some(running_max);
            return;
        }
        let batch = &timed[pos];
        // Identical machines: only distinct loads are worth trying, and
        // visiting the first machine of each load class breaks symmetry.
        let mut seen: Vec<TimeValue> = Vec::new();
        for i in 0..loads.len() {
            if seen.contains(&loads[i]) {
                continue;
            }
            seen.push(loads[i].clone());
            let prev = loads[i].clone();
            loads[i] = prev.clone().max(batch.release.clone()) + batch.duration.clone();
            self.place(timed, pos + 1, loads);
            loads[i] = prev;
        }
    }
}
