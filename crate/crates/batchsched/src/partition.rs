//! Min-max setup partition solvers.
//!
//! The central problem: split a job set into k parts minimizing the maximum
//! setup cost of any part. An exact enumerator handles small instances
//! (canonical-form search with pruning), a greedy handles the rest, and two
//! refinement helpers produce the size-capped partitions the phased
//! strategies need. Empty parts are legal everywhere and cost 0.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instance::{Batch, JobCatalog, JobId};
use crate::setup::{SetupModel, UNIVERSE_LIMIT};
use crate::time::TimeValue;

/// An ordered list of disjoint (possibly empty) job sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub parts: Vec<BTreeSet<JobId>>,
}

impl Partition {
    pub fn new(parts: Vec<BTreeSet<JobId>>) -> Self {
        Partition { parts }
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn nonempty_parts(&self) -> Vec<Batch> {
        self.parts
            .iter()
            .filter(|p| !p.is_empty())
            .map(|p| Batch::new(p.clone()).expect("filtered nonempty"))
            .collect()
    }

    /// Maximum setup cost over the parts (0 for an all-empty partition).
    pub fn max_cost(&self, model: &SetupModel, catalog: &JobCatalog) -> Result<TimeValue, Error> {
        let mut best = TimeValue::zero();
        for part in &self.parts {
            let c = model.cost(catalog, part)?;
            if c > best {
                best = c;
            }
        }
        Ok(best)
    }

    pub fn covered(&self) -> BTreeSet<JobId> {
        self.parts.iter().flatten().copied().collect()
    }

    /// Checks the parts are pairwise disjoint and cover exactly `jobs`.
    pub fn validate_covers(&self, jobs: &BTreeSet<JobId>) -> Result<(), Error> {
        let total: usize = self.parts.iter().map(|p| p.len()).sum();
        let union = self.covered();
        if total != union.len() {
            return Err(Error::InfeasiblePartition("parts are not disjoint".into()));
        }
        if &union != jobs {
            return Err(Error::InfeasiblePartition(
                "parts do not cover the target job set".into(),
            ));
        }
        Ok(())
    }

    pub fn largest_part_size(&self) -> usize {
        self.parts.iter().map(|p| p.len()).max().unwrap_or(0)
    }
}

/// Exhaustive search state shared by the exact solvers.
struct ExactSearch<'a> {
    items: Vec<JobId>,
    k: usize,
    size_cap: Option<usize>,
    model: &'a SetupModel,
    catalog: &'a JobCatalog,
    blocks: Vec<BTreeSet<JobId>>,
    block_costs: Vec<TimeValue>,
    best_value: Option<TimeValue>,
    best_blocks: Vec<BTreeSet<JobId>>,
}

impl ExactSearch<'_> {
    /// Depth-first over canonical assignments (the first item of each new
    /// block appears in increasing order), trying lower block indices first
    /// so the first optimum found is the lexicographically smallest one.
    /// Prunes on the running maximum, which is sound because every
    /// accepted model is monotone: growing a block never lowers its cost.
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
                self.block_costs.push(TimeValue::zero());
            } else if let Some(cap) = self.size_cap {
                if self.blocks[b].len() >= cap {
                    continue;
                }
            }
            self.blocks[b].insert(id);
            let prev_cost = std::mem::replace(
                &mut self.block_costs[b],
                self.model.cost(self.catalog, &self.blocks[b])?,
            );
            let new_max = running_max.clone().max(self.block_costs[b].clone());
            self.run(pos + 1, new_max)?;
            self.block_costs[b] = prev_cost;
            self.blocks[b].remove(&id);
            if b == open {
                self.blocks.pop();
                self.block_costs.pop();
            }
        }
        Ok(())
    }
}

fn exact_search(
    jobs: &BTreeSet<JobId>,
    k: usize,
    size_cap: Option<usize>,
    model: &SetupModel,
    catalog: &JobCatalog,
) -> Result<Partition, Error> {
    if jobs.len() > UNIVERSE_LIMIT {
        return Err(Error::UniverseTooLarge { size: jobs.len(), limit: UNIVERSE_LIMIT });
    }
    if jobs.is_empty() {
        return Ok(Partition::new(vec![BTreeSet::new(); k]));
    }
    if k == 0 {
        return Err(Error::InfeasiblePartition("k = 0 with a nonempty job set".into()));
    }
    if let Some(cap) = size_cap {
        if k.saturating_mul(cap) < jobs.len() {
            return Err(Error::InfeasiblePartition(format!(
                "{} jobs cannot fit in {k} parts of size at most {cap}",
                jobs.len()
            )));
        }
    }
    let mut search = ExactSearch {
        items: jobs.iter().copied().collect(),
        k,
        size_cap,
        model,
        catalog,
        blocks: Vec::new(),
        block_costs: Vec::new(),
        best_value: None,
        best_blocks: Vec::new(),
    };
    search.run(0, TimeValue::zero())?;
    let mut parts = search.best_blocks;
    parts.resize(k, BTreeSet::new());
    Ok(Partition::new(parts))
}

/// Optimal k-part split of `jobs` minimizing the maximum part setup cost.
/// Only for small job sets; ties go to the lexicographically smallest
/// canonical assignment.
pub fn exact_min_max_partition(
    jobs: &BTreeSet<JobId>,
    k: usize,
    model: &SetupModel,
    catalog: &JobCatalog,
) -> Result<Partition, Error> {
    exact_search(jobs, k, None, model, catalog)
}

/// Optimal k-part split where no part is larger than `size_cap`.
pub fn exact_size_limited_partition(
    jobs: &BTreeSet<JobId>,
    k: usize,
    size_cap: usize,
    model: &SetupModel,
    catalog: &JobCatalog,
) -> Result<Partition, Error> {
    exact_search(jobs, k, Some(size_cap), model, catalog)
}

/// Optimal split for unit-weight type-specific models: distribute whole
/// types round-robin, never splitting a type. The max part cost is
/// ⌈(types present)/k⌉, which matches the exact optimum.
pub fn balanced_type_partition(
    jobs: &BTreeSet<JobId>,
    k: usize,
    model: &SetupModel,
    catalog: &JobCatalog,
) -> Result<Partition, Error> {
    let SetupModel::TypeSpecific { type_weights } = model else {
        return Err(Error::InvalidModel(
            "balanced type split requires a type-specific model".into(),
        ));
    };
    if type_weights.values().any(|w| *w != TimeValue::one()) {
        return Err(Error::InvalidModel(
            "balanced type split requires unit type weights".into(),
        ));
    }
    if k == 0 && !jobs.is_empty() {
        return Err(Error::InfeasiblePartition("k = 0 with a nonempty job set".into()));
    }
    let mut by_type: Vec<(u32, BTreeSet<JobId>)> = Vec::new();
    for &id in jobs {
        let tag = catalog
            .get(id)?
            .type_tag
            .ok_or(Error::MissingTag { job: id, what: "type" })?;
        match by_type.binary_search_by_key(&tag, |(t, _)| *t) {
            Ok(i) => {
                by_type[i].1.insert(id);
            }
            Err(i) => by_type.insert(i, (tag, BTreeSet::from([id]))),
        }
    }
    let mut parts = vec![BTreeSet::new(); k];
    for (i, (_, members)) in by_type.into_iter().enumerate() {
        parts[i % k].extend(members);
    }
    Ok(Partition::new(parts))
}

/// Greedy fallback for job sets too large to enumerate: sort atoms (whole
/// types under a type-specific model, single jobs otherwise) by standalone
/// cost descending and put each on the part whose resulting cost is lowest.
pub fn greedy_lpt_partition(
    jobs: &BTreeSet<JobId>,
    k: usize,
    model: &SetupModel,
    catalog: &JobCatalog,
) -> Result<Partition, Error> {
    if jobs.is_empty() {
        return Ok(Partition::new(vec![BTreeSet::new(); k]));
    }
    if k == 0 {
        return Err(Error::InfeasiblePartition("k = 0 with a nonempty job set".into()));
    }
    let mut atoms: Vec<BTreeSet<JobId>> = match model {
        SetupModel::TypeSpecific { .. } => {
            let mut by_type: std::collections::BTreeMap<u32, BTreeSet<JobId>> =
                std::collections::BTreeMap::new();
            for &id in jobs {
                let tag = catalog
                    .get(id)?
                    .type_tag
                    .ok_or(Error::MissingTag { job: id, what: "type" })?;
                by_type.entry(tag).or_default().insert(id);
            }
            by_type.into_values().collect()
        }
        _ => jobs.iter().map(|&id| BTreeSet::from([id])).collect(),
    };
    let mut keyed: Vec<(TimeValue, BTreeSet<JobId>)> = atoms
        .drain(..)
        .map(|a| Ok((model.cost(catalog, &a)?, a)))
        .collect::<Result<_, Error>>()?;
    keyed.sort_by(|(ca, a), (cb, b)| cb.cmp(ca).then_with(|| a.cmp(b)));
    let mut parts = vec![BTreeSet::new(); k];
    let mut costs = vec![TimeValue::zero(); k];
    for (_, atom) in keyed {
        let mut best: Option<(TimeValue, usize)> = None;
        for (i, part) in parts.iter().enumerate() {
            let mut merged = part.clone();
            merged.extend(atom.iter().copied());
            let c = model.cost(catalog, &merged)?;
            if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                best = Some((c, i));
            }
        }
        let (c, i) = best.expect("k >= 1");
        parts[i].extend(atom);
        costs[i] = c;
    }
    Ok(Partition::new(parts))
}

/// How `size_limited_partition` should find its answer.
#[derive(Debug, Clone)]
pub enum SizeLimitMode {
    /// Enumerate exactly (small job sets only).
    Exact,
    /// Split each part of a precomputed base partition into near-equal
    /// pieces of size at most the cap.
    RefineFrom(Partition),
}

/// Splits `ids` into `pieces` contiguous-by-id chunks whose sizes differ by
/// at most one, larger chunks first.
pub fn split_near_equal(ids: &BTreeSet<JobId>, pieces: usize) -> Vec<BTreeSet<JobId>> {
    assert!(pieces >= 1, "need at least one piece");
    let sorted: Vec<JobId> = ids.iter().copied().collect();
    let s = sorted.len();
    let base = s / pieces;
    let extra = s % pieces;
    let mut out = Vec::with_capacity(pieces);
    let mut at = 0;
    for i in 0..pieces {
        let take = base + usize::from(i < extra);
        out.push(sorted[at..at + take].iter().copied().collect());
        at += take;
    }
    out
}

/// A k-part partition where every part has at most `size_cap` jobs,
/// minimizing max setup cost exactly or by refining a supplied base.
pub fn size_limited_partition(
    jobs: &BTreeSet<JobId>,
    k: usize,
    size_cap: usize,
    model: &SetupModel,
    catalog: &JobCatalog,
    mode: SizeLimitMode,
) -> Result<Partition, Error> {
    if size_cap == 0 && !jobs.is_empty() {
        return Err(Error::InfeasiblePartition("size cap 0 with jobs present".into()));
    }
    if k.saturating_mul(size_cap) < jobs.len() {
        return Err(Error::InfeasiblePartition(format!(
            "{} jobs cannot fit in {k} parts of size at most {size_cap}",
            jobs.len()
        )));
    }
    match mode {
        SizeLimitMode::Exact => exact_size_limited_partition(jobs, k, size_cap, model, catalog),
        SizeLimitMode::RefineFrom(base) => {
            base.validate_covers(jobs)?;
            let mut parts: Vec<BTreeSet<JobId>> = Vec::new();
            for part in &base.parts {
                if part.is_empty() {
                    continue;
                }
                let pieces = part.len().div_ceil(size_cap);
                parts.extend(split_near_equal(part, pieces));
            }
            if parts.len() > k {
                return Err(Error::InfeasiblePartition(format!(
                    "refinement produced {} parts but only {k} were allowed",
                    parts.len()
                )));
            }
            parts.resize(k, BTreeSet::new());
            Ok(Partition::new(parts))
        }
    }
}

/// Splits every nonempty part of an m-part partition into at most q
/// near-equal contiguous pieces (each of size at most `size_cap`), padding
/// the result back to exactly m parts. Requires at most ⌊m/q⌋ nonempty
/// inputs so the pieces fit.
pub fn refine_into_q_subbatches(
    partition: &Partition,
    q: usize,
    size_cap: usize,
) -> Result<Partition, Error> {
    if q == 0 {
        return Err(Error::InfeasiblePartition("q must be positive".into()));
    }
    let m = partition.part_count();
    let nonempty = partition.parts.iter().filter(|p| !p.is_empty()).count();
    if nonempty > m / q {
        return Err(Error::InfeasiblePartition(format!(
            "{nonempty} nonempty parts exceed the budget of {} (= {m}/{q})",
            m / q
        )));
    }
    let mut parts = Vec::new();
    for part in &partition.parts {
        if part.is_empty() {
            continue;
        }
        let pieces = q.min(part.len());
        if part.len().div_ceil(pieces) > size_cap {
            return Err(Error::InfeasiblePartition(format!(
                "part of size {} cannot split into {pieces} pieces within cap {size_cap}",
                part.len()
            )));
        }
        parts.extend(split_near_equal(part, pieces));
    }
    parts.resize(m, BTreeSet::new());
    Ok(Partition::new(parts))
}

/// Fills empty slots by repeatedly splitting the currently largest part
/// (ties to the lowest index) into two contiguous-by-id halves, until
/// `target` parts are nonempty or every part is a singleton. Splitting only
/// shrinks parts, so any size cap the input obeyed is preserved.
pub fn rebalance_parts(mut parts: Vec<BTreeSet<JobId>>, target: usize) -> Vec<BTreeSet<JobId>> {
    if parts.len() < target {
        parts.resize(target, BTreeSet::new());
    }
    loop {
        let nonempty = parts.iter().filter(|p| !p.is_empty()).count();
        if nonempty >= target {
            return parts;
        }
        let mut largest: Option<usize> = None;
        for (i, part) in parts.iter().enumerate() {
            if part.len() >= 2 && largest.is_none_or(|l: usize| part.len() > parts[l].len()) {
                largest = Some(i);
            }
        }
        let (Some(big), Some(slot)) = (largest, parts.iter().position(|p| p.is_empty())) else {
            return parts;
        };
        let halves = split_near_equal(&parts[big], 2);
        parts[big] = halves[0].clone();
        parts[slot] = halves[1].clone();
    }
}
