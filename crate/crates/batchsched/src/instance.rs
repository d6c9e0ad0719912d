//! Jobs, instances, batches, and the public job catalog.
//!
//! An [`Instance`] is the full problem description including the hidden
//! execution times. The [`JobCatalog`] is the algorithm-visible projection:
//! everything about the jobs *except* their execution times. Strategies and
//! adversary bookkeeping only ever see the catalog; the engine keeps the
//! instance private.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::setup::SetupModel;
use crate::time::TimeValue;

pub type JobId = usize;
pub type MachineId = usize;

/// A job: dense id, optional release time, hidden execution time, and the
/// tags the various setup families read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    #[serde(default = "TimeValue::zero", skip_serializing_if = "TimeValue::is_zero")]
    pub release: TimeValue,
    #[serde(rename = "exec")]
    pub execution: TimeValue,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub type_tag: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub libraries: Option<BTreeSet<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<usize>,
}

impl Job {
    /// A released-at-zero job with no tags.
    pub fn plain(id: JobId, execution: TimeValue) -> Self {
        Job {
            id,
            release: TimeValue::zero(),
            execution,
            type_tag: None,
            libraries: None,
            point: None,
        }
    }

    /// A released-at-zero job carrying a type tag.
    pub fn typed(id: JobId, execution: TimeValue, type_tag: u32) -> Self {
        Job {
            type_tag: Some(type_tag),
            ..Job::plain(id, execution)
        }
    }
}

/// What the online side is allowed to know about one job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobMeta {
    pub id: JobId,
    pub release: TimeValue,
    pub type_tag: Option<u32>,
    pub libraries: Option<BTreeSet<u32>>,
    pub point: Option<usize>,
}

/// The algorithm-visible projection of an instance's job list: ids, release
/// times, and setup-relevant tags, but never execution times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobCatalog {
    metas: Vec<JobMeta>,
}

impl JobCatalog {
    pub fn new(metas: Vec<JobMeta>) -> Self {
        JobCatalog { metas }
    }

    pub fn len(&self) -> usize {
        self.metas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metas.is_empty()
    }

    pub fn get(&self, id: JobId) -> Result<&JobMeta, Error> {
        self.metas
            .get(id)
            .ok_or_else(|| Error::InvalidBatch(format!("job {id} not in instance")))
    }

    pub fn ids(&self) -> impl Iterator<Item = JobId> + '_ {
        0..self.metas.len()
    }

    pub fn metas(&self) -> &[JobMeta] {
        &self.metas
    }

    /// All distinct type tags present, sorted.
    pub fn types_present(&self) -> BTreeSet<u32> {
        self.metas.iter().filter_map(|m| m.type_tag).collect()
    }

    /// Ids of the jobs carrying the given type tag, ascending.
    pub fn jobs_of_type(&self, tag: u32) -> Vec<JobId> {
        self.metas
            .iter()
            .filter(|m| m.type_tag == Some(tag))
            .map(|m| m.id)
            .collect()
    }
}

/// The complete problem: machine count, setup model, and the job list with
/// hidden execution times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub machines: usize,
    pub setup_model: SetupModel,
    pub jobs: Vec<Job>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn m(&self) -> usize {
        self.machines
    }

    pub fn execution_of(&self, id: JobId) -> Result<&TimeValue, Error> {
        self.jobs
            .get(id)
            .map(|j| &j.execution)
            .ok_or_else(|| Error::InvalidBatch(format!("job {id} not in instance")))
    }

    /// Total execution time over a set of job ids.
    pub fn total_execution<'a>(
        &self,
        ids: impl IntoIterator<Item = &'a JobId>,
    ) -> Result<TimeValue, Error> {
        let mut acc = TimeValue::zero();
        for &id in ids {
            acc += self.execution_of(id)?;
        }
        Ok(acc)
    }

    /// The algorithm-visible projection (no execution times).
    pub fn catalog(&self) -> JobCatalog {
        JobCatalog::new(
            self.jobs
                .iter()
                .map(|j| JobMeta {
                    id: j.id,
                    release: j.release.clone(),
                    type_tag: j.type_tag,
                    libraries: j.libraries.clone(),
                    point: j.point,
                })
                .collect(),
        )
    }

    pub fn all_jobs(&self) -> BTreeSet<JobId> {
        (0..self.jobs.len()).collect()
    }

    pub fn has_releases(&self) -> bool {
        self.jobs.iter().any(|j| !j.release.is_zero())
    }

    /// Checks structural invariants. Hard violations (non-dense ids, zero
    /// machines, jobs missing the tag their setup model reads, ill-formed
    /// model parameters) are errors; conditions the theory assumes away but
    /// the tooling tolerates (m = 1, n = 0, n < m) come back as warnings.
    pub fn validate(&self) -> Result<Vec<String>, Error> {
        if self.machines == 0 {
            return Err(Error::InvalidInstance("machine count must be positive".into()));
        }
        for (pos, job) in self.jobs.iter().enumerate() {
            if job.id != pos {
                return Err(Error::InvalidInstance(format!(
                    "job ids must be dense and ordered: position {pos} holds id {}",
                    job.id
                )));
            }
        }
        let catalog = self.catalog();
        self.setup_model.validate(&catalog)?;
        for job in &self.jobs {
            match &self.setup_model {
                SetupModel::TypeSpecific { .. } if job.type_tag.is_none() => {
                    return Err(Error::MissingTag { job: job.id, what: "type" });
                }
                SetupModel::LibraryBased { .. } if job.libraries.is_none() => {
                    return Err(Error::MissingTag { job: job.id, what: "libraries" });
                }
                SetupModel::TspBased { .. } if job.point.is_none() => {
                    return Err(Error::MissingTag { job: job.id, what: "point" });
                }
                _ => {}
            }
        }
        let mut warnings = Vec::new();
        if self.machines == 1 {
            warnings.push("m = 1 is degenerate: the guarantees assume m >= 2".to_string());
        }
        if self.jobs.is_empty() {
            warnings.push("instance has no jobs".to_string());
        } else if self.jobs.len() < self.machines {
            warnings.push(format!(
                "n = {} < m = {}: fewer jobs than machines",
                self.jobs.len(),
                self.machines
            ));
        }
        Ok(warnings)
    }

    pub fn from_json_str(s: &str) -> Result<Self, Error> {
        let inst: Instance =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("instance: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

/// A nonempty set of job ids. The engine guarantees a job id sits in at most
/// one live batch at any simulated instant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Batch(BTreeSet<JobId>);

impl Batch {
    pub fn new(ids: BTreeSet<JobId>) -> Result<Self, Error> {
        if ids.is_empty() {
            return Err(Error::InvalidBatch("a batch must contain at least one job".into()));
        }
        Ok(Batch(ids))
    }

    /// Convenience constructor for invariant-guaranteed call sites; panics
    /// on an empty iterator.
    pub fn of(ids: impl IntoIterator<Item = JobId>) -> Self {
        let set: BTreeSet<JobId> = ids.into_iter().collect();
        Batch::new(set).expect("Batch::of requires a nonempty id set")
    }

    pub fn ids(&self) -> &BTreeSet<JobId> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, id: JobId) -> bool {
        self.0.contains(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = JobId> + '_ {
        self.0.iter().copied()
    }

    pub fn min_id(&self) -> JobId {
        *self.0.iter().next().expect("batch is nonempty")
    }

    pub fn to_vec(&self) -> Vec<JobId> {
        self.0.iter().copied().collect()
    }
}

impl Serialize for Batch {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Batch {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ids: Vec<JobId> = Vec::deserialize(deserializer)?;
        Batch::new(ids.into_iter().collect()).map_err(serde::de::Error::custom)
    }
}
