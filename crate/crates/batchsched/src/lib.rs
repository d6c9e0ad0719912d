//! Simulation and analysis toolkit for online batch scheduling under
//! uncertainty.
//!
//! Jobs arrive with known batch setup costs (a monotone subadditive set
//! function) but execution times that are revealed only when a job
//! completes. The crate provides:
//!
//! - exact rational time arithmetic ([`TimeValue`]),
//! - instance and setup-cost models ([`instance`], [`setup`]),
//! - min-max partition solvers ([`partition`]),
//! - a deterministic discrete-event engine with optional multi-machine
//!   batches and preemption ([`engine`]),
//! - online strategies with worst-case guarantee multipliers
//!   ([`strategy`]),
//! - adaptive adversaries that realize known lower bounds ([`adversary`]),
//! - offline optimum and lower-bound oracles ([`oracle`]),
//! - an experiment harness with reproducible reports ([`harness`]).
//!
//! All comparisons are exact; no floating-point tolerances exist anywhere
//! in the crate.

pub mod adversary;
pub mod engine;
pub mod error;
pub mod harness;
pub mod instance;
pub mod oracle;
pub mod partition;
pub mod setup;
pub mod strategy;
pub mod time;
pub mod trace;

pub use adversary::{run_construction, AdversaryRun, Construction};
pub use error::Error;
pub use instance::{Batch, Instance, Job, JobCatalog, JobId};
pub use setup::SetupModel;
pub use time::TimeValue;
pub use trace::{ScheduleTrace, TraceEvent};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
