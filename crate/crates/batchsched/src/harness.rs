//! Experiment harness: declarative configs in, deterministic reports out.
//!
//! A run pits one strategy against one instance source (a file, a seeded
//! generator, or an adaptive construction) and produces a report row with
//! the achieved makespan, the best offline yardstick available, and the
//! verdict on the strategy's guarantee. A sweep repeats that over a seeded
//! corpus for a whole roster of strategies. Reports serialize to JSON
//! lines plus a CSV summary, and identical configs always produce
//! byte-identical reports — sweeps may run on several threads, but rows
//! are assembled in draw order regardless of completion order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{gen_random_instance, run_construction, Construction, SetupFamily};
use crate::engine::{simulate, EngineSettings, SimRun};
use crate::error::Error;
use crate::instance::Instance;
use crate::oracle::{
    lemma_lower_bound, optimal_makespan, optimal_makespan_with_releases, RELEASE_ORACLE_LIMIT,
};
use crate::setup::UNIVERSE_LIMIT;
use crate::strategy::{strategy_by_name, SettingNeeds, Strategy, STRATEGY_NAMES};
use crate::time::TimeValue;

/// Environment variable naming the sweep worker count (the only runtime
/// knob that is not part of the config; it never affects report content).
pub const THREADS_ENV: &str = "BATCHSCHED_THREADS";

/// Engine setting by name, for configs that want to override the setting a
/// strategy would derive from its own needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingName {
    SingleNonpreemptive,
    SinglePreemptive,
    MultiNonpreemptive,
    MultiPreemptive,
}

impl SettingName {
    pub fn to_engine(self) -> EngineSettings {
        match self {
            SettingName::SingleNonpreemptive => EngineSettings::single_machine_nonpreemptive(),
            SettingName::SinglePreemptive => EngineSettings::single_machine_preemptive(),
            SettingName::MultiNonpreemptive => EngineSettings::multi_machine_nonpreemptive(),
            SettingName::MultiPreemptive => EngineSettings::multi_machine_preemptive(),
        }
    }
}

/// The loosest setting a strategy's declared needs call for.
fn derived_settings(needs: SettingNeeds) -> EngineSettings {
    match (needs.multi_machine, needs.preemption) {
        (false, false) => EngineSettings::single_machine_nonpreemptive(),
        (false, true) => EngineSettings::single_machine_preemptive(),
        (true, false) => EngineSettings::multi_machine_nonpreemptive(),
        (true, true) => EngineSettings::multi_machine_preemptive(),
    }
}

/// Where the instance for a run comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSource {
    /// A JSON instance file.
    File { path: PathBuf },
    /// A seeded random instance.
    Generator {
        #[serde(default)]
        seed: u64,
        n: usize,
        m: usize,
        family: SetupFamily,
        p_choices: Vec<TimeValue>,
    },
    /// An adaptive lower-bound construction.
    Adversary { construction: String, m: usize },
}

/// One experiment: a strategy against an instance source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Strategy spec as understood by the strategy registry, e.g.
    /// `list-singletons` or `ignore(single-batch)`.
    pub strategy: String,
    /// Engine setting override; omitted means "whatever the strategy needs".
    #[serde(default)]
    pub setting: Option<SettingName>,
    pub source: InstanceSource,
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("run config: {e}")))
    }
}

/// A seeded corpus sweep: `draws` instances, each run under every strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    #[serde(default)]
    pub seed: u64,
    pub draws: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub machines: Vec<usize>,
    pub families: Vec<SetupFamily>,
    pub p_choices: Vec<TimeValue>,
    /// Strategy specs to run; empty means the full built-in roster.
    #[serde(default)]
    pub strategies: Vec<String>,
}

impl CorpusSpec {
    pub fn from_json_str(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("corpus spec: {e}")))
    }

    fn strategy_list(&self) -> Vec<String> {
        if self.strategies.is_empty() {
            STRATEGY_NAMES.iter().map(|s| s.to_string()).collect()
        } else {
            self.strategies.clone()
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.n_max > UNIVERSE_LIMIT {
            return Err(Error::UniverseTooLarge { size: self.n_max, limit: UNIVERSE_LIMIT });
        }
        if self.n_min > self.n_max {
            return Err(Error::Parse(format!(
                "corpus n_min {} exceeds n_max {}",
                self.n_min, self.n_max
            )));
        }
        if self.machines.is_empty() || self.machines.contains(&0) {
            return Err(Error::Parse("corpus needs a positive machine count list".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Parse("corpus needs at least one setup family".into()));
        }
        if self.draws == 0 {
            return Err(Error::Parse("corpus needs at least one draw".into()));
        }
        Ok(())
    }
}

/// What the denominator of a row's ratio is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Exact offline optimum: a guarantee violation here is a real bug.
    Oracle,
    /// An explicit offline schedule's makespan (an upper bound on the
    /// optimum); ratios are certified lower bounds on the true ratio.
    Witness,
    /// The analytic lower bound (at most the optimum); guarantee checks
    /// against it can fail spuriously and are advisory.
    Lemma,
}

/// One strategy × instance outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub strategy: String,
    pub n: usize,
    pub m: usize,
    pub makespan: TimeValue,
    pub opt_or_bound: TimeValue,
    pub bound_kind: BoundKind,
    pub ratio: TimeValue,
    pub guarantee_multiplier: Option<TimeValue>,
    pub guarantee_satisfied: Option<bool>,
    pub trace_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    /// "run" or "sweep".
    pub kind: String,
    pub seed: u64,
}

/// Header plus rows; serializes to JSON lines (header first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub header: ReportHeader,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn to_jsonl(&self) -> String {
        let mut out =
            serde_json::to_string(&self.header).expect("header serialization") + "\n";
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("row serialization"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(s: &str) -> Result<Self, Error> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty report".into()))
            .and_then(|l| {
                serde_json::from_str(l).map_err(|e| Error::Parse(format!("report header: {e}")))
            })?;
        let rows = lines
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| Error::Parse(format!("report row {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Report { header, rows })
    }

    /// Flat CSV of the rows (exact rationals rendered as text).
    pub fn csv_summary(&self) -> String {
        let mut out = String::from(
            "strategy,n,m,makespan,opt_or_bound,bound_kind,ratio,\
             guarantee_multiplier,guarantee_satisfied,trace_path\n",
        );
        for row in &self.rows {
            let kind = match row.bound_kind {
                BoundKind::Oracle => "oracle",
                BoundKind::Witness => "witness",
                BoundKind::Lemma => "lemma",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                row.strategy,
                row.n,
                row.m,
                row.makespan,
                row.opt_or_bound,
                kind,
                row.ratio,
                row.guarantee_multiplier
                    .as_ref()
                    .map(|g| g.to_string())
                    .unwrap_or_default(),
                row.guarantee_satisfied
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
                row.trace_path.clone().unwrap_or_default(),
            ));
        }
        out
    }

    /// Worst observed ratio per (strategy, machine count).
    pub fn worst_ratios(&self) -> BTreeMap<(String, usize), TimeValue> {
        let mut worst: BTreeMap<(String, usize), TimeValue> = BTreeMap::new();
        for row in &self.rows {
            let key = (row.strategy.clone(), row.m);
            match worst.get(&key) {
                Some(seen) if *seen >= row.ratio => {}
                _ => {
                    worst.insert(key, row.ratio.clone());
                }
            }
        }
        worst
    }

    /// Rows whose exact-optimum-backed guarantee check failed. Any entry
    /// here means a strategy or engine bug; callers exit nonzero on it.
    pub fn oracle_guarantee_failures(&self) -> Vec<&ReportRow> {
        self.rows
            .iter()
            .filter(|r| r.bound_kind == BoundKind::Oracle && r.guarantee_satisfied == Some(false))
            .collect()
    }
}

/// splitmix64; stretches one master seed into per-draw seeds so sweep
/// workers can process draws in any order.
fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one strategy on one concrete instance and builds its report row.
fn evaluate_one(
    instance: &Instance,
    strategy_spec: &str,
    setting: Option<SettingName>,
    trace_file: Option<&Path>,
) -> Result<ReportRow, Error> {
    instance.validate()?;
    let mut strategy = strategy_by_name(strategy_spec)?;
    let settings = match setting {
        Some(name) => name.to_engine(),
        None => derived_settings(strategy.needs()),
    };
    let needs = strategy.needs();
    if needs.preemption && !settings.allow_preemption {
        return Err(Error::SettingsMismatch(format!(
            "strategy `{strategy_spec}` needs preemption, setting forbids it"
        )));
    }
    if needs.multi_machine && !settings.allow_multi_machine {
        return Err(Error::SettingsMismatch(format!(
            "strategy `{strategy_spec}` needs multi-machine batches, setting forbids it"
        )));
    }
    let run = simulate(instance, strategy.as_mut(), &settings)?;
    let row = build_row(instance, strategy_spec, strategy.as_ref(), &run, trace_file)?;
    Ok(row)
}

fn build_row(
    instance: &Instance,
    strategy_spec: &str,
    strategy: &dyn Strategy,
    run: &SimRun,
    trace_file: Option<&Path>,
) -> Result<ReportRow, Error> {
    let n = instance.n();
    let m = instance.m();
    let makespan = run.makespan().clone();
    // Realized execution times are public knowledge after the run; the
    // yardstick is computed on the realized instance.
    let realized = run.realized_instance(instance);
    let (opt_or_bound, bound_kind) = if !realized.has_releases() && n <= UNIVERSE_LIMIT {
        (optimal_makespan(&realized)?.0, BoundKind::Oracle)
    } else if realized.has_releases() && n <= RELEASE_ORACLE_LIMIT {
        (optimal_makespan_with_releases(&realized)?, BoundKind::Oracle)
    } else {
        (lemma_lower_bound(&realized)?.value, BoundKind::Lemma)
    };
    let ratio = ratio_convention(&makespan, &opt_or_bound)?;
    // A strategy's multiplier is proven for simultaneous release only; the
    // release-time wrapper is the one spec that claims a release bound.
    let claims = !realized.has_releases() || strategy_spec.trim().starts_with("ignore(");
    let guarantee_multiplier = if claims { strategy.guarantee(n, m) } else { None };
    let guarantee_satisfied = guarantee_multiplier
        .as_ref()
        .map(|g| makespan <= g * &opt_or_bound);
    let trace_path = match trace_file {
        Some(path) => {
            std::fs::write(path, run.trace.to_jsonl())?;
            Some(path.display().to_string())
        }
        None => None,
    };
    Ok(ReportRow {
        strategy: strategy_spec.to_string(),
        n,
        m,
        makespan,
        opt_or_bound,
        bound_kind,
        ratio,
        guarantee_multiplier,
        guarantee_satisfied,
        trace_path,
    })
}

/// Ratio of makespan to yardstick; an empty schedule over an empty optimum
/// counts as 1 by convention. A positive makespan over a zero yardstick is
/// impossible under a monotone subadditive model, so it is reported as an
/// error rather than silently encoded.
fn ratio_convention(makespan: &TimeValue, bound: &TimeValue) -> Result<TimeValue, Error> {
    match makespan.checked_div(bound) {
        Some(r) => Ok(r),
        None if makespan.is_zero() => Ok(TimeValue::one()),
        None => Err(Error::InvalidInstance(
            "positive makespan against a zero offline bound".into(),
        )),
    }
}

/// Runs one configured experiment. `trace_dir`, when given, receives the
/// schedule trace (and the witness trace for adversary runs).
pub fn run_experiment(config: &RunConfig, trace_dir: Option<&Path>) -> Result<Report, Error> {
    let mut seed = 0;
    let row = match &config.source {
        InstanceSource::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let instance = Instance::from_json_str(&text)?;
            let trace_file = trace_dir.map(|d| d.join(trace_name(&config.strategy, "run")));
            evaluate_one(&instance, &config.strategy, config.setting, trace_file.as_deref())?
        }
        InstanceSource::Generator { seed: gen_seed, n, m, family, p_choices } => {
            seed = *gen_seed;
            let instance = gen_random_instance(*gen_seed, *n, *m, family, p_choices);
            let trace_file = trace_dir.map(|d| d.join(trace_name(&config.strategy, "run")));
            evaluate_one(&instance, &config.strategy, config.setting, trace_file.as_deref())?
        }
        InstanceSource::Adversary { construction, m } => {
            let construction = Construction::by_name(construction)?;
            if config.setting.is_some() {
                return Err(Error::SettingsMismatch(
                    "adversary constructions fix their own engine setting".into(),
                ));
            }
            let mut strategy = strategy_by_name(&config.strategy)?;
            let outcome = run_construction(construction, *m, strategy.as_mut())?;
            let trace_path = match trace_dir {
                Some(dir) => {
                    let run_path = dir.join(trace_name(&config.strategy, construction.name()));
                    std::fs::write(&run_path, outcome.run.trace.to_jsonl())?;
                    let witness_path = dir.join(format!(
                        "{}.witness.jsonl",
                        trace_stem(&config.strategy, construction.name())
                    ));
                    std::fs::write(&witness_path, outcome.witness.trace.to_jsonl())?;
                    // The realized instance, so the trace and witness can be
                    // fed straight back into `validate`.
                    let instance_path = dir.join(format!(
                        "{}.instance.json",
                        trace_stem(&config.strategy, construction.name())
                    ));
                    std::fs::write(&instance_path, outcome.realized.to_json_pretty())?;
                    Some(run_path.display().to_string())
                }
                None => None,
            };
            let makespan = outcome.run.makespan().clone();
            let opt_or_bound = outcome.witness.makespan().clone();
            let ratio = ratio_convention(&makespan, &opt_or_bound)?;
            let n = outcome.realized.n();
            let guarantee_multiplier = strategy.guarantee(n, *m);
            let guarantee_satisfied = guarantee_multiplier
                .as_ref()
                .map(|g| makespan <= g * &opt_or_bound);
            ReportRow {
                strategy: config.strategy.clone(),
                n,
                m: *m,
                makespan,
                opt_or_bound,
                bound_kind: BoundKind::Witness,
                ratio,
                guarantee_multiplier,
                guarantee_satisfied,
                trace_path,
            }
        }
    };
    Ok(Report { header: ReportHeader { kind: "run".into(), seed }, rows: vec![row] })
}

fn trace_stem(strategy: &str, tag: &str) -> String {
    let safe: String = strategy
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("{tag}-{safe}")
}

fn trace_name(strategy: &str, tag: &str) -> String {
    format!("{}.trace.jsonl", trace_stem(strategy, tag))
}

fn thread_count() -> usize {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        if let Ok(k) = text.trim().parse::<usize>() {
            return k.max(1);
        }
    }
    std::thread::available_parallelism().map(|k| k.get()).unwrap_or(1).min(8)
}

/// One sweep draw: every listed strategy against one generated instance.
fn sweep_draw(
    spec: &CorpusSpec,
    strategies: &[String],
    index: usize,
    trace_dir: Option<&Path>,
) -> Result<Vec<ReportRow>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, index as u64));
    let n = spec.n_min + (rng.next_u64() as usize) % (spec.n_max - spec.n_min + 1);
    let m = spec.machines[(rng.next_u64() as usize) % spec.machines.len()];
    let family = &spec.families[(rng.next_u64() as usize) % spec.families.len()];
    let instance = gen_random_instance(rng.next_u64(), n, m, family, &spec.p_choices);
    let mut rows = Vec::with_capacity(strategies.len());
    for strategy in strategies {
        let trace_file =
            trace_dir.map(|d| d.join(trace_name(strategy, &format!("draw{index:05}"))));
        rows.push(evaluate_one(&instance, strategy, None, trace_file.as_deref())?);
    }
    Ok(rows)
}

/// Sweeps a seeded corpus: `draws` generated instances, each evaluated
/// under every strategy the corpus names. Rows appear draw-major in
/// draw order, strategies in roster order.
pub fn sweep_corpus(spec: &CorpusSpec, trace_dir: Option<&Path>) -> Result<Report, Error> {
    spec.validate()?;
    let strategies = spec.strategy_list();
    let workers = thread_count().min(spec.draws);
    let mut slots: Vec<Option<Result<Vec<ReportRow>, Error>>> = Vec::new();
    slots.resize_with(spec.draws, || None);
    if workers <= 1 {
        for (index, slot) in slots.iter_mut().enumerate() {
            *slot = Some(sweep_draw(spec, &strategies, index, trace_dir));
        }
    } else {
        // Strided sharding; each slot is owned by exactly one worker.
        let slot_refs: Vec<_> = slots.iter_mut().enumerate().collect();
        std::thread::scope(|scope| {
            let mut shards: Vec<Vec<_>> = Vec::new();
            shards.resize_with(workers, Vec::new);
            for (i, pair) in slot_refs.into_iter().enumerate() {
                shards[i % workers].push(pair);
            }
            for shard in shards {
                let strategies = &strategies;
                scope.spawn(move || {
                    for (index, slot) in shard {
                        *slot = Some(sweep_draw(spec, strategies, index, trace_dir));
                    }
                });
            }
        });
    }
    let mut rows = Vec::with_capacity(spec.draws * strategies.len());
    for slot in slots {
        rows.extend(slot.expect("every draw computed")?);
    }
    Ok(Report { header: ReportHeader { kind: "sweep".into(), seed: spec.seed }, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(n: u64) -> TimeValue {
        TimeValue::from_integer(n)
    }

    fn small_corpus(draws: usize) -> CorpusSpec {
        CorpusSpec {
            seed: 11,
            draws,
            n_min: 1,
            n_max: 6,
            machines: vec![2, 3],
            families: vec![SetupFamily::Constant, SetupFamily::TypeSpecific { types: 3 }],
            p_choices: vec![tv(0), tv(1), tv(2)],
            strategies: Vec::new(),
        }
    }

    #[test]
    fn generator_run_produces_an_oracle_row() {
        let config = RunConfig {
            strategy: "list-singletons".into(),
            setting: None,
            source: InstanceSource::Generator {
                seed: 3,
                n: 5,
                m: 2,
                family: SetupFamily::Constant,
                p_choices: vec![tv(0), tv(1), tv(2)],
            },
        };
        let report = run_experiment(&config, None).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.bound_kind, BoundKind::Oracle);
        assert!(row.ratio >= TimeValue::one());
        assert_eq!(row.guarantee_satisfied, Some(true));
        assert!(row.trace_path.is_none());
    }

    #[test]
    fn empty_generator_run_has_ratio_one() {
        let config = RunConfig {
            strategy: "single-batch".into(),
            setting: None,
            source: InstanceSource::Generator {
                seed: 0,
                n: 0,
                m: 2,
                family: SetupFamily::Constant,
                p_choices: vec![tv(1)],
            },
        };
        let report = run_experiment(&config, None).unwrap();
        let row = &report.rows[0];
        assert!(row.makespan.is_zero());
        assert!(row.opt_or_bound.is_zero());
        assert_eq!(row.ratio, TimeValue::one());
    }

    #[test]
    fn adversary_run_reports_a_witness_ratio() {
        let config = RunConfig {
            strategy: "single-batch".into(),
            setting: None,
            source: InstanceSource::Adversary { construction: "np-single".into(), m: 3 },
        };
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&config, Some(dir.path())).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.bound_kind, BoundKind::Witness);
        // Forced makespan 4 against a witness of 2.
        assert_eq!(row.ratio, tv(2));
        let trace_path = row.trace_path.as_ref().unwrap();
        assert!(std::path::Path::new(trace_path).exists());
        assert!(dir.path().join("np-single-single-batch.witness.jsonl").exists());
    }

    #[test]
    fn setting_override_conflicts_are_rejected() {
        let config = RunConfig {
            strategy: "phased-widening".into(),
            setting: Some(SettingName::SingleNonpreemptive),
            source: InstanceSource::Generator {
                seed: 0,
                n: 3,
                m: 4,
                family: SetupFamily::Constant,
                p_choices: vec![tv(1)],
            },
        };
        assert!(matches!(
            run_experiment(&config, None),
            Err(Error::SettingsMismatch(_))
        ));
    }

    #[test]
    fn sweep_is_deterministic_and_oracle_ratios_hold() {
        let spec = small_corpus(12);
        let a = sweep_corpus(&spec, None).unwrap();
        let b = sweep_corpus(&spec, None).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(a.rows.len(), 12 * STRATEGY_NAMES.len());
        for row in &a.rows {
            assert_eq!(row.bound_kind, BoundKind::Oracle);
            assert!(row.ratio >= TimeValue::one(), "ratio below 1: {row:?}");
            assert_eq!(row.guarantee_satisfied, Some(true), "violated: {row:?}");
        }
        assert!(a.oracle_guarantee_failures().is_empty());
    }

    #[test]
    fn reports_round_trip_through_jsonl() {
        let spec = small_corpus(3);
        let report = sweep_corpus(&spec, None).unwrap();
        let parsed = Report::from_jsonl(&report.to_jsonl()).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn csv_summary_lists_every_row() {
        let spec = small_corpus(2);
        let report = sweep_corpus(&spec, None).unwrap();
        let csv = report.csv_summary();
        assert_eq!(csv.lines().count(), report.rows.len() + 1);
        assert!(csv.starts_with("strategy,n,m,"));
    }

    #[test]
    fn worst_ratio_aggregation_covers_every_strategy_machine_pair() {
        let spec = small_corpus(10);
        let report = sweep_corpus(&spec, None).unwrap();
        let worst = report.worst_ratios();
        for ((strategy, m), ratio) in &worst {
            assert!(STRATEGY_NAMES.contains(&strategy.as_str()));
            assert!(spec.machines.contains(m));
            assert!(*ratio >= TimeValue::one());
        }
        let max_in_rows = report
            .rows
            .iter()
            .map(|r| r.ratio.clone())
            .max()
            .unwrap();
        assert!(worst.values().any(|v| *v == max_in_rows));
    }

    #[test]
    fn invalid_corpus_specs_are_rejected() {
        let mut spec = small_corpus(1);
        spec.n_max = 13;
        assert!(sweep_corpus(&spec, None).is_err());
        let mut spec = small_corpus(1);
        spec.machines.clear();
        assert!(sweep_corpus(&spec, None).is_err());
        let mut spec = small_corpus(1);
        spec.draws = 0;
        assert!(sweep_corpus(&spec, None).is_err());
    }

    #[test]
    fn file_source_round_trips_an_instance() {
        let instance = gen_random_instance(
            5,
            4,
            2,
            &SetupFamily::TypeSpecific { types: 2 },
            &[tv(0), tv(1)],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        std::fs::write(&path, instance.to_json_pretty()).unwrap();
        let config = RunConfig {
            strategy: "capped-batches".into(),
            setting: None,
            source: InstanceSource::File { path },
        };
        let report = run_experiment(&config, None).unwrap();
        assert_eq!(report.rows[0].n, 4);
        assert_eq!(report.rows[0].bound_kind, BoundKind::Oracle);
    }

    #[test]
    fn release_instances_use_the_release_oracle() {
        // Two waves; the wrapper holds late jobs for its next round.
        let mut instance = gen_random_instance(2, 4, 2, &SetupFamily::Constant, &[tv(1)]);
        instance.jobs[2].release = tv(2);
        instance.jobs[3].release = tv(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("release.json");
        std::fs::write(&path, instance.to_json_pretty()).unwrap();
        let config = RunConfig {
            strategy: "ignore(list-singletons)".into(),
            setting: None,
            source: InstanceSource::File { path },
        };
        let report = run_experiment(&config, None).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.bound_kind, BoundKind::Oracle);
        assert!(row.guarantee_multiplier.is_some());
        assert_eq!(row.guarantee_satisfied, Some(true), "row: {row:?}");
    }

    #[test]
    fn bare_strategies_claim_no_release_guarantee() {
        let mut instance = gen_random_instance(2, 4, 2, &SetupFamily::Constant, &[tv(1)]);
        instance.jobs[3].release = tv(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("release.json");
        std::fs::write(&path, instance.to_json_pretty()).unwrap();
        let config = RunConfig {
            strategy: "list-singletons".into(),
            setting: None,
            source: InstanceSource::File { path },
        };
        let report = run_experiment(&config, None).unwrap();
        assert_eq!(report.rows[0].guarantee_multiplier, None);
        assert_eq!(report.rows[0].guarantee_satisfied, None);
    }
}
