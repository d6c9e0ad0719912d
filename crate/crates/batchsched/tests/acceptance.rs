//! The acceptance gate for the whole crate: exact guarantee multipliers on
//! a seeded corpus, the four adaptive lower-bound constructions, the
//! release-time wrapper, engine trace semantics, and the set-function and
//! partition oracles.
//!
//! Every comparison here is an exact rational check — no tolerances — and
//! every multiplier is recomputed from scratch in this file so the
//! library's own `guarantee` implementations cannot drift unnoticed. Each
//! criterion prints one summary line once it holds.

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use batchsched::adversary::{gen_random_instance, AdversaryRun, SetupFamily};
use batchsched::engine::{simulate, EngineSettings};
use batchsched::instance::{Instance, Job, JobId};
use batchsched::oracle::{lemma_lower_bound, optimal_makespan, optimal_makespan_with_releases};
use batchsched::partition::{
    balanced_type_partition, exact_min_max_partition, size_limited_partition, SizeLimitMode,
};
use batchsched::setup::{is_monotone, is_subadditive, subadditive_closure, SetupModel};
use batchsched::strategy::{strategy_by_name, Strategy};
use batchsched::time::TimeValue;
use batchsched::trace::{check_batch_completion_bounds, validate_trace, TraceEvent};
use batchsched::{run_construction, Construction};

fn tv(x: u64) -> TimeValue {
    TimeValue::from_integer(x)
}

fn ratio(num: u64, den: u64) -> TimeValue {
    TimeValue::new(num, den).unwrap()
}

/// The engine permissions a strategy asks for, as concrete settings.
fn settings_for(strategy: &dyn Strategy) -> EngineSettings {
    let needs = strategy.needs();
    match (needs.multi_machine, needs.preemption) {
        (false, false) => EngineSettings::single_machine_nonpreemptive(),
        (false, true) => EngineSettings::single_machine_preemptive(),
        (true, false) => EngineSettings::multi_machine_nonpreemptive(),
        (true, true) => EngineSettings::multi_machine_preemptive(),
    }
}

/// Smallest integer s with s²·den ≥ num, i.e. ⌈√(num/den)⌉ for den > 0.
fn ceil_sqrt_ratio(num: u64, den: u64) -> u64 {
    let mut s = 0;
    while s * s * den < num {
        s += 1;
    }
    s
}

/// Largest integer s with s² ≤ x.
fn floor_sqrt(x: u64) -> u64 {
    let mut s = 0;
    while (s + 1) * (s + 1) <= x {
        s += 1;
    }
    s
}

/// Smallest q ≥ 1 with q^q ≥ x.
fn min_self_power(x: u64) -> u64 {
    let mut q: u64 = 1;
    while (q as u128).pow(q as u32) < u128::from(x) {
        q += 1;
    }
    q
}

const NAMED_STRATEGIES: &[&str] = &[
    "single-batch",
    "list-singletons",
    "capped-batches",
    "phased-refinement",
    "group-spread",
    "phased-widening",
    "auto-np-single",
    "auto-np-multi",
];

/// The published worst-case multiplier of each strategy, restated here
/// independently of the implementations in the library.
fn expected_multiplier(name: &str, n: usize, m: usize) -> TimeValue {
    let (nn, mm) = (n as u64, m as u64);
    match name {
        "single-batch" => tv(mm),
        "list-singletons" => ratio(nn, mm) + TimeValue::one(),
        "capped-batches" => {
            let k = mm + ceil_sqrt_ratio(mm * nn, 1);
            let cap = ceil_sqrt_ratio(nn, mm);
            ratio(k, mm) + tv(1 + cap)
        }
        "phased-refinement" => tv(6 * min_self_power(nn.max(1)) + 1),
        "group-spread" => {
            let k = floor_sqrt(mm).max(1);
            tv(mm.div_ceil(k)) + ratio(mm, mm / k) + TimeValue::one()
        }
        "phased-widening" => tv(9 * min_self_power(mm.max(1)) - 2),
        "auto-np-single" => {
            if mm * mm * mm <= nn {
                expected_multiplier("single-batch", n, m)
            } else {
                expected_multiplier("capped-batches", n, m)
            }
        }
        "auto-np-multi" => {
            if mm * mm <= nn {
                expected_multiplier("group-spread", n, m)
            } else {
                expected_multiplier("list-singletons", n, m)
            }
        }
        other => panic!("no multiplier table entry for {other}"),
    }
}

/// The seeded guarantee corpus: 512 draws cycling through every
/// combination of n ∈ 1..=8, m ∈ {2, 3}, and the constant or unweighted
/// type-specific setup families with 1–4 types, with p_j ∈ {0, 1, 2}.
fn corpus() -> Vec<Instance> {
    let p_choices = [tv(0), tv(1), tv(2)];
    (0..512u64)
        .map(|idx| {
            let n = 1 + (idx % 8) as usize;
            let m = 2 + ((idx / 8) % 2) as usize;
            let family = if (idx / 16) % 2 == 0 {
                SetupFamily::Constant
            } else {
                SetupFamily::TypeSpecific { types: 1 + ((idx / 32) % 4) as u32 }
            };
            gen_random_instance(0xC0_5000 + idx, n, m, &family, &p_choices)
        })
        .collect()
}

#[test]
fn criterion_1_every_strategy_meets_its_multiplier_on_the_corpus() {
    for instance in corpus() {
        let (opt, _) = optimal_makespan(&instance).unwrap();
        let (n, m) = (instance.n(), instance.m());
        for name in NAMED_STRATEGIES {
            let multiplier = expected_multiplier(name, n, m);
            let mut strategy = strategy_by_name(name).unwrap();
            assert_eq!(
                strategy.guarantee(n, m).as_ref(),
                Some(&multiplier),
                "{name} claims a different multiplier at n={n}, m={m}"
            );
            let settings = settings_for(strategy.as_ref());
            let run = simulate(&instance, strategy.as_mut(), &settings).unwrap();
            let bound = &multiplier * &opt;
            assert!(
                run.makespan() <= &bound,
                "{name} exceeded {multiplier} x OPT at n={n}, m={m}: makespan {} vs OPT {opt}",
                run.makespan(),
            );
        }
    }
    println!("criterion 1 (guarantee suite: 512 corpus draws x 8 strategies, exact): PASS");
}

#[test]
fn criterion_2_lemma_bound_never_exceeds_the_optimum() {
    for instance in corpus() {
        let (opt, _) = optimal_makespan(&instance).unwrap();
        let bound = lemma_lower_bound(&instance).unwrap();
        assert!(!bound.partial, "corpus instances are small enough for the exact bound");
        assert!(
            bound.value <= opt,
            "lemma bound {} exceeds OPT {opt} at n={}, m={}",
            bound.value,
            instance.n(),
            instance.m(),
        );
    }
    println!("criterion 2 (lower-bound lemma <= OPT on the whole corpus, exact): PASS");
}

/// Runs one construction against one strategy and insists the witness is a
/// legal, fully completing schedule of the realized instance.
fn forced_outcome(construction: Construction, m: usize, name: &str) -> AdversaryRun {
    let mut strategy = strategy_by_name(name).unwrap();
    let outcome = run_construction(construction, m, strategy.as_mut()).unwrap();
    let report = validate_trace(
        &outcome.realized,
        &outcome.witness.trace,
        &outcome.construction.settings(),
    );
    assert!(report.is_valid(), "witness violations for {name}: {:?}", report.violations);
    outcome.witness.trace.completed_makespan(&outcome.realized).unwrap();
    outcome
}

#[test]
fn criterion_3_constructions_force_the_published_gaps() {
    // (a) Single-machine batches, no preemption, m = 3: every applicable
    // strategy is forced to makespan ≥ 3 while a witness finishes by 2.
    for name in ["single-batch", "list-singletons", "capped-batches", "auto-np-single"] {
        let outcome = forced_outcome(Construction::NpSingle, 3, name);
        assert!(
            outcome.run.makespan() >= &tv(3),
            "{name} escaped the non-preemptive trap with makespan {}",
            outcome.run.makespan(),
        );
        assert!(
            outcome.witness.makespan() <= &tv(2),
            "witness too slow against {name}: {}",
            outcome.witness.makespan(),
        );
    }
    // (b) Same machines with preemption allowed, m = 3: still forced to 3
    // against a witness of exactly 2.
    for name in
        ["single-batch", "list-singletons", "capped-batches", "phased-refinement", "auto-np-single"]
    {
        let outcome = forced_outcome(Construction::PSingle, 3, name);
        assert!(
            outcome.run.makespan() >= &tv(3),
            "{name} escaped the sampling trap with makespan {}",
            outcome.run.makespan(),
        );
        assert_eq!(
            outcome.witness.makespan(),
            &tv(2),
            "witness against {name} should finish at exactly 2",
        );
    }
    // (c) Multi-machine batches, m = 4, against the one-shot spread:
    // forced to ≥ √m = 2 with a witness no later than 3.
    let outcome = forced_outcome(Construction::NpMulti, 4, "group-spread");
    assert!(
        outcome.run.makespan() >= &tv(2),
        "group-spread escaped the type trap with makespan {}",
        outcome.run.makespan(),
    );
    assert!(outcome.witness.makespan() <= &tv(3));
    // (d) Preemptive multi-machine batches, m = 4, against phased
    // widening: forced to ≥ q + 1 = 3 with a witness no later than 3.
    let outcome = forced_outcome(Construction::PMulti, 4, "phased-widening");
    assert!(
        outcome.run.makespan() >= &tv(3),
        "phased-widening escaped the group trap with makespan {}",
        outcome.run.makespan(),
    );
    assert!(outcome.witness.makespan() <= &tv(3));
    println!("criterion 3 (adaptive lower-bound constructions in all four settings): PASS");
}

#[test]
fn criterion_4_release_wrapper_stays_within_twice_plus_one() {
    let m = 2;
    for seed in 0..100u64 {
        let wave1 = 1 + (seed % 3) as usize;
        let wave2 = 1 + ((seed / 3) % 3) as usize;
        let gap = tv(1 + (seed / 9) % 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0x16_0000 + seed);
        let mut jobs = Vec::new();
        for id in 0..wave1 + wave2 {
            let p = tv(rng.next_u64() % 3);
            let release = if id < wave1 { TimeValue::zero() } else { gap.clone() };
            jobs.push(Job { release, ..Job::plain(id, p) });
        }
        let n = jobs.len();
        let instance = Instance { machines: m, setup_model: SetupModel::constant(), jobs };
        let opt = optimal_makespan_with_releases(&instance).unwrap();
        for inner in ["single-batch", "list-singletons"] {
            let rho = expected_multiplier(inner, n, m);
            let wrapped = &rho * &tv(2) + TimeValue::one();
            let mut strategy = strategy_by_name(&format!("ignore({inner})")).unwrap();
            assert_eq!(
                strategy.guarantee(n, m).as_ref(),
                Some(&wrapped),
                "ignore({inner}) claims a different multiplier at n={n}",
            );
            let settings = settings_for(strategy.as_ref());
            let run = simulate(&instance, strategy.as_mut(), &settings).unwrap();
            let bound = &wrapped * &opt;
            assert!(
                run.makespan() <= &bound,
                "ignore({inner}) exceeded (2p+1) x OPT on seed {seed}: makespan {} vs OPT {opt}",
                run.makespan(),
            );
        }
    }
    println!("criterion 4 (ignore wrapper <= (2p+1) x release-aware OPT, 100 two-wave draws): PASS");
}

#[test]
fn criterion_5_engine_traces_validate_and_replay_identically() {
    let machine_counts = [2usize, 3, 4, 6, 9];
    let p_choices = [tv(0), tv(1), tv(2), tv(3)];
    let mut preemptions = 0usize;
    for seed in 0..100u64 {
        let n = 1 + (seed % 10) as usize;
        let m = machine_counts[((seed / 10) as usize) % machine_counts.len()];
        let family = if seed % 2 == 0 {
            SetupFamily::Constant
        } else {
            SetupFamily::TypeSpecific { types: 1 + ((seed / 4) % 3) as u32 }
        };
        let instance = gen_random_instance(0x5EED_0000 + seed, n, m, &family, &p_choices);
        let name = NAMED_STRATEGIES[(seed as usize) % NAMED_STRATEGIES.len()];

        let mut first = strategy_by_name(name).unwrap();
        let settings = settings_for(first.as_ref());
        let run = simulate(&instance, first.as_mut(), &settings).unwrap();
        let report = validate_trace(&instance, &run.trace, &settings);
        assert!(report.is_valid(), "{name} on seed {seed}: {:?}", report.violations);
        let bounds = check_batch_completion_bounds(&instance, &run.trace, &settings);
        assert!(bounds.is_empty(), "{name} on seed {seed}: {bounds:?}");
        preemptions += run
            .trace
            .events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Preempt { .. }))
            .count();

        let mut second = strategy_by_name(name).unwrap();
        let rerun = simulate(&instance, second.as_mut(), &settings).unwrap();
        assert_eq!(
            run.trace.to_jsonl(),
            rerun.trace.to_jsonl(),
            "{name} on seed {seed} did not replay byte-identically",
        );
    }
    assert!(preemptions > 0, "the 100 configurations never exercised preemption");
    println!(
        "criterion 5 (trace validation, batch completion bounds, byte determinism; \
         {preemptions} preemptions exercised): PASS"
    );
}

/// Minimum total cost over every way to split `ids` into disjoint pieces,
/// found by explicit set-partition enumeration against a raw table.
fn brute_force_closure(
    table: &BTreeMap<BTreeSet<JobId>, TimeValue>,
    ids: &BTreeSet<JobId>,
) -> TimeValue {
    let Some(first) = ids.iter().next().copied() else {
        return TimeValue::zero();
    };
    let rest: Vec<JobId> = ids.iter().copied().skip(1).collect();
    let mut best: Option<TimeValue> = None;
    for mask in 0..(1u32 << rest.len()) {
        let mut part = BTreeSet::from([first]);
        for (bit, id) in rest.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                part.insert(*id);
            }
        }
        let leftover: BTreeSet<JobId> = ids.difference(&part).copied().collect();
        let total = &table[&part] + &brute_force_closure(table, &leftover);
        if best.as_ref().map_or(true, |b| total < *b) {
            best = Some(total);
        }
    }
    best.unwrap()
}

fn assert_family_properties(setup_model: SetupModel, jobs: Vec<Job>, label: &str) {
    let instance = Instance { machines: 2, setup_model, jobs };
    instance.validate().unwrap_or_else(|e| panic!("{label} instance invalid: {e:?}"));
    let catalog = instance.catalog();
    assert!(
        is_monotone(&instance.setup_model, &catalog, 12).unwrap(),
        "{label} model not monotone: {}",
        instance.to_json_pretty(),
    );
    assert!(
        is_subadditive(&instance.setup_model, &catalog, 12).unwrap(),
        "{label} model not subadditive: {}",
        instance.to_json_pretty(),
    );
}

#[test]
fn criterion_6_set_function_properties_hold() {
    for i in 0..200u64 {
        // Constant setups.
        let mut rng = ChaCha8Rng::seed_from_u64(0xFA_0000 + i);
        let n = 1 + (rng.next_u64() % 10) as usize;
        let jobs: Vec<Job> = (0..n).map(|id| Job::plain(id, tv(0))).collect();
        assert_family_properties(SetupModel::constant(), jobs, "constant");

        // Weighted type-specific setups.
        let mut rng = ChaCha8Rng::seed_from_u64(0xFB_0000 + i);
        let n = 1 + (rng.next_u64() % 10) as usize;
        let types = 1 + (rng.next_u64() % 4) as u32;
        let weights: Vec<(u32, TimeValue)> =
            (0..types).map(|t| (t, tv(1 + rng.next_u64() % 3))).collect();
        let jobs: Vec<Job> = (0..n)
            .map(|id| Job::typed(id, tv(0), (rng.next_u64() % u64::from(types)) as u32))
            .collect();
        assert_family_properties(SetupModel::type_specific(weights), jobs, "type-specific");

        // Library-based setups: each job needs a nonempty set of libraries.
        let mut rng = ChaCha8Rng::seed_from_u64(0xFC_0000 + i);
        let n = 1 + (rng.next_u64() % 7) as usize;
        let libs = 2 + (rng.next_u64() % 3) as u32;
        let weights: Vec<(u32, TimeValue)> =
            (0..libs).map(|l| (l, tv(1 + rng.next_u64() % 3))).collect();
        let jobs: Vec<Job> = (0..n)
            .map(|id| {
                let mut wanted = BTreeSet::new();
                while wanted.is_empty() {
                    wanted = (0..libs).filter(|_| rng.next_u64() % 2 == 0).collect();
                }
                Job { libraries: Some(wanted), ..Job::plain(id, tv(0)) }
            })
            .collect();
        assert_family_properties(SetupModel::library_based(weights), jobs, "library");

        // Tour-based setups over points on a line (a metric, so round
        // trips from the origin are monotone and subadditive).
        let mut rng = ChaCha8Rng::seed_from_u64(0xFD_0000 + i);
        let n = 1 + (rng.next_u64() % 5) as usize;
        let coords: Vec<i64> =
            std::iter::once(0).chain((0..n).map(|_| (rng.next_u64() % 7) as i64)).collect();
        let distances: Vec<Vec<TimeValue>> = coords
            .iter()
            .map(|a| coords.iter().map(|b| tv((a - b).unsigned_abs())).collect())
            .collect();
        let jobs: Vec<Job> = (0..n)
            .map(|id| Job { point: Some(id + 1), ..Job::plain(id, tv(0)) })
            .collect();
        assert_family_properties(SetupModel::tsp_based(0, distances), jobs, "tour");

        // Explicit tables built as capped sums, which are monotone and
        // subadditive by construction.
        let mut rng = ChaCha8Rng::seed_from_u64(0xFE_0000 + i);
        let n = 1 + (rng.next_u64() % 8) as usize;
        let weights: Vec<u64> = (0..n).map(|_| 1 + rng.next_u64() % 3).collect();
        let cap = 2 + rng.next_u64() % 4;
        let jobs: Vec<Job> = (0..n).map(|id| Job::plain(id, tv(0))).collect();
        let probe = Instance { machines: 2, setup_model: SetupModel::constant(), jobs: jobs.clone() };
        let catalog = probe.catalog();
        let mut table = BTreeMap::new();
        for mask in 0..(1u32 << n) {
            let set: BTreeSet<JobId> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            let sum: u64 = set.iter().map(|j| weights[*j]).sum();
            let value = if set.is_empty() { TimeValue::zero() } else { tv(sum.min(cap)) };
            table.insert(set, value);
        }
        let model = SetupModel::explicit(table, &catalog).unwrap();
        assert_family_properties(model, jobs, "explicit");
    }

    // Exact subadditive closure versus explicit set-partition enumeration
    // on arbitrary (not necessarily monotone or subadditive) tables.
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1_0500 + i);
        let jobs: Vec<Job> = (0..5).map(|id| Job::plain(id, tv(0))).collect();
        let probe = Instance { machines: 1, setup_model: SetupModel::constant(), jobs };
        let catalog = probe.catalog();
        let mut table = BTreeMap::new();
        for mask in 0..(1u32 << 5) {
            let set: BTreeSet<JobId> = (0..5).filter(|j| mask & (1 << j) != 0).collect();
            let value = if set.is_empty() { TimeValue::zero() } else { tv(rng.next_u64() % 7) };
            table.insert(set, value);
        }
        let model = SetupModel::explicit_unchecked(table.clone());
        for mask in 0..(1u32 << 5) {
            let ids: BTreeSet<JobId> = (0..5).filter(|j| mask & (1 << j) != 0).collect();
            let via_dp = subadditive_closure(&model, &catalog, &ids).unwrap();
            let via_enumeration = brute_force_closure(&table, &ids);
            assert_eq!(via_dp, via_enumeration, "closure mismatch on table {i}, set {ids:?}");
        }
    }
    println!(
        "criterion 6 (monotone + subadditive for 200 draws x 5 families; \
         closure == brute force on 50 tables): PASS"
    );
}

/// All multisets of positive type counts summing to n, nonincreasing, with
/// at most `max_parts` entries.
fn count_profiles(n: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn rec(
        remaining: usize,
        max_first: usize,
        slots: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        if slots == 0 {
            return;
        }
        for c in (1..=remaining.min(max_first)).rev() {
            prefix.push(c);
            rec(remaining - c, c, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_parts, &mut Vec::new(), &mut out);
    out
}

#[test]
fn criterion_7_partition_oracles_agree() {
    // The balanced type split must equal the exhaustive optimum on every
    // unweighted type-count shape with at most 12 jobs and 6 types (job
    // identities beyond the type counts cannot matter).
    for n in 1..=12usize {
        for profile in count_profiles(n, 6) {
            let mut jobs = Vec::new();
            for (tag, count) in profile.iter().enumerate() {
                for _ in 0..*count {
                    jobs.push(Job::typed(jobs.len(), tv(0), tag as u32));
                }
            }
            let setup_model = SetupModel::unweighted_type_specific(0..profile.len() as u32);
            let instance = Instance { machines: 2, setup_model, jobs };
            let catalog = instance.catalog();
            let all = instance.all_jobs();
            let ks: &[usize] = if n <= 8 { &[2, 3, 4, 5, 6] } else { &[2, 3] };
            for &k in ks {
                let exact = exact_min_max_partition(&all, k, &instance.setup_model, &catalog)
                    .unwrap()
                    .max_cost(&instance.setup_model, &catalog)
                    .unwrap();
                let balanced =
                    balanced_type_partition(&all, k, &instance.setup_model, &catalog).unwrap();
                balanced.validate_covers(&all).unwrap();
                let value = balanced.max_cost(&instance.setup_model, &catalog).unwrap();
                assert_eq!(value, exact, "type counts {profile:?}, k = {k}");
            }
        }
    }
    // The size-capped split with k = m + ⌈√(mn)⌉ parts of at most
    // ⌈√(n/m)⌉ jobs never costs more than the uncapped m-part optimum.
    for instance in corpus() {
        let (n, m) = (instance.n() as u64, instance.m() as u64);
        let catalog = instance.catalog();
        let all = instance.all_jobs();
        let cap = ceil_sqrt_ratio(n, m) as usize;
        let k = (m + ceil_sqrt_ratio(m * n, 1)) as usize;
        let capped = size_limited_partition(
            &all,
            k,
            cap,
            &instance.setup_model,
            &catalog,
            SizeLimitMode::Exact,
        )
        .unwrap()
        .max_cost(&instance.setup_model, &catalog)
        .unwrap();
        let uncapped = exact_min_max_partition(&all, instance.m(), &instance.setup_model, &catalog)
            .unwrap()
            .max_cost(&instance.setup_model, &catalog)
            .unwrap();
        assert!(
            capped <= uncapped,
            "capped split {capped} beats nothing: uncapped {uncapped} at n={n}, m={m}",
        );
    }
    println!(
        "criterion 7 (balanced type split optimal on every shape; \
         capped split within the uncapped optimum): PASS"
    );
}
