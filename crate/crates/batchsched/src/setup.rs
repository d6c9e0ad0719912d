//! Batch setup-time families and set-function analysis oracles.
//!
//! Five families are supported; all are monotone and subadditive except
//! arbitrary explicit tables, which are validated at load time. The oracles
//! at the bottom (`is_monotone`, `is_subadditive`, `subadditive_closure`)
//! enumerate subsets and are limited to small universes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instance::{JobCatalog, JobId};
use crate::time::TimeValue;

/// Largest point set (batch points plus origin) the exact tour solver accepts.
pub const TSP_EXACT_LIMIT: usize = 13;
/// Largest job universe the subset-enumeration oracles accept.
pub const UNIVERSE_LIMIT: usize = 12;

/// A batch setup-time function c. Every variant satisfies c(∅) = 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum SetupModel {
    /// c(X) = 1 for every nonempty X.
    Constant,
    /// c(X) = sum of w_t over the types present in X.
    TypeSpecific { type_weights: BTreeMap<u32, TimeValue> },
    /// c(X) = sum of w_l over the union of the library sets of X.
    LibraryBased { lib_weights: BTreeMap<u32, TimeValue> },
    /// c(X) = exact optimal closed-tour length over the points of X plus the
    /// origin, under the given rational distance matrix.
    TspBased { origin: usize, distances: Vec<Vec<TimeValue>> },
    /// c(X) read from a table keyed by the sorted id list ("1,4,7").
    Explicit {
        #[serde(with = "explicit_table")]
        table: BTreeMap<BTreeSet<JobId>, TimeValue>,
    },
}

impl SetupModel {
    pub fn constant() -> Self {
        SetupModel::Constant
    }

    pub fn type_specific(weights: impl IntoIterator<Item = (u32, TimeValue)>) -> Self {
        SetupModel::TypeSpecific { type_weights: weights.into_iter().collect() }
    }

    /// Type-specific with every listed type at weight 1.
    pub fn unweighted_type_specific(tags: impl IntoIterator<Item = u32>) -> Self {
        SetupModel::TypeSpecific {
            type_weights: tags.into_iter().map(|t| (t, TimeValue::one())).collect(),
        }
    }

    pub fn library_based(weights: impl IntoIterator<Item = (u32, TimeValue)>) -> Self {
        SetupModel::LibraryBased { lib_weights: weights.into_iter().collect() }
    }

    pub fn tsp_based(origin: usize, distances: Vec<Vec<TimeValue>>) -> Self {
        SetupModel::TspBased { origin, distances }
    }

    /// Builds an explicit table and validates it against the catalog:
    /// complete over the universe, monotone, and subadditive.
    pub fn explicit(
        table: BTreeMap<BTreeSet<JobId>, TimeValue>,
        catalog: &JobCatalog,
    ) -> Result<Self, Error> {
        let model = SetupModel::Explicit { table };
        model.validate(catalog)?;
        Ok(model)
    }

    /// Builds an explicit table with no validation at all. This is the
    /// escape hatch for the analysis oracles, which deliberately probe
    /// tables that are incomplete or not subadditive.
    pub fn explicit_unchecked(table: BTreeMap<BTreeSet<JobId>, TimeValue>) -> Self {
        SetupModel::Explicit { table }
    }

    /// Evaluates c on a set of job ids. The empty set costs 0 in every
    /// variant.
    pub fn cost(&self, catalog: &JobCatalog, ids: &BTreeSet<JobId>) -> Result<TimeValue, Error> {
        if ids.is_empty() {
            return Ok(TimeValue::zero());
        }
        match self {
            SetupModel::Constant => Ok(TimeValue::one()),
            SetupModel::TypeSpecific { type_weights } => {
                let mut present = BTreeSet::new();
                for &id in ids {
                    let meta = catalog.get(id)?;
                    let tag = meta
                        .type_tag
                        .ok_or(Error::MissingTag { job: id, what: "type" })?;
                    if !type_weights.contains_key(&tag) {
                        return Err(Error::UnknownTag {
                            job: id,
                            what: "type",
                            tag: tag.to_string(),
                        });
                    }
                    present.insert(tag);
                }
                Ok(TimeValue::sum_of(present.iter().map(|t| &type_weights[t])))
            }
            SetupModel::LibraryBased { lib_weights } => {
                let mut union = BTreeSet::new();
                for &id in ids {
                    let meta = catalog.get(id)?;
                    let libs = meta
                        .libraries
                        .as_ref()
                        .ok_or(Error::MissingTag { job: id, what: "libraries" })?;
                    for &lib in libs {
                        if !lib_weights.contains_key(&lib) {
                            return Err(Error::UnknownTag {
                                job: id,
                                what: "library",
                                tag: lib.to_string(),
                            });
                        }
                        union.insert(lib);
                    }
                }
                Ok(TimeValue::sum_of(union.iter().map(|l| &lib_weights[l])))
            }
            SetupModel::TspBased { origin, distances } => {
                let mut points = BTreeSet::from([*origin]);
                for &id in ids {
                    let meta = catalog.get(id)?;
                    let point = meta
                        .point
                        .ok_or(Error::MissingTag { job: id, what: "point" })?;
                    if point >= distances.len() {
                        return Err(Error::UnknownTag {
                            job: id,
                            what: "point",
                            tag: point.to_string(),
                        });
                    }
                    points.insert(point);
                }
                tsp_optimal(distances, &points)
            }
            SetupModel::Explicit { table } => table
                .get(ids)
                .cloned()
                .ok_or_else(|| Error::MissingTableEntry(set_key(ids))),
        }
    }

    /// Checks the variant's structural invariants against a catalog.
    pub fn validate(&self, catalog: &JobCatalog) -> Result<(), Error> {
        match self {
            SetupModel::Constant
            | SetupModel::TypeSpecific { .. }
            | SetupModel::LibraryBased { .. } => Ok(()),
            SetupModel::TspBased { origin, distances } => {
                let p = distances.len();
                if p == 0 {
                    return Err(Error::InvalidModel("distance matrix is empty".into()));
                }
                if *origin >= p {
                    return Err(Error::InvalidModel(format!(
                        "origin {origin} outside matrix of size {p}"
                    )));
                }
                for (i, row) in distances.iter().enumerate() {
                    if row.len() != p {
                        return Err(Error::InvalidModel(format!(
                            "distance matrix row {i} has length {} != {p}",
                            row.len()
                        )));
                    }
                    if !row[i].is_zero() {
                        return Err(Error::InvalidModel(format!("d({i},{i}) must be 0")));
                    }
                }
                for i in 0..p {
                    for j in 0..p {
                        if distances[i][j] != distances[j][i] {
                            return Err(Error::InvalidModel(format!(
                                "distance matrix not symmetric at ({i},{j})"
                            )));
                        }
                    }
                }
                for i in 0..p {
                    for j in 0..p {
                        for k in 0..p {
                            let via = &distances[i][k] + &distances[k][j];
                            if distances[i][j] > via {
                                return Err(Error::InvalidModel(format!(
                                    "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                                )));
                            }
                        }
                    }
                }
                for meta in catalog.metas() {
                    if let Some(point) = meta.point {
                        if point >= p {
                            return Err(Error::UnknownTag {
                                job: meta.id,
                                what: "point",
                                tag: point.to_string(),
                            });
                        }
                    }
                }
                Ok(())
            }
            SetupModel::Explicit { table } => {
                let n = catalog.len();
                if n > UNIVERSE_LIMIT {
                    return Err(Error::UniverseTooLarge { size: n, limit: UNIVERSE_LIMIT });
                }
                for key in table.keys() {
                    if let Some(&bad) = key.iter().find(|&&id| id >= n) {
                        return Err(Error::InvalidModel(format!(
                            "table key `{}` mentions unknown job {bad}",
                            set_key(key)
                        )));
                    }
                }
                if let Some(zero) = table.get(&BTreeSet::new()) {
                    if !zero.is_zero() {
                        return Err(Error::InvalidModel(
                            "the empty set must cost 0".into(),
                        ));
                    }
                }
                for mask in 1usize..(1 << n) {
                    let set = mask_to_set(mask);
                    if !table.contains_key(&set) {
                        return Err(Error::MissingTableEntry(set_key(&set)));
                    }
                }
                if !is_monotone(self, catalog, UNIVERSE_LIMIT)? {
                    return Err(Error::InvalidModel("explicit table is not monotone".into()));
                }
                if !is_subadditive(self, catalog, UNIVERSE_LIMIT)? {
                    return Err(Error::InvalidModel("explicit table is not subadditive".into()));
                }
                Ok(())
            }
        }
    }
}

/// Canonical key string for a job set: sorted ids joined by commas.
pub fn set_key(ids: &BTreeSet<JobId>) -> String {
    let parts: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    parts.join(",")
}

fn mask_to_set(mask: usize) -> BTreeSet<JobId> {
    (0..usize::BITS as usize).filter(|i| mask & (1 << i) != 0).collect()
}

mod explicit_table {
    use super::*;
    use serde::de::Error as _;
    use serde::ser::SerializeMap;

    pub fn serialize<S: serde::Serializer>(
        table: &BTreeMap<BTreeSet<JobId>, TimeValue>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(table.len()))?;
        for (key, value) in table {
            map.serialize_entry(&set_key(key), value)?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<BTreeSet<JobId>, TimeValue>, D::Error> {
        let raw: BTreeMap<String, TimeValue> = BTreeMap::deserialize(deserializer)?;
        let mut table = BTreeMap::new();
        for (key, value) in raw {
            let mut set = BTreeSet::new();
            if !key.trim().is_empty() {
                for part in key.split(',') {
                    let id: JobId = part
                        .trim()
                        .parse()
                        .map_err(|_| D::Error::custom(format!("bad table key `{key}`")))?;
                    set.insert(id);
                }
            }
            table.insert(set, value);
        }
        Ok(table)
    }
}

/// Exact optimal closed-tour length visiting every point in `subset`
/// (which must include the tour's anchor point, normally the origin).
/// Held-Karp bitmask dynamic programming; rejects more than
/// [`TSP_EXACT_LIMIT`] points rather than falling back to a heuristic.
pub fn tsp_optimal(
    distances: &[Vec<TimeValue>],
    subset: &BTreeSet<usize>,
) -> Result<TimeValue, Error> {
    let pts: Vec<usize> = subset.iter().copied().collect();
    let k = pts.len();
    if k > TSP_EXACT_LIMIT {
        return Err(Error::TspLimitExceeded { points: k, limit: TSP_EXACT_LIMIT });
    }
    if let Some(&bad) = pts.iter().find(|&&p| p >= distances.len()) {
        return Err(Error::InvalidModel(format!("point {bad} outside distance matrix")));
    }
    if k <= 1 {
        return Ok(TimeValue::zero());
    }
    if k == 2 {
        return Ok(&distances[pts[0]][pts[1]] + &distances[pts[1]][pts[0]]);
    }
    // dp[mask][j]: cheapest path starting at pts[0], visiting exactly the
    // points of `mask` (which always includes bit 0), ending at pts[j].
    let full = (1usize << k) - 1;
    let mut dp: Vec<Vec<Option<TimeValue>>> = vec![vec![None; k]; 1 << k];
    dp[1][0] = Some(TimeValue::zero());
    for mask in 1..=full {
        if mask & 1 == 0 {
            continue;
        }
        for last in 0..k {
            let Some(cost) = dp[mask][last].clone() else { continue };
            for next in 1..k {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let cand = &cost + &distances[pts[last]][pts[next]];
                let slot = &mut dp[mask | (1 << next)][next];
                if slot.as_ref().is_none_or(|best| cand < *best) {
                    *slot = Some(cand);
                }
            }
        }
    }
    let mut best: Option<TimeValue> = None;
    for last in 1..k {
        let Some(cost) = &dp[full][last] else { continue };
        let tour = cost + &distances[pts[last]][pts[0]];
        if best.as_ref().is_none_or(|b| tour < *b) {
            best = Some(tour);
        }
    }
    best.ok_or_else(|| Error::InvalidModel("tour search found no route".into()))
}

fn all_subset_costs(
    model: &SetupModel,
    catalog: &JobCatalog,
    universe_limit: usize,
) -> Result<Vec<TimeValue>, Error> {
    let n = catalog.len();
    if n > universe_limit {
        return Err(Error::UniverseTooLarge { size: n, limit: universe_limit });
    }
    (0..(1usize << n))
        .map(|mask| model.cost(catalog, &mask_to_set(mask)))
        .collect()
}

/// True iff c(X) ≤ c(Y) whenever X ⊆ Y, checked over the whole catalog
/// universe. Monotonicity over the subset lattice is equivalent to
/// monotonicity across single-element insertions, so the check is
/// O(2^n · n) table lookups after one cost evaluation per subset.
pub fn is_monotone(
    model: &SetupModel,
    catalog: &JobCatalog,
    universe_limit: usize,
) -> Result<bool, Error> {
    let costs = all_subset_costs(model, catalog, universe_limit)?;
    let n = catalog.len();
    for mask in 0..(1usize << n) {
        for e in 0..n {
            if mask & (1 << e) == 0 && costs[mask] > costs[mask | (1 << e)] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff c(X) + c(Y) ≥ c(X ∪ Y) for all disjoint X, Y over the catalog
/// universe.
pub fn is_subadditive(
    model: &SetupModel,
    catalog: &JobCatalog,
    universe_limit: usize,
) -> Result<bool, Error> {
    let costs = all_subset_costs(model, catalog, universe_limit)?;
    let n = catalog.len();
    for union in 0..(1usize << n) {
        // Walk every submask x of `union`; its complement within `union`
        // is the disjoint partner.
        let mut x = union;
        loop {
            let y = union & !x;
            if x <= y && &costs[x] + &costs[y] < costs[union] {
                return Ok(false);
            }
            if x == 0 {
                break;
            }
            x = (x - 1) & union;
        }
    }
    Ok(true)
}

/// Minimum total setup over all ways to split `ids` into disjoint pieces;
/// equals c(ids) whenever c is already subadditive, and never exceeds it.
pub fn subadditive_closure(
    model: &SetupModel,
    catalog: &JobCatalog,
    ids: &BTreeSet<JobId>,
) -> Result<TimeValue, Error> {
    let members: Vec<JobId> = ids.iter().copied().collect();
    let k = members.len();
    if k > UNIVERSE_LIMIT {
        return Err(Error::UniverseTooLarge { size: k, limit: UNIVERSE_LIMIT });
    }
    if k == 0 {
        return Ok(TimeValue::zero());
    }
    let to_set = |mask: usize| -> BTreeSet<JobId> {
        (0..k).filter(|i| mask & (1 << i) != 0).map(|i| members[i]).collect()
    };
    let mut costs = Vec::with_capacity(1 << k);
    for mask in 0..(1usize << k) {
        costs.push(model.cost(catalog, &to_set(mask))?);
    }
    // best[mask] = cheapest partition of `mask`; each step peels off the
    // piece containing the lowest set bit so every partition is counted once.
    let mut best: Vec<Option<TimeValue>> = vec![None; 1 << k];
    best[0] = Some(TimeValue::zero());
    for mask in 1..(1usize << k) {
        let low = mask & mask.wrapping_neg();
        let rest = mask & !low;
        let mut sub = rest;
        loop {
            let piece = sub | low;
            let remainder = mask & !piece;
            if let Some(tail) = best[remainder].clone() {
                let cand = &costs[piece] + &tail;
                if best[mask].as_ref().is_none_or(|b| cand < *b) {
                    best[mask] = Some(cand);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    Ok(best[(1 << k) - 1].clone().expect("full mask is reachable"))
}
