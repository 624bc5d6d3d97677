//! Dataset splitting: ratio-driven partitions plus compositional splits
//! that control which part names the test set may share with training.
//!
//! Rows are the caller's sampling unit (one object instance, or one
//! (object, part) sample for part-wise mode). Construction is seeded and
//! deterministic, and every split is re-audited by [`audit_splits`], an
//! independent checker that re-derives the constraints from the rows.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How rows are grouped before being dealt into train/val/test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    /// Every row is independent; ratios hold to within one row.
    #[serde(rename = "object-wise")]
    ObjectWise,
    /// Rows sharing a part class stay together: each part class lands in
    /// exactly one split. Ratios are met as closely as the class sizes
    /// allow.
    #[serde(rename = "part-wise")]
    PartWise,
    /// Category-level holdout where every test part name also occurs in
    /// training (novel objects, familiar parts). Validation is empty.
    #[serde(rename = "related")]
    Related,
    /// Category-level holdout with zero part-name overlap between train
    /// and test (novel objects and novel parts). Validation is empty.
    #[serde(rename = "non_related")]
    NonRelated,
}

/// Split request: mode, target ratios, and the shuffling seed.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(mode: SplitMode, seed: u64) -> Self {
        SplitSpec { mode, train: 0.8, val: 0.1, test: 0.1, seed }
    }

    fn validate(&self) -> Result<()> {
        for r in [self.train, self.val, self.test] {
            if !(0.0..=1.0).contains(&r) || !r.is_finite() {
                return Err(Error::InvalidConfig(format!("split ratio {r} outside [0,1]")));
            }
        }
        let sum = self.train + self.val + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("split ratios sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// One splittable row: a unique id, the object category, and the part
/// classes the row carries (exactly one for part-wise mode).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleInfo {
    pub id: String,
    pub category: String,
    pub parts: Vec<String>,
}

/// Disjoint row-index partition, each list ascending.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Splits {
    pub mode: SplitMode,
    pub seed: u64,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    /// Content hash over the mode, seed, and the row ids in each split;
    /// stable across processes and platforms.
    pub fn content_hash(&self, rows: &[SampleInfo]) -> String {
        let mut state: u64 = 0x5bd1_e995_9e37_79b9;
        let mut absorb = |bytes: &[u8]| {
            for &b in bytes {
                state ^= b as u64;
                state = state.wrapping_mul(0x9e37_79b9_7f4a_7c15);
                state ^= state >> 29;
            }
        };
        absorb(format!("{:?}/{}", self.mode, self.seed).as_bytes());
        for (name, indices) in
            [("train", &self.train), ("val", &self.val), ("test", &self.test)]
        {
            absorb(name.as_bytes());
            for &i in indices.iter() {
                absorb(rows[i].id.as_bytes());
                absorb(b"\x1f");
            }
        }
        format!("{state:016x}")
    }
}

/// Partitions `rows` per the spec. Ratio-driven modes honor 8:1:1 (or any
/// requested ratios) to within one row; compositional modes satisfy their
/// part-name constraints and treat ratios as targets only. The result is
/// always passed through [`audit_splits`] before being returned.
pub fn make_splits(rows: &[SampleInfo], spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    if rows.is_empty() {
        return Err(Error::InfeasibleSplit("no rows to split".into()));
    }
    let mut seen = BTreeSet::new();
    for row in rows {
        if !seen.insert(&row.id) {
            return Err(Error::InvalidConfig(format!("duplicate sample id {}", row.id)));
        }
    }

    let splits = match spec.mode {
        SplitMode::ObjectWise => split_object_wise(rows, spec),
        SplitMode::PartWise => split_part_wise(rows, spec)?,
        SplitMode::Related => split_compositional(rows, spec, true)?,
        SplitMode::NonRelated => split_compositional(rows, spec, false)?,
    };
    audit_splits(rows, spec, &splits)?;
    Ok(splits)
}

/// Largest-remainder apportionment of `n` rows into three counts; each
/// count is the floor or the ceiling of its exact quota.
fn apportion(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }
    [counts[0], counts[1], counts[2]]
}

fn split_object_wise(rows: &[SampleInfo], spec: &SplitSpec) -> Splits {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha12Rng::seed_from_u64(spec.seed));
    let [n_train, n_val, n_test] = apportion(rows.len(), [spec.train, spec.val, spec.test]);

    let mut train: Vec<usize> = order[..n_train].to_vec();
    let mut val: Vec<usize> = order[n_train..n_train + n_val].to_vec();
    let mut test: Vec<usize> = order[n_train + n_val..n_train + n_val + n_test].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Splits { mode: spec.mode, seed: spec.seed, train, val, test }
}

fn split_part_wise(rows: &[SampleInfo], spec: &SplitSpec) -> Result<Splits> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        if row.parts.len() != 1 {
            return Err(Error::InvalidConfig(format!(
                "part-wise rows carry exactly one part class; {} has {}",
                row.id,
                row.parts.len()
            )));
        }
        groups.entry(&row.parts[0]).or_default().push(i);
    }

    // Shuffle to vary equal-size assignments across seeds, then deal the
    // largest classes first so every deficit estimate still has room to be
    // corrected by the smaller classes that follow.
    let mut names: Vec<&str> = groups.keys().copied().collect();
    names.shuffle(&mut ChaCha12Rng::seed_from_u64(spec.seed));
    names.sort_by_key(|name| std::cmp::Reverse(groups[name].len()));

    let targets =
        [spec.train * rows.len() as f64, spec.val * rows.len() as f64, spec.test * rows.len() as f64];
    let mut buckets: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for name in names {
        let pick = (0..3)
            .max_by(|&a, &b| {
                let da = targets[a] - buckets[a].len() as f64;
                let db = targets[b] - buckets[b].len() as f64;
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        buckets[pick].extend(&groups[name]);
    }
    let [mut train, mut val, mut test] = buckets;
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(Splits { mode: spec.mode, seed: spec.seed, train, val, test })
}

/// Category-level holdout. `covered` selects the related variant (test part
/// names must all reoccur in training); otherwise the non-related variant
/// (test part names must be absent from training).
fn split_compositional(rows: &[SampleInfo], spec: &SplitSpec, covered: bool) -> Result<Splits> {
    let mut cat_rows: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut cat_parts: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        cat_rows.entry(&row.category).or_default().push(i);
        cat_parts
            .entry(&row.category)
            .or_default()
            .extend(row.parts.iter().map(String::as_str));
    }
    if cat_rows.len() < 2 {
        return Err(Error::InfeasibleSplit(
            "compositional splits need at least two object categories".into(),
        ));
    }

    let mut order: Vec<&str> = cat_rows.keys().copied().collect();
    order.shuffle(&mut ChaCha12Rng::seed_from_u64(spec.seed));

    let target_test = spec.test * rows.len() as f64;
    let mut test_cats: BTreeSet<&str> = BTreeSet::new();
    let mut test_rows = 0usize;
    for &cat in &order {
        if !test_cats.is_empty() && test_rows as f64 >= target_test {
            break;
        }
        if test_cats.len() + 1 == cat_rows.len() {
            break; // training must keep at least one category
        }
        let mut tentative = test_cats.clone();
        tentative.insert(cat);
        let test_parts: BTreeSet<&str> =
            tentative.iter().flat_map(|c| cat_parts[c].iter().copied()).collect();
        let train_parts: BTreeSet<&str> = cat_parts
            .iter()
            .filter(|(c, _)| !tentative.contains(*c))
            .flat_map(|(_, parts)| parts.iter().copied())
            .collect();
        let ok = if covered {
            test_parts.is_subset(&train_parts)
        } else {
            test_parts.is_disjoint(&train_parts)
        };
        if ok {
            test_rows += cat_rows[cat].len();
            test_cats = tentative;
        }
    }
    if test_cats.is_empty() {
        return Err(Error::InfeasibleSplit(format!(
            "no category satisfies the {} part-name constraint",
            if covered { "related" } else { "non-related" }
        )));
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if test_cats.contains(row.category.as_str()) {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    Ok(Splits { mode: spec.mode, seed: spec.seed, train, val: Vec::new(), test })
}

/// Independent post-construction checker: disjoint cover, ratio adherence
/// for object-wise mode, part-class confinement for part-wise mode, and the
/// compositional part-name constraints, all re-derived from the rows.
pub fn audit_splits(rows: &[SampleInfo], spec: &SplitSpec, splits: &Splits) -> Result<()> {
    let fail = |msg: String| Err(Error::InfeasibleSplit(msg));

    let mut all: Vec<usize> =
        splits.train.iter().chain(&splits.val).chain(&splits.test).copied().collect();
    all.sort_unstable();
    if all.len() != rows.len() || all.iter().enumerate().any(|(k, &i)| k != i) {
        return fail("splits are not a disjoint cover of the rows".into());
    }

    let parts_of = |indices: &[usize]| -> BTreeSet<&str> {
        indices
            .iter()
            .flat_map(|&i| rows[i].parts.iter().map(String::as_str))
            .collect()
    };
    let cats_of = |indices: &[usize]| -> BTreeSet<&str> {
        indices.iter().map(|&i| rows[i].category.as_str()).collect()
    };

    match spec.mode {
        SplitMode::ObjectWise => {
            for (count, ratio) in [
                (splits.train.len(), spec.train),
                (splits.val.len(), spec.val),
                (splits.test.len(), spec.test),
            ] {
                let exact = ratio * rows.len() as f64;
                if (count as f64 - exact).abs() >= 1.0 + 1e-9 {
                    return fail(format!("split size {count} misses quota {exact:.2} by ≥1"));
                }
            }
        }
        SplitMode::PartWise => {
            let mut home: BTreeMap<&str, usize> = BTreeMap::new();
            for (which, indices) in
                [(0usize, &splits.train), (1, &splits.val), (2, &splits.test)]
            {
                for &i in indices.iter() {
                    for part in &rows[i].parts {
                        if *home.entry(part).or_insert(which) != which {
                            return fail(format!("part class {part} straddles two splits"));
                        }
                    }
                }
            }
        }
        SplitMode::Related => {
            if !cats_of(&splits.train).is_disjoint(&cats_of(&splits.test)) {
                return fail("related split shares an object category".into());
            }
            let train_parts = parts_of(&splits.train);
            let test_parts = parts_of(&splits.test);
            if splits.test.is_empty() {
                return fail("related split has an empty test set".into());
            }
            if !test_parts.is_subset(&train_parts) {
                return fail("related split: test part names missing from training".into());
            }
            if test_parts.intersection(&train_parts).next().is_none() {
                return fail("related split: no shared part name".into());
            }
        }
        SplitMode::NonRelated => {
            if !cats_of(&splits.train).is_disjoint(&cats_of(&splits.test)) {
                return fail("non-related split shares an object category".into());
            }
            if splits.test.is_empty() {
                return fail("non-related split has an empty test set".into());
            }
            if !parts_of(&splits.train).is_disjoint(&parts_of(&splits.test)) {
                return fail("non-related split shares a part name".into());
            }
        }
    }
    Ok(())
}
