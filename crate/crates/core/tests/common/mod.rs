//! Brute-force oracles and fixtures shared by the integration suites. Nothing
//! here calls into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use granular::table::{OperatingRanges, SyntheticConfig};
use granular::{DecisionSystem, InformationTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_system(rng: &mut ChaCha8Rng, max_objects: usize, max_attrs: usize, max_levels: u32) -> DecisionSystem {
    let objects = rng.random_range(1..=max_objects);
    let attrs = rng.random_range(1..=max_attrs);
    let levels = rng.random_range(1..=max_levels);
    let rows: Vec<Vec<u32>> = (0..objects)
        .map(|_| (0..attrs).map(|_| rng.random_range(1..=levels)).collect())
        .collect();
    let decisions = (0..objects).map(|_| rng.random_range(1..=levels)).collect();
    let names = (1..=attrs).map(|i| format!("a{i}")).collect();
    DecisionSystem::new(names, "d", rows, decisions).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> BTreeSet<usize> {
    (0..n).filter(|_| rng.random_bool(0.5)).collect()
}

/// Non-empty random subset of `0..n` in ascending order.
pub fn random_attrs(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    loop {
        let attrs: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !attrs.is_empty() {
            return attrs;
        }
    }
}

fn agree(system: &DecisionSystem, i: usize, j: usize, attrs: &[usize]) -> bool {
    attrs.iter().all(|&a| system.rows()[i][a] == system.rows()[j][a])
}

/// Pairwise-comparison partition as a set of blocks.
pub fn partition_oracle(system: &DecisionSystem, attrs: &[usize]) -> BTreeSet<BTreeSet<usize>> {
    let n = system.len();
    (0..n)
        .map(|i| (0..n).filter(|&j| agree(system, i, j, attrs)).collect())
        .collect()
}

pub fn lower_oracle(system: &DecisionSystem, concept: &BTreeSet<usize>, attrs: &[usize]) -> BTreeSet<usize> {
    let n = system.len();
    (0..n)
        .filter(|&i| (0..n).filter(|&j| agree(system, i, j, attrs)).all(|j| concept.contains(&j)))
        .collect()
}

pub fn upper_oracle(system: &DecisionSystem, concept: &BTreeSet<usize>, attrs: &[usize]) -> BTreeSet<usize> {
    let n = system.len();
    (0..n)
        .filter(|&i| concept.iter().any(|&j| agree(system, i, j, attrs)))
        .collect()
}

/// Certainty of `IF descriptors THEN decision` by scanning every object.
pub fn certainty_oracle(system: &DecisionSystem, descriptors: &[(usize, u32)], decision: u32) -> (usize, usize) {
    let mut matched = 0;
    let mut correct = 0;
    for (row, &d) in system.rows().iter().zip(system.decisions()) {
        if descriptors.iter().all(|&(a, l)| row[a] == l) {
            matched += 1;
            if d == decision {
                correct += 1;
            }
        }
    }
    (correct, matched)
}

/// Optimal 1-D k-means by exhaustive search over contiguous splits of the
/// sorted values (optimal 1-D clusters are contiguous). Returns the 1-based
/// cluster of each input value, clusters ordered by position.
pub fn kmeans_1d_oracle(values: &[f64], k: usize) -> Vec<u32> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sse = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| (v - m).powi(2)).sum::<f64>()
    };
    let n = sorted.len();
    let mut best = (f64::INFINITY, Vec::new());
    let mut cuts = vec![0usize; k - 1];
    fn recurse(
        pos: usize,
        start: usize,
        n: usize,
        cuts: &mut Vec<usize>,
        sorted: &[f64],
        sse: &dyn Fn(&[f64]) -> f64,
        best: &mut (f64, Vec<usize>),
    ) {
        if pos == cuts.len() {
            let mut bounds = vec![0];
            bounds.extend_from_slice(cuts);
            bounds.push(n);
            let total: f64 = bounds.windows(2).map(|w| sse(&sorted[w[0]..w[1]])).sum();
            if total < best.0 {
                *best = (total, cuts.clone());
            }
            return;
        }
        for c in start..n {
            cuts[pos] = c;
            recurse(pos + 1, c + 1, n, cuts, sorted, sse, best);
        }
    }
    recurse(0, 1, n, &mut cuts, &sorted, &sse, &mut best);
    let cuts = best.1;
    let thresholds: Vec<f64> = cuts.iter().map(|&c| sorted[c]).collect();
    values
        .iter()
        .map(|v| 1 + thresholds.iter().filter(|&&t| *v >= t).count() as u32)
        .collect()
}

/// 169-object Plitt-law dataset, noise-free.
pub fn plitt_table(seed: u64) -> InformationTable {
    granular::table::generate_synthetic(&SyntheticConfig {
        object_count: 169,
        noise_sigma: 0.0,
        seed,
        ranges: OperatingRanges::default(),
    })
    .unwrap()
}

pub const BAND_CENTERS: [f64; 3] = [26.5, 42.5, 58.5];
pub const BAND_DECISIONS: [f64; 3] = [20.0, 40.0, 60.0];

/// 169 objects whose decision depends only on which of three separated bands
/// the last condition attribute falls in. The other three attributes are
/// uniform noise.
pub fn banded_table(seed: u64) -> InformationTable {
    let mut r = rng(seed);
    let ranges = OperatingRanges::default();
    let mut conditions = Vec::new();
    let mut decisions = Vec::new();
    for _ in 0..169 {
        let band = r.random_range(0..3);
        conditions.push(vec![
            r.random_range(ranges.inlet_pressure.0..ranges.inlet_pressure.1),
            r.random_range(ranges.solids_fraction.0..ranges.solids_fraction.1),
            r.random_range(ranges.spigot_diameter.0..ranges.spigot_diameter.1),
            BAND_CENTERS[band] + r.random_range(-1.5..1.5),
        ]);
        decisions.push(BAND_DECISIONS[band]);
    }
    InformationTable::new(
        granular::table::SYNTHETIC_ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
        granular::table::SYNTHETIC_DECISION,
        conditions,
        decisions,
    )
    .unwrap()
}

pub fn decision_range(table: &InformationTable) -> f64 {
    let d = table.decisions();
    d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - d.iter().cloned().fold(f64::INFINITY, f64::min)
}
