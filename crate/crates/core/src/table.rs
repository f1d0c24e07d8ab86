//! Information tables: real-valued condition attributes plus one decision
//! attribute per object.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::seeded;

/// A rectangular object × attribute table.
///
/// Rows always carry one value per condition attribute plus a decision value,
/// and every value is finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformationTable {
    attribute_names: Vec<String>,
    decision_name: String,
    conditions: Vec<Vec<f64>>,
    decisions: Vec<f64>,
}

impl InformationTable {
    pub fn new(
        attribute_names: Vec<String>,
        decision_name: impl Into<String>,
        conditions: Vec<Vec<f64>>,
        decisions: Vec<f64>,
    ) -> Result<Self> {
        let decision_name = decision_name.into();
        let mut seen = HashSet::new();
        for (i, name) in attribute_names.iter().chain([&decision_name]).enumerate() {
            if name.is_empty() {
                return Err(Error::EmptyColumnName(i));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if conditions.len() != decisions.len() {
            return Err(invalid(format!(
                "{} condition rows but {} decision values",
                conditions.len(),
                decisions.len()
            )));
        }
        for row in &conditions {
            if row.len() != attribute_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: attribute_names.len(),
                    found: row.len(),
                });
            }
        }
        if conditions.iter().flatten().chain(&decisions).any(|v| !v.is_finite()) {
            return Err(invalid("table values must be finite"));
        }
        Ok(Self {
            attribute_names,
            decision_name,
            conditions,
            decisions,
        })
    }

    /// Builds a table from joint `condition ⊕ decision` vectors, the layout the
    /// object-granulation SOM works in.
    pub fn from_joint(
        attribute_names: Vec<String>,
        decision_name: impl Into<String>,
        joint: &[Vec<f64>],
    ) -> Result<Self> {
        let width = attribute_names.len() + 1;
        let mut conditions = Vec::with_capacity(joint.len());
        let mut decisions = Vec::with_capacity(joint.len());
        for v in joint {
            if v.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: v.len(),
                });
            }
            conditions.push(v[..width - 1].to_vec());
            decisions.push(v[width - 1]);
        }
        Self::new(attribute_names, decision_name, conditions, decisions)
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn decision_name(&self) -> &str {
        &self.decision_name
    }

    pub fn conditions(&self) -> &[Vec<f64>] {
        &self.conditions
    }

    pub fn decisions(&self) -> &[f64] {
        &self.decisions
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn attribute_count(&self) -> usize {
        self.attribute_names.len()
    }

    /// Values of condition attribute `index` in object order.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.conditions.iter().map(|row| row[index]).collect()
    }

    pub fn joint_vectors(&self) -> Vec<Vec<f64>> {
        self.conditions
            .iter()
            .zip(&self.decisions)
            .map(|(row, &d)| {
                let mut v = row.clone();
                v.push(d);
                v
            })
            .collect()
    }

    /// Subtable of the given object indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> InformationTable {
        InformationTable {
            attribute_names: self.attribute_names.clone(),
            decision_name: self.decision_name.clone(),
            conditions: indices.iter().map(|&i| self.conditions[i].clone()).collect(),
            decisions: indices.iter().map(|&i| self.decisions[i]).collect(),
        }
    }

    /// Content fingerprint over names and the bit patterns of every value.
    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.attribute_names.hash(&mut h);
        self.decision_name.hash(&mut h);
        for (row, d) in self.conditions.iter().zip(&self.decisions) {
            for v in row {
                v.to_bits().hash(&mut h);
            }
            d.to_bits().hash(&mut h);
        }
        h.finish()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.attribute_names.join(","));
        out.push(',');
        out.push_str(&self.decision_name);
        out.push('\n');
        for (row, d) in self.conditions.iter().zip(&self.decisions) {
            for v in row {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{d}\n"));
        }
        out
    }

    /// Writes the table with the decision as the last column. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Reject,
    DropWithWarning,
}

pub fn ingest_csv(path: impl AsRef<Path>, decision_column: &str) -> Result<InformationTable> {
    ingest_csv_with(path, decision_column, MissingPolicy::Reject)
}

pub fn ingest_csv_with(
    path: impl AsRef<Path>,
    decision_column: &str,
    missing: MissingPolicy,
) -> Result<InformationTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, decision_column, missing)
}

pub fn parse_csv(text: &str, decision_column: &str, missing: MissingPolicy) -> Result<InformationTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();

    let mut seen = HashSet::new();
    for (i, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::EmptyColumnName(i));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }
    let decision_idx = header
        .iter()
        .position(|h| h == decision_column)
        .ok_or_else(|| Error::UnknownDecisionColumn(decision_column.to_owned()))?;

    let mut conditions = Vec::new();
    let mut decisions = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() > header.len() {
            return Err(Error::RowLength {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut values = Vec::with_capacity(header.len());
        let mut incomplete = None;
        for (col, name) in header.iter().enumerate() {
            match record.get(col).filter(|cell| !cell.is_empty()) {
                None => {
                    incomplete = Some(name);
                    break;
                }
                Some(cell) => match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => values.push(v),
                    _ => {
                        return Err(Error::NonNumeric {
                            line,
                            column: name.clone(),
                            value: cell.to_owned(),
                        })
                    }
                },
            }
        }
        if let Some(column) = incomplete {
            match missing {
                MissingPolicy::Reject => {
                    return Err(Error::MissingValue {
                        line,
                        column: column.clone(),
                    })
                }
                MissingPolicy::DropWithWarning => {
                    warn!("dropping line {line}: missing value in `{column}`");
                    dropped += 1;
                    continue;
                }
            }
        }
        decisions.push(values.remove(decision_idx));
        conditions.push(values);
    }
    if dropped > 0 {
        warn!("dropped {dropped} incomplete rows");
    }

    let mut names = header;
    let decision_name = names.remove(decision_idx);
    InformationTable::new(names, decision_name, conditions, decisions)
}

/// Train/test split sizes. Without a shuffle seed the first `train_count`
/// rows train and the next `test_count` rows test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_count: usize,
    pub test_count: usize,
    #[serde(default)]
    pub shuffle_seed: Option<u64>,
}

impl SplitSpec {
    /// 150 training objects and 19 test objects.
    pub fn holdout_150_19() -> Self {
        Self {
            train_count: 150,
            test_count: 19,
            shuffle_seed: None,
        }
    }
}

pub fn split(table: &InformationTable, spec: &SplitSpec) -> Result<(InformationTable, InformationTable)> {
    let requested = spec.train_count + spec.test_count;
    if requested > table.len() {
        return Err(Error::SplitTooLarge {
            requested,
            available: table.len(),
        });
    }
    let mut order: Vec<usize> = (0..table.len()).collect();
    if let Some(seed) = spec.shuffle_seed {
        order.shuffle(&mut seeded(seed));
    }
    let train = table.select(&order[..spec.train_count]);
    let test = table.select(&order[spec.train_count..requested]);
    Ok((train, test))
}

/// Sampling ranges for the four synthetic hydrocyclone operating variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingRanges {
    /// Inlet pressure, kPa.
    pub inlet_pressure: (f64, f64),
    /// Volumetric feed solids fraction.
    pub solids_fraction: (f64, f64),
    /// Spigot (apex) diameter, mm.
    pub spigot_diameter: (f64, f64),
    /// Vortex-finder diameter, mm.
    pub vortex_finder_diameter: (f64, f64),
}

impl Default for OperatingRanges {
    fn default() -> Self {
        Self {
            inlet_pressure: (40.0, 160.0),
            solids_fraction: (0.05, 0.30),
            spigot_diameter: (10.0, 30.0),
            vortex_finder_diameter: (25.0, 60.0),
        }
    }
}

impl OperatingRanges {
    fn as_array(&self) -> [(f64, f64); 4] {
        [
            self.inlet_pressure,
            self.solids_fraction,
            self.spigot_diameter,
            self.vortex_finder_diameter,
        ]
    }
}

/// Configuration of the synthetic hydrocyclone data generator.
///
/// JSON form:
///
/// ```json
/// {
///   "object_count": 169,
///   "noise_sigma": 0.0,
///   "seed": 7,
///   "ranges": {
///     "inlet_pressure": [40.0, 160.0],
///     "solids_fraction": [0.05, 0.30],
///     "spigot_diameter": [10.0, 30.0],
///     "vortex_finder_diameter": [25.0, 60.0]
///   }
/// }
/// ```
///
/// `ranges` may be omitted; `seed` may not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub object_count: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default)]
    pub ranges: OperatingRanges,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.object_count == 0 {
            return Err(invalid("object_count must be at least 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid("noise_sigma must be finite and nonnegative"));
        }
        for ((lo, hi), name) in self.ranges.as_array().into_iter().zip(SYNTHETIC_ATTRIBUTES) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(format!("range for {name} must satisfy min < max")));
            }
            if lo <= 0.0 {
                return Err(invalid(format!("range for {name} must be strictly positive")));
            }
        }
        Ok(())
    }
}

pub const SYNTHETIC_ATTRIBUTES: [&str; 4] = [
    "inlet_pressure",
    "solids_fraction",
    "spigot_diameter",
    "vortex_finder_diameter",
];
pub const SYNTHETIC_DECISION: &str = "d50";

/// Plitt-style cut size (µm) for pressure `p` (kPa), solids volume fraction
/// `phi`, spigot diameter `du` (mm) and vortex-finder diameter `do_` (mm):
///
/// `d50 = 3 · do^1.21 · exp(6.3 · phi) / (du^0.71 · p^0.25)`
///
/// The pressure exponent folds Plitt's flow-rate term through `Q ∝ P^0.56`.
pub fn plitt_d50(p: f64, phi: f64, du: f64, do_: f64) -> f64 {
    3.0 * do_.powf(1.21) * (6.3 * phi).exp() / (du.powf(0.71) * p.powf(0.25))
}

pub fn generate_synthetic(config: &SyntheticConfig) -> Result<InformationTable> {
    config.validate()?;
    let mut rng = seeded(config.seed);
    let noise = Normal::new(0.0, config.noise_sigma).map_err(|e| invalid(e.to_string()))?;
    let ranges = config.ranges.as_array();

    let mut conditions = Vec::with_capacity(config.object_count);
    let mut decisions = Vec::with_capacity(config.object_count);
    for _ in 0..config.object_count {
        let row: Vec<f64> = ranges.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
        let mut d = plitt_d50(row[0], row[1], row[2], row[3]);
        if config.noise_sigma > 0.0 {
            d += noise.sample(&mut rng);
        }
        conditions.push(row);
        decisions.push(d);
    }
    InformationTable::new(
        SYNTHETIC_ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
        SYNTHETIC_DECISION,
        conditions,
        decisions,
    )
}
