//! Kohonen self-organizing maps on rectangular grids.
//!
//! Two uses: a 2-D map over joint `condition ⊕ decision` vectors condenses the
//! training objects into prototype granules, and a 1-D map per attribute
//! turns real values into ordered symbolic levels.

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::seeded;
use crate::rough::DecisionSystem;
use crate::table::InformationTable;

/// Neighborhood radius reached at the end of training, in grid units.
const FINAL_RADIUS: f64 = 0.5;

/// Splits `n` neurons into the most nearly square grid `(n1, n2)` with
/// `n1 <= n2`.
pub fn factor_neurons(n: usize) -> (usize, usize) {
    assert!(n >= 1, "neuron count must be positive");
    let mut n1 = (n as f64).sqrt() as usize;
    while n1 * n1 > n {
        n1 -= 1;
    }
    while (n1 + 1) * (n1 + 1) <= n {
        n1 += 1;
    }
    while n % n1 != 0 {
        n1 -= 1;
    }
    (n1, n / n1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SomTrainingConfig {
    pub epochs: usize,
    pub initial_learning_rate: f64,
    /// Neighborhood radius at step 0, in grid units. `None` picks half the
    /// longer grid side, at least 1.
    #[serde(default)]
    pub initial_radius: Option<f64>,
    pub seed: u64,
}

impl SomTrainingConfig {
    pub fn new(epochs: usize, initial_learning_rate: f64, seed: u64) -> Self {
        Self {
            epochs,
            initial_learning_rate,
            initial_radius: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(invalid("SOM epochs must be positive"));
        }
        if !(self.initial_learning_rate > 0.0 && self.initial_learning_rate <= 1.0) {
            return Err(invalid("SOM learning rate must lie in (0, 1]"));
        }
        if let Some(r) = self.initial_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("SOM radius must be positive"));
            }
        }
        Ok(())
    }

    fn radius_for(&self, n1: usize, n2: usize) -> f64 {
        self.initial_radius
            .unwrap_or_else(|| (n1.max(n2) as f64 / 2.0).max(1.0))
    }
}

/// A trained map. Neuron `k` sits at grid cell `(k / n2, k % n2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    pub n1: usize,
    pub n2: usize,
    pub codebook: Vec<Vec<f64>>,
    pub config: SomTrainingConfig,
    pub initial_quantization_error: f64,
}

impl SomModel {
    pub fn neuron_count(&self) -> usize {
        self.codebook.len()
    }

    pub fn dim(&self) -> usize {
        self.codebook.first().map_or(0, Vec::len)
    }

    fn grid_position(&self, k: usize) -> (f64, f64) {
        ((k / self.n2) as f64, (k % self.n2) as f64)
    }

    /// Index of the nearest codebook vector; ties go to the lowest index.
    pub fn best_matching_unit(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(nearest(&self.codebook, x).0)
    }

    /// Mean squared distance from each datum to its BMU.
    pub fn quantization_error(&self, data: &[Vec<f64>]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut total = 0.0;
        for x in data {
            if x.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: x.len(),
                });
            }
            total += nearest(&self.codebook, x).1;
        }
        Ok(total / data.len() as f64)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(codebook: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, w) in codebook.iter().enumerate() {
        let d = squared_distance(w, x);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn check_data(data: &[Vec<f64>]) -> Result<usize> {
    let dim = data.first().ok_or(Error::EmptyData)?.len();
    if dim == 0 {
        return Err(Error::EmptyData);
    }
    for x in data {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
    }
    Ok(dim)
}

/// Online Kohonen training. The learning rate decays as `exp(-t / T)` with
/// `T = epochs · |data|`; the radius decays exponentially from its initial
/// value to [`FINAL_RADIUS`]. Data order is reshuffled each epoch from the
/// config seed. The returned codebook is the one with the lowest quantization
/// error seen at an epoch boundary (the initial codebook included).
pub fn train_som(data: &[Vec<f64>], grid: (usize, usize), config: &SomTrainingConfig) -> Result<SomModel> {
    config.validate()?;
    let dim = check_data(data)?;
    let (n1, n2) = grid;
    if n1 == 0 || n2 == 0 {
        return Err(invalid("SOM grid sides must be positive"));
    }

    let mut rng = seeded(config.seed);
    let mut lo = data[0].clone();
    let mut hi = data[0].clone();
    for x in data {
        for j in 0..dim {
            lo[j] = lo[j].min(x[j]);
            hi[j] = hi[j].max(x[j]);
        }
    }
    let codebook: Vec<Vec<f64>> = (0..n1 * n2)
        .map(|_| {
            (0..dim)
                .map(|j| if hi[j] > lo[j] { rng.random_range(lo[j]..=hi[j]) } else { lo[j] })
                .collect()
        })
        .collect();

    let mut model = SomModel {
        n1,
        n2,
        codebook,
        config: config.clone(),
        initial_quantization_error: 0.0,
    };
    model.initial_quantization_error = model.quantization_error(data)?;

    let total = (config.epochs * data.len()) as f64;
    let eta0 = config.initial_learning_rate;
    let sigma0 = config.radius_for(n1, n2);
    let radius_rate = (sigma0 / FINAL_RADIUS).ln().max(1.0);
    let positions: Vec<(f64, f64)> = (0..n1 * n2).map(|k| model.grid_position(k)).collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0usize;
    let mut best = (model.initial_quantization_error, model.codebook.clone());
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let t = step as f64 / total;
            let eta = eta0 * (-t).exp();
            let sigma = sigma0 * (-t * radius_rate).exp();
            let x = &data[i];
            let (bmu, _) = nearest(&model.codebook, x);
            let (br, bc) = positions[bmu];
            for (w, &(r, c)) in model.codebook.iter_mut().zip(&positions) {
                let grid_d2 = (r - br).powi(2) + (c - bc).powi(2);
                let h = (-grid_d2 / (2.0 * sigma * sigma)).exp();
                let rate = eta * h;
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += rate * (xj - *wj);
                }
            }
            step += 1;
        }
        let qe = model.quantization_error(data)?;
        if qe < best.0 {
            best = (qe, model.codebook.clone());
        }
    }
    model.codebook = best.1;
    Ok(model)
}

/// Replaces each object by its BMU prototype, keeping one row per neuron that
/// wins at least one object (in neuron order). `model` must have been trained
/// on the table's joint `condition ⊕ decision` vectors.
pub fn quantize_objects(model: &SomModel, table: &InformationTable) -> Result<InformationTable> {
    let width = table.attribute_count() + 1;
    if model.dim() != width {
        return Err(Error::DimensionMismatch {
            expected: width,
            found: model.dim(),
        });
    }
    let mut hit = vec![false; model.neuron_count()];
    for x in table.joint_vectors() {
        hit[nearest(&model.codebook, &x).0] = true;
    }
    let prototypes: Vec<Vec<f64>> = hit
        .iter()
        .zip(&model.codebook)
        .filter(|(h, _)| **h)
        .map(|(_, w)| w.clone())
        .collect();
    InformationTable::from_joint(
        table.attribute_names().to_vec(),
        table.decision_name(),
        &prototypes,
    )
}

/// Per-dimension min-max scaling to `[0, 1]`; constant dimensions map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub span: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(data: &[Vec<f64>]) -> Result<Self> {
        let dim = check_data(data)?;
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for x in data {
            for j in 0..dim {
                min[j] = min[j].min(x[j]);
                max[j] = max[j].max(x[j]);
            }
        }
        let span = min
            .iter()
            .zip(&max)
            .map(|(lo, hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect();
        Ok(Self { min, span })
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.span))
            .map(|(v, (lo, s))| (v - lo) / s)
            .collect()
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.span))
            .map(|(v, (lo, s))| v * s + lo)
            .collect()
    }
}

/// Trains the object-granulation map in min-max scaled joint space and
/// returns the surviving prototypes in original units together with the map.
pub fn granulate_objects(
    table: &InformationTable,
    neurons: usize,
    config: &SomTrainingConfig,
) -> Result<(InformationTable, SomModel)> {
    let joint = table.joint_vectors();
    let scaler = MinMaxScaler::fit(&joint)?;
    let scaled: Vec<Vec<f64>> = joint.iter().map(|x| scaler.transform(x)).collect();
    let model = train_som(&scaled, factor_neurons(neurons), config)?;

    let mut hit = vec![false; model.neuron_count()];
    for x in &scaled {
        hit[nearest(&model.codebook, x).0] = true;
    }
    let prototypes: Vec<Vec<f64>> = hit
        .iter()
        .zip(&model.codebook)
        .filter(|(h, _)| **h)
        .map(|(_, w)| scaler.inverse(w))
        .collect();
    let reduced = InformationTable::from_joint(
        table.attribute_names().to_vec(),
        table.decision_name(),
        &prototypes,
    )?;
    Ok((reduced, model))
}

/// Symbolic scale of one attribute: level `k` (1-based) is the `k`-th
/// smallest prototype.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeScale {
    pub name: String,
    pub prototypes: Vec<f64>,
    /// Fewer distinct values than requested levels were available.
    pub degenerate: bool,
}

impl AttributeScale {
    pub fn level_count(&self) -> usize {
        self.prototypes.len()
    }

    /// Level of the nearest prototype; ties go to the lower level.
    pub fn level_of(&self, x: f64) -> u32 {
        let mut best = (0usize, f64::INFINITY);
        for (k, p) in self.prototypes.iter().enumerate() {
            let d = (x - p).abs();
            if d < best.1 {
                best = (k, d);
            }
        }
        best.0 as u32 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationScheme {
    pub conditions: Vec<AttributeScale>,
    pub decision: AttributeScale,
    /// [`InformationTable::checksum`] of the table the scales were fitted on.
    pub fitted_on: u64,
}

impl DiscretizationScheme {
    pub fn condition_levels(&self, row: &[f64]) -> Result<Vec<u32>> {
        if row.len() != self.conditions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.conditions.len(),
                found: row.len(),
            });
        }
        Ok(self.conditions.iter().zip(row).map(|(s, &x)| s.level_of(x)).collect())
    }

    pub fn decision_level(&self, d: f64) -> u32 {
        self.decision.level_of(d)
    }

    pub fn apply(&self, table: &InformationTable) -> Result<DecisionSystem> {
        let rows = table
            .conditions()
            .iter()
            .map(|r| self.condition_levels(r))
            .collect::<Result<Vec<_>>>()?;
        let decisions = table.decisions().iter().map(|&d| self.decision_level(d)).collect();
        DecisionSystem::new(
            table.attribute_names().to_vec(),
            table.decision_name(),
            rows,
            decisions,
        )
    }
}

fn fit_scale(name: &str, values: &[f64], levels: usize, config: &SomTrainingConfig) -> Result<AttributeScale> {
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < levels {
        warn!(
            "attribute `{name}` has {} distinct values for {levels} levels; levels merged",
            distinct.len()
        );
        return Ok(AttributeScale {
            name: name.to_owned(),
            prototypes: distinct,
            degenerate: true,
        });
    }
    let data: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    let model = train_som(&data, (1, levels), config)?;
    let mut prototypes: Vec<f64> = model.codebook.iter().map(|w| w[0]).collect();
    prototypes.sort_by(f64::total_cmp);
    let before = prototypes.len();
    prototypes.dedup();
    if prototypes.len() < before {
        warn!("attribute `{name}`: coincident prototypes merged");
    }
    Ok(AttributeScale {
        name: name.to_owned(),
        prototypes,
        degenerate: false,
    })
}

/// Fits a 1-D map with `levels` neurons to every condition attribute and to
/// the decision, each independently, and labels the table with the result.
///
/// Attribute `j` uses seed `config.seed + j`; the decision uses the next one.
pub fn discretize_attributes(
    table: &InformationTable,
    levels: usize,
    config: &SomTrainingConfig,
) -> Result<(DecisionSystem, DiscretizationScheme)> {
    if levels < 2 {
        return Err(invalid("discretization needs at least 2 levels"));
    }
    if table.is_empty() {
        return Err(Error::EmptyData);
    }
    let with_seed = |offset: usize| SomTrainingConfig {
        seed: config.seed.wrapping_add(offset as u64),
        ..config.clone()
    };
    let conditions = table
        .attribute_names()
        .iter()
        .enumerate()
        .map(|(j, name)| fit_scale(name, &table.column(j), levels, &with_seed(j)))
        .collect::<Result<Vec<_>>>()?;
    let decision = fit_scale(
        table.decision_name(),
        table.decisions(),
        levels,
        &with_seed(table.attribute_count()),
    )?;
    let scheme = DiscretizationScheme {
        conditions,
        decision,
        fitted_on: table.checksum(),
    };
    let system = scheme.apply(table)?;
    Ok((system, scheme))
}
