//! Close-open iteration engines.
//!
//! Every iteration condenses the training table with a 2-D SOM (closed
//! world), builds the second-stage granules on the condensed prototypes,
//! and scores the result on the untouched test table (open world). The map
//! size for the next iteration comes either from a seeded random draw or from
//! the linear growth law `N' = α·N + β·E + γ`.

use std::fmt::Write as _;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrics::{error_measure, rmse, PredictionRecord};
use crate::nfis::{initialize_fis, train_fis, FuzzyRuleBase};
use crate::rng::seeded;
use crate::rough::{classify, extract_exact_rules, RuleSet, StrengthFactor, StrengthSchedule};
use crate::som::{discretize_attributes, factor_neurons, granulate_objects, DiscretizationScheme, SomTrainingConfig};
use crate::table::InformationTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthLawParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for GrowthLawParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 10.0,
            gamma: 1.0,
        }
    }
}

impl GrowthLawParams {
    pub fn validate(&self) -> Result<()> {
        if [self.alpha, self.beta, self.gamma].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(invalid("growth-law coefficients must be finite"))
        }
    }
}

/// `round(α·N + β·E + γ)` clamped into `bounds`.
pub fn next_neuron_count(params: &GrowthLawParams, neurons: usize, error: f64, bounds: (usize, usize)) -> usize {
    let raw = (params.alpha * neurons as f64 + params.beta * error + params.gamma).round();
    if raw.is_nan() {
        return bounds.0;
    }
    raw.clamp(bounds.0 as f64, bounds.1 as f64) as usize
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMode {
    /// Seeded uniform draw of the neuron count from the allowed range.
    #[default]
    Random,
    /// Growth law driven by the previous iteration's test error.
    Adaptive,
}

fn default_iterations() -> usize {
    10
}
fn default_max_rules() -> usize {
    4
}
fn default_neuron_range() -> (usize, usize) {
    (4, 64)
}
fn default_levels() -> usize {
    3
}
fn default_som_epochs() -> usize {
    50
}
fn default_som_learning_rate() -> f64 {
    0.5
}
fn default_nfis_epochs() -> usize {
    50
}
fn default_nfis_learning_rate() -> f64 {
    0.01
}
fn default_strength_step() -> f64 {
    0.05
}
fn default_fallback() -> u32 {
    4
}

/// Controls for one close-open run. Only `seed` is required in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaConfig {
    #[serde(default)]
    pub mode: GrowthMode,
    /// Iterations for SONFIS, random map selections for SORST.
    #[serde(default = "default_iterations")]
    pub close_open_iterations: usize,
    #[serde(default = "default_max_rules")]
    pub max_rules: usize,
    #[serde(default = "default_neuron_range")]
    pub neuron_range: (usize, usize),
    /// SONFIS stops once the test RMSE is at or below this level; 0 disables.
    #[serde(default)]
    pub error_level: f64,
    #[serde(default = "default_levels")]
    pub discretization_levels: usize,
    pub seed: u64,
    #[serde(default = "default_som_epochs")]
    pub som_epochs: usize,
    #[serde(default = "default_som_learning_rate")]
    pub som_learning_rate: f64,
    #[serde(default = "default_nfis_epochs")]
    pub nfis_epochs: usize,
    #[serde(default = "default_nfis_learning_rate")]
    pub nfis_learning_rate: f64,
    #[serde(default = "default_strength_step")]
    pub strength_step: f64,
    /// Label given to test objects no rule recognizes.
    #[serde(default = "default_fallback")]
    pub fallback_level: u32,
}

impl MetaConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            mode: GrowthMode::Random,
            close_open_iterations: default_iterations(),
            max_rules: default_max_rules(),
            neuron_range: default_neuron_range(),
            error_level: 0.0,
            discretization_levels: default_levels(),
            seed,
            som_epochs: default_som_epochs(),
            som_learning_rate: default_som_learning_rate(),
            nfis_epochs: default_nfis_epochs(),
            nfis_learning_rate: default_nfis_learning_rate(),
            strength_step: default_strength_step(),
            fallback_level: default_fallback(),
        }
    }

    /// Random neuron growth, 10 close-open iterations, at most 4 rules.
    pub fn sonfis_r(seed: u64) -> Self {
        Self::new(seed)
    }

    /// 7 random map selections, 3 symbolic levels per attribute.
    pub fn sorst_r(seed: u64) -> Self {
        Self {
            close_open_iterations: 7,
            ..Self::new(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.neuron_range;
        if lo < 2 || lo > hi {
            return Err(invalid(format!("neuron_range ({lo}, {hi}) must satisfy 2 <= min <= max")));
        }
        if self.close_open_iterations == 0 {
            return Err(invalid("close_open_iterations must be at least 1"));
        }
        if self.max_rules == 0 {
            return Err(invalid("max_rules must be at least 1"));
        }
        if !(self.error_level >= 0.0) {
            return Err(invalid("error_level must be nonnegative"));
        }
        if self.discretization_levels < 2 {
            return Err(invalid("discretization_levels must be at least 2"));
        }
        if self.fallback_level == 0 {
            return Err(invalid("fallback_level must be a positive level"));
        }
        if !(self.strength_step > 0.0) {
            return Err(invalid("strength_step must be positive"));
        }
        self.som_config(0).validate()?;
        if self.nfis_epochs == 0 || !(self.nfis_learning_rate > 0.0) {
            return Err(invalid("NFIS epochs and learning rate must be positive"));
        }
        Ok(())
    }

    fn som_config(&self, seed: u64) -> SomTrainingConfig {
        SomTrainingConfig::new(self.som_epochs, self.som_learning_rate, seed)
    }
}

/// One row of a run trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// 1-based.
    pub iteration: usize,
    pub neurons: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub reduced_objects: usize,
    pub rules: usize,
    /// Strength factor the rules were extracted at (SORST only).
    pub strength: Option<f64>,
    /// Test objects matched by some rule (SORST only).
    pub recognized: Option<usize>,
    /// Test RMSE (SONFIS) or EM (SORST).
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    /// Iteration number of the first record with minimum error.
    pub best_iteration: usize,
}

impl RunTrace {
    fn from_records(records: Vec<TraceRecord>) -> Self {
        let best_iteration = records
            .iter()
            .fold(None::<&TraceRecord>, |best, r| match best {
                Some(b) if b.error <= r.error => Some(b),
                _ => Some(r),
            })
            .map_or(0, |r| r.iteration);
        Self {
            records,
            best_iteration,
        }
    }

    pub fn best(&self) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.iteration == self.best_iteration)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("iteration,neurons,grid_rows,grid_cols,reduced_objects,rules,strength,recognized,error\n");
        for r in &self.records {
            let strength = r.strength.map(|s| s.to_string()).unwrap_or_default();
            let recognized = r.recognized.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{strength},{recognized},{}",
                r.iteration, r.neurons, r.grid_rows, r.grid_cols, r.reduced_objects, r.rules, r.error
            );
        }
        out
    }
}

/// What a run exposes to an observer after each iteration.
pub struct IterationView<'a> {
    pub record: &'a TraceRecord,
    pub reduced: &'a InformationTable,
    pub scheme: Option<&'a DiscretizationScheme>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SonfisOutcome {
    pub rule_base: FuzzyRuleBase,
    pub trace: RunTrace,
    /// Test predictions of the best iteration, in test-table order.
    pub predictions: Vec<PredictionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SorstOutcome {
    pub rules: RuleSet,
    pub scheme: DiscretizationScheme,
    pub trace: RunTrace,
    /// Test decision levels and classifications of the best selection.
    pub predictions: Vec<PredictionRecord>,
}

/// Per-iteration seeds drawn from the run seed, in iteration order, so that
/// iteration `t` sees the same randomness however many iterations follow.
struct IterationSeeds {
    neuron_draw: u64,
    som: u64,
    second_stage: u64,
}

fn iteration_seeds(master: &mut impl RngCore) -> IterationSeeds {
    IterationSeeds {
        neuron_draw: master.next_u64(),
        som: master.next_u64(),
        second_stage: master.next_u64(),
    }
}

fn check_inputs(train: &InformationTable, test: &InformationTable) -> Result<()> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyData);
    }
    if train.attribute_count() != test.attribute_count() {
        return Err(Error::DimensionMismatch {
            expected: train.attribute_count(),
            found: test.attribute_count(),
        });
    }
    Ok(())
}

fn distinct_condition_rows(table: &InformationTable) -> usize {
    let mut seen: Vec<&Vec<f64>> = Vec::new();
    for row in table.conditions() {
        if !seen.contains(&row) {
            seen.push(row);
        }
    }
    seen.len()
}

pub fn run_sonfis(
    train: &InformationTable,
    test: &InformationTable,
    config: &MetaConfig,
    growth: &GrowthLawParams,
) -> Result<SonfisOutcome> {
    run_sonfis_with(train, test, config, growth, |_| {})
}

pub fn run_sonfis_with(
    train: &InformationTable,
    test: &InformationTable,
    config: &MetaConfig,
    growth: &GrowthLawParams,
    mut observe: impl FnMut(&IterationView<'_>),
) -> Result<SonfisOutcome> {
    config.validate()?;
    growth.validate()?;
    check_inputs(train, test)?;

    let mut master = seeded(config.seed);
    let mut records = Vec::new();
    let mut best: Option<(f64, FuzzyRuleBase, Vec<PredictionRecord>)> = None;
    let mut previous: Option<(usize, f64)> = None;

    for t in 0..config.close_open_iterations {
        let seeds = iteration_seeds(&mut master);
        let neurons = match (config.mode, previous) {
            (GrowthMode::Random, _) => {
                seeded(seeds.neuron_draw).random_range(config.neuron_range.0..=config.neuron_range.1)
            }
            (GrowthMode::Adaptive, None) => config.neuron_range.0,
            (GrowthMode::Adaptive, Some((n, e))) => next_neuron_count(growth, n, e, config.neuron_range),
        };
        let (grid_rows, grid_cols) = factor_neurons(neurons);

        let (reduced, _) = granulate_objects(train, neurons, &config.som_config(seeds.som))?;
        let rule_count = config.max_rules.min(distinct_condition_rows(&reduced));
        let base = initialize_fis(&reduced, rule_count, seeds.second_stage)?;
        let (base, _) = train_fis(&base, &reduced, config.nfis_epochs, config.nfis_learning_rate)?;

        let predictions = test
            .conditions()
            .iter()
            .zip(test.decisions())
            .map(|(x, &d)| Ok(PredictionRecord::regression(d, base.evaluate(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let error = rmse(&predictions)?;

        let record = TraceRecord {
            iteration: t + 1,
            neurons,
            grid_rows,
            grid_cols,
            reduced_objects: reduced.len(),
            rules: base.rule_count(),
            strength: None,
            recognized: None,
            error,
        };
        observe(&IterationView {
            record: &record,
            reduced: &reduced,
            scheme: None,
        });
        log::info!(
            "sonfis iteration {}: N={neurons} reduced={} rmse={error}",
            t + 1,
            reduced.len()
        );
        records.push(record);

        if best.as_ref().map_or(true, |(e, _, _)| error < *e) {
            best = Some((error, base, predictions));
        }
        previous = Some((neurons, error));
        if config.error_level > 0.0 && error <= config.error_level {
            break;
        }
    }

    let (_, rule_base, predictions) = best.expect("at least one iteration runs");
    Ok(SonfisOutcome {
        rule_base,
        trace: RunTrace::from_records(records),
        predictions,
    })
}

pub fn run_sorst(
    train: &InformationTable,
    test: &InformationTable,
    config: &MetaConfig,
    initial_strength: StrengthFactor,
) -> Result<SorstOutcome> {
    run_sorst_with(train, test, config, initial_strength, |_| {})
}

/// Random map selections with an adaptive strength factor. Discretization
/// scales are fitted on each selection's reduced table and only applied to
/// the test table.
pub fn run_sorst_with(
    train: &InformationTable,
    test: &InformationTable,
    config: &MetaConfig,
    initial_strength: StrengthFactor,
    mut observe: impl FnMut(&IterationView<'_>),
) -> Result<SorstOutcome> {
    config.validate()?;
    check_inputs(train, test)?;

    let mut master = seeded(config.seed);
    let mut schedule = StrengthSchedule::new(initial_strength, config.strength_step)?;
    let mut records = Vec::new();
    let mut best: Option<(f64, RuleSet, DiscretizationScheme, Vec<PredictionRecord>)> = None;
    let mut previous_em: Option<f64> = None;

    for t in 0..config.close_open_iterations {
        let seeds = iteration_seeds(&mut master);
        let neurons = seeded(seeds.neuron_draw).random_range(config.neuron_range.0..=config.neuron_range.1);
        let (grid_rows, grid_cols) = factor_neurons(neurons);

        let (reduced, _) = granulate_objects(train, neurons, &config.som_config(seeds.som))?;
        let (system, scheme) = discretize_attributes(
            &reduced,
            config.discretization_levels,
            &config.som_config(seeds.second_stage),
        )?;
        let strength = schedule.current();
        let rules = extract_exact_rules(&system, strength);

        let predictions = test
            .conditions()
            .iter()
            .zip(test.decisions())
            .map(|(x, &d)| {
                let levels = scheme.condition_levels(x)?;
                let c = classify(&rules, &levels, config.fallback_level);
                Ok(PredictionRecord {
                    actual: f64::from(scheme.decision_level(d)),
                    predicted: f64::from(c.level),
                    recognized: c.recognized,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let em = error_measure(&predictions)?;

        let record = TraceRecord {
            iteration: t + 1,
            neurons,
            grid_rows,
            grid_cols,
            reduced_objects: reduced.len(),
            rules: rules.len(),
            strength: Some(strength.threshold()),
            recognized: Some(predictions.iter().filter(|p| p.recognized).count()),
            error: em,
        };
        observe(&IterationView {
            record: &record,
            reduced: &reduced,
            scheme: Some(&scheme),
        });
        log::info!(
            "sorst selection {}: N={neurons} reduced={} rules={} strength={} em={em}",
            t + 1,
            reduced.len(),
            rules.len(),
            strength.threshold()
        );
        records.push(record);

        if best.as_ref().map_or(true, |(e, ..)| em < *e) {
            best = Some((em, RuleSet::new(&system, rules), scheme, predictions));
        }
        if let Some(prev) = previous_em {
            schedule.update(em, prev);
        }
        previous_em = Some(em);
    }

    let (_, rules, scheme, predictions) = best.expect("at least one selection runs");
    Ok(SorstOutcome {
        rules,
        scheme,
        trace: RunTrace::from_records(records),
        predictions,
    })
}
