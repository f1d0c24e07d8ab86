//! Two-stage information granulation.
//!
//! A self-organizing map first condenses the training objects into crisp
//! granules (codebook prototypes). A second stage then builds soft granules
//! on top of them, either a first-order Sugeno neuro-fuzzy system ([`nfis`])
//! or exact rough-set decision rules ([`rough`]). The close-open loop in
//! [`meta`] validates every candidate against held-out data and adjusts the
//! map size between iterations.

pub mod error;
pub mod meta;
pub mod metrics;
pub mod nfis;
pub mod rough;
pub mod som;
pub mod table;

mod rng;

pub use error::{Error, Result};
pub use meta::{
    next_neuron_count, run_sonfis, run_sorst, GrowthLawParams, GrowthMode, MetaConfig, RunTrace,
    SonfisOutcome, SorstOutcome, TraceRecord,
};
pub use metrics::{error_measure, rmse, PredictionRecord};
pub use nfis::FuzzyRuleBase;
pub use rough::{DecisionRule, DecisionSystem, RuleSet, StrengthFactor};
pub use som::{factor_neurons, DiscretizationScheme, SomModel, SomTrainingConfig};
pub use table::{InformationTable, SplitSpec, SyntheticConfig};
