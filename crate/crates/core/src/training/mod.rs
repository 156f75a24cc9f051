//! Data preparation, multiple-shooting loss, ADAM and the training drivers.

mod adam;
mod data;
mod shooting;
mod sweep;
mod trainer;

pub use adam::{Adam, AdamConfig};
pub use data::{add_noise, initial_state, simulate_reference, DataSample, DataSet, TrainingData};
pub use shooting::{multiple_shooting_loss, segments, ShootingConfig, ShootingLoss};
pub use sweep::{
    sweep, sweep_learning_rates, CellStatus, LrSweepRow, SweepCell, SweepSpec, SweepTable,
};
pub use trainer::{train, LossRecord, TrainOutcome};

pub use crate::vehicle::ModelKind;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hidden-layer sizes explored by the sweep.
pub const HIDDEN_SIZES: [usize; 4] = [5, 8, 10, 12];
/// Initialization seeds explored by the sweep.
pub const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
/// Learning rates explored by the learning-rate sweep.
pub const LEARNING_RATES: [f64; 6] = [0.1, 0.075, 0.05, 0.025, 0.01, 0.001];

/// Default ADAM step size per model family.
pub fn default_learning_rate(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::Node => 0.05,
        ModelKind::Ude => 0.025,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub hidden: usize,
    pub learning_rate: f64,
    /// ADAM iterations per data sample.
    pub iterations: usize,
    pub seed: u64,
    pub shooting: ShootingConfig,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Ude,
            hidden: 10,
            learning_rate: default_learning_rate(ModelKind::Ude),
            iterations: 2000,
            seed: 1,
            shooting: ShootingConfig::default(),
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Config("hidden layer size must be positive".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        self.shooting.validate()?;
        self.adam.validate()
    }
}
