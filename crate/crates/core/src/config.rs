//! Experiment configuration, read from TOML. Every field has a default, so an
//! empty file (or none at all) reproduces the reference setup.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::training::TrainConfig;
use crate::vehicle::{TireCoefficients, VehicleParams, DEFAULT_V_FLOOR};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// RK4 steps per output interval.
    pub substeps: usize,
    pub v_floor: f64,
    /// Output sample interval in s.
    pub dt_out: f64,
    /// Length of every generated data sample in s.
    pub duration: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            substeps: 10,
            v_floor: DEFAULT_V_FLOOR,
            dt_out: 0.1,
            duration: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Noise standard deviation in z-space.
    pub noise_sigma: f64,
    /// Boundary between training and validation windows in s.
    pub split_time: f64,
    /// Start the wheels at their free-rolling speed instead of at rest.
    pub rolling_wheels: bool,
    /// Added to the sample number to form the noise seed.
    pub noise_seed_offset: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.025,
            split_time: 70.0,
            rolling_wheels: true,
            noise_seed_offset: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub solver: SolverConfig,
    pub vehicle: VehicleParams<f64>,
    pub tires: TireCoefficients<f64>,
    pub data: DataConfig,
    pub train: TrainConfig,
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.tires.validate()?;
        self.train.validate()?;
        let s = &self.solver;
        if s.substeps == 0 || !(s.v_floor > 0.0) || !(s.dt_out > 0.0) || !(s.duration > s.dt_out) {
            return Err(Error::Config(format!("invalid solver settings {s:?}")));
        }
        let d = &self.data;
        if !(d.noise_sigma >= 0.0) || !(d.split_time > 0.0 && d.split_time < s.duration) {
            return Err(Error::Config(format!("invalid data settings {d:?}")));
        }
        Ok(())
    }

    /// Number of output intervals per data sample.
    pub fn n_intervals(&self) -> usize {
        (self.solver.duration / self.solver.dt_out).round() as usize
    }

    /// Row index of the first validation sample.
    pub fn split_index(&self) -> usize {
        (self.data.split_time / self.solver.dt_out).round() as usize
    }

    /// Digest of everything that determines the generated data and scaler.
    /// Training hyperparameters are excluded so that every trained model on
    /// the same data shares one hash.
    pub fn data_hash(&self) -> String {
        let canonical =
            serde_json::to_string(&(&self.solver, &self.vehicle, &self.tires, &self.data))
                .expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }
}
