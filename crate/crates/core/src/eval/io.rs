//! On-disk formats: trajectory CSV, scaler / weight / metadata JSON.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value reads back bit-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::nn::{MlpDims, MlpParams};
use crate::scaler::ZScoreScaler;
use crate::solver::Trajectory;
use crate::vehicle::{
    ExogenousInput, ModelKind, TireCoefficients, VehicleParams, DRIFT_DIM, SINGLE_TRACK_DIM,
    STATE_NAMES,
};
use crate::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn format_err(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_owned(),
        message: message.to_string(),
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| format_err(path, e))?;
    write_atomic(path, text.as_bytes())
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| format_err(path, e))
}

/// CSV header for a trajectory with 7 or 9 states.
pub fn trajectory_header(n_states: usize) -> Vec<&'static str> {
    let mut h = vec!["t"];
    h.extend_from_slice(&STATE_NAMES[..n_states]);
    h.extend_from_slice(&["a_x", "v_delta"]);
    h
}

pub fn trajectory_to_csv(traj: &Trajectory<f64>) -> Result<Vec<u8>> {
    if traj.n_states() != SINGLE_TRACK_DIM && traj.n_states() != DRIFT_DIM {
        return Err(Error::DimensionMismatch {
            what: "CSV trajectory states",
            expected: SINGLE_TRACK_DIM,
            got: traj.n_states(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    };
    w.write_record(trajectory_header(traj.n_states()))
        .map_err(csv_err)?;
    for i in 0..traj.len() {
        let u = traj.inputs()[i];
        let mut row = vec![traj.times()[i].to_string()];
        row.extend(traj.state(i).iter().map(|x| x.to_string()));
        row.push(u.a_x.to_string());
        row.push(u.v_delta.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    })
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory<f64>) -> Result<()> {
    write_atomic(path, &trajectory_to_csv(traj)?)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format_err(path, e))?;
    let header = r.headers().map_err(|e| format_err(path, e))?.clone();
    let n_states = header
        .len()
        .checked_sub(3)
        .ok_or_else(|| format_err(path, "too few columns"))?;
    let expected = trajectory_header(n_states.min(DRIFT_DIM));
    if (n_states != SINGLE_TRACK_DIM && n_states != DRIFT_DIM)
        || header.iter().ne(expected.iter().copied())
    {
        return Err(format_err(path, format!("unexpected header {header:?}")));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut inputs = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format_err(path, format!("row {}: {e}", line + 2)))?;
        times.push(vals[0]);
        states.extend_from_slice(&vals[1..1 + n_states]);
        inputs.push(ExogenousInput::new(vals[1 + n_states], vals[2 + n_states]));
    }
    Trajectory::new(times, n_states, states, inputs).map_err(|e| format_err(path, e))
}

/// Network weights plus what is needed to rebuild the model around them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub model: ModelKind,
    pub dims: MlpDims,
    pub seed: u64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub config_hash: String,
    pub theta: Vec<f64>,
}

impl WeightFile {
    pub fn net(&self) -> Result<MlpParams<f64>> {
        if self.model.dims(self.dims.n_hidden) != self.dims {
            return Err(Error::Config(format!(
                "dims {:?} do not fit a {} network",
                self.dims, self.model
            )));
        }
        MlpParams::from_theta(self.dims, self.theta.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerFile {
    pub config_hash: String,
    pub scaler: ZScoreScaler<f64>,
}

/// Sidecar describing how a data sample was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub sample: u8,
    pub config_hash: String,
    pub vehicle: VehicleParams<f64>,
    pub tires: TireCoefficients<f64>,
    pub substeps: usize,
    pub noise_sigma: f64,
    pub rng_seed: u64,
    pub split_index: usize,
    pub rolling_wheels: bool,
}

/// Refuses to pair weights with a scaler generated under another config.
pub fn check_pair(weights: &WeightFile, scaler: &ScalerFile) -> Result<()> {
    if weights.config_hash != scaler.config_hash {
        return Err(Error::Config(format!(
            "weights were trained with config {} but the scaler belongs to config {}",
            weights.config_hash, scaler.config_hash
        )));
    }
    Ok(())
}
