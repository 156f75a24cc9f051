use serde::{Deserialize, Serialize};

use crate::dynamics::Dynamics;
use crate::nn::MlpParams;
use crate::scaler::ZScoreScaler;
use crate::solver::{simulate, SampleId, TimeGrid, Trajectory};
use crate::training::DataSet;
use crate::vehicle::{HybridModel, ModelKind, SingleTrackModel, SINGLE_TRACK_DIM};
use crate::{Error, Result};

fn check_grids(reference: &Trajectory<f64>, estimate: &Trajectory<f64>) -> Result<()> {
    if reference.len() != estimate.len() {
        return Err(Error::GridMismatch(format!(
            "{} reference samples vs {} estimated",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.n_states() < SINGLE_TRACK_DIM || estimate.n_states() < SINGLE_TRACK_DIM {
        return Err(Error::DimensionMismatch {
            what: "compared states",
            expected: SINGLE_TRACK_DIM,
            got: reference.n_states().min(estimate.n_states()),
        });
    }
    let worst = reference
        .times()
        .iter()
        .zip(estimate.times())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if worst > 1e-9 {
        return Err(Error::GridMismatch(format!(
            "sample times differ by up to {worst:e} s"
        )));
    }
    Ok(())
}

/// Per-state sum of squared z-space errors over the first seven states.
pub fn sse_z_per_state(
    reference: &Trajectory<f64>,
    estimate: &Trajectory<f64>,
    scaler: &ZScoreScaler<f64>,
) -> Result<[f64; SINGLE_TRACK_DIM]> {
    check_grids(reference, estimate)?;
    let mut out = [0.0; SINGLE_TRACK_DIM];
    for i in 0..reference.len() {
        let (r, e) = (reference.state(i), estimate.state(i));
        for c in 0..SINGLE_TRACK_DIM {
            let d = (r[c] - e[c]) / scaler.stds()[c];
            out[c] += d * d;
        }
    }
    Ok(out)
}

pub fn sse_z(
    reference: &Trajectory<f64>,
    estimate: &Trajectory<f64>,
    scaler: &ZScoreScaler<f64>,
) -> Result<f64> {
    Ok(sse_z_per_state(reference, estimate, scaler)?.iter().sum())
}

/// `100·(1 − sse/sse_ode)`.
pub fn improvement_percent(sse: f64, sse_ode: f64) -> f64 {
    100.0 * (1.0 - sse / sse_ode)
}

/// Errors of one model on the evaluation sample.
#[derive(Clone, Debug)]
pub struct ModelScores {
    pub train_sse: f64,
    pub val_sse: f64,
    pub train_per_state: [f64; SINGLE_TRACK_DIM],
    pub val_per_state: [f64; SINGLE_TRACK_DIM],
    /// Training rollout followed by the validation rollout.
    pub estimate: Trajectory<f64>,
}

/// Free rollout from the clean state at `t = 0` over the training window and
/// from the clean state at the split over the validation window, both on
/// sample three and compared with the clean reference.
pub fn score_model<D: Dynamics<f64> + ?Sized>(model: &D, data: &DataSet) -> Result<ModelScores> {
    let sample = data.sample(SampleId::Three);
    let reference = sample.clean_single_track();
    let split = data.split_index();
    let solver = &data.config.solver;
    let inputs = |t: f64| SampleId::Three.input(t);

    let train_ref = reference.slice(0..split);
    let grid = TimeGrid::with_intervals(0.0, solver.dt_out, split - 1, solver.substeps)?;
    let train_est = simulate(model, train_ref.state(0), &grid, &inputs)
        .map_err(|e| e.context("training-window rollout"))?;

    let val_ref = reference.slice(split..reference.len());
    let grid = TimeGrid::with_intervals(
        val_ref.times()[0],
        solver.dt_out,
        val_ref.len() - 1,
        solver.substeps,
    )?;
    let val_est = simulate(model, val_ref.state(0), &grid, &inputs)
        .map_err(|e| e.context("validation-window rollout"))?;

    let train_per_state = sse_z_per_state(&train_ref, &train_est, &data.scaler)?;
    let val_per_state = sse_z_per_state(&val_ref, &val_est, &data.scaler)?;

    let mut times = train_est.times().to_vec();
    times.extend_from_slice(val_est.times());
    let mut states = train_est.states_flat().to_vec();
    states.extend_from_slice(val_est.states_flat());
    let mut inputs_rec = train_est.inputs().to_vec();
    inputs_rec.extend_from_slice(val_est.inputs());

    Ok(ModelScores {
        train_sse: train_per_state.iter().sum(),
        val_sse: val_per_state.iter().sum(),
        train_per_state,
        val_per_state,
        estimate: Trajectory::new(times, SINGLE_TRACK_DIM, states, inputs_rec)?,
    })
}

/// Scores of the linear single-track benchmark.
pub fn score_ode(data: &DataSet) -> Result<ModelScores> {
    let model = SingleTrackModel {
        params: data.config.vehicle,
        v_floor: data.config.solver.v_floor,
    };
    score_model(&model, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl From<&Trajectory<f64>> for TrajectoryRecord {
    fn from(t: &Trajectory<f64>) -> Self {
        Self {
            times: t.times().to_vec(),
            states: (0..t.len()).map(|i| t.state(i).to_vec()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub config_hash: String,
    pub train_sse: f64,
    pub val_sse: f64,
    pub ode_train_sse: f64,
    pub ode_val_sse: f64,
    /// Training-window SSE reduction relative to the ODE model, in percent.
    pub improvement_vs_ode: f64,
    pub per_state_train: Vec<f64>,
    pub per_state_val: Vec<f64>,
    pub split_time: f64,
    pub reference: TrajectoryRecord,
    pub estimate: TrajectoryRecord,
}

impl EvalReport {
    pub fn from_scores(
        label: impl Into<String>,
        scores: &ModelScores,
        ode: &ModelScores,
        data: &DataSet,
    ) -> Self {
        let reference = data.sample(SampleId::Three).clean_single_track();
        Self {
            label: label.into(),
            config_hash: data.config_hash.clone(),
            train_sse: scores.train_sse,
            val_sse: scores.val_sse,
            ode_train_sse: ode.train_sse,
            ode_val_sse: ode.val_sse,
            improvement_vs_ode: improvement_percent(scores.train_sse, ode.train_sse),
            per_state_train: scores.train_per_state.to_vec(),
            per_state_val: scores.val_per_state.to_vec(),
            split_time: data.config.data.split_time,
            reference: (&reference).into(),
            estimate: (&scores.estimate).into(),
        }
    }
}

/// Full report for a trained network.
pub fn evaluate(kind: ModelKind, net: &MlpParams<f64>, data: &DataSet) -> Result<EvalReport> {
    let model = HybridModel::new(kind, net, &data.scaler)?;
    let scores = score_model(&model, data)?;
    let ode = score_ode(data)?;
    let label = format!("{kind} h={}", net.dims().n_hidden);
    Ok(EvalReport::from_scores(label, &scores, &ode, data))
}
