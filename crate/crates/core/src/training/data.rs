//! Reference data: drift-model simulation, z-scaling and noise injection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Config;
use crate::scaler::{fit_scaler, ZScoreScaler};
use crate::solver::{simulate, SampleId, TimeGrid, Trajectory};
use crate::vehicle::{DriftModel, DriftState, SINGLE_TRACK_DIM};
use crate::{Error, Result, Scalar};

/// Initial drift-model state of a sample: only the speed is non-zero, and
/// the wheel speeds are either at rest or at free rolling.
pub fn initial_state(id: SampleId, model: &DriftModel<f64>, rolling_wheels: bool) -> [f64; 9] {
    let mut x = DriftState {
        v: id.initial_velocity(),
        ..Default::default()
    };
    if rolling_wheels {
        let (wf, wr) = model.rolling_wheel_speeds(&x);
        x.omega_f = wf;
        x.omega_r = wr;
    }
    x.to_array()
}

pub fn drift_model(cfg: &Config) -> DriftModel<f64> {
    DriftModel {
        params: cfg.vehicle,
        tires: cfg.tires,
        v_floor: cfg.solver.v_floor,
    }
}

/// Clean nine-state reference trajectory of one sample.
pub fn simulate_reference(id: SampleId, cfg: &Config) -> Result<Trajectory<f64>> {
    let model = drift_model(cfg);
    let x0 = initial_state(id, &model, cfg.data.rolling_wheels);
    let grid = TimeGrid::with_intervals(
        0.0,
        cfg.solver.dt_out,
        cfg.n_intervals(),
        cfg.solver.substeps,
    )?;
    simulate(&model, &x0, &grid, &|t| id.input(t))
        .map_err(|e| e.context(format!("reference sample {}", id.number())))
}

/// Adds `N(0, sigma)` noise to every state channel in z-space and maps back.
/// Inputs stay clean.
pub fn add_noise<T: Scalar>(
    traj: &Trajectory<T>,
    scaler: &ZScoreScaler<T>,
    sigma: f64,
    seed: u64,
) -> Result<Trajectory<T>> {
    if sigma == 0.0 {
        return Ok(traj.clone());
    }
    let normal =
        Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = traj.n_states().min(SINGLE_TRACK_DIM);
    Ok(traj.map_states(|_, row| {
        for (c, x) in row.iter_mut().take(n).enumerate() {
            let z = scaler.z(c, *x) + T::lit(normal.sample(&mut rng));
            *x = scaler.unz(c, z);
        }
    }))
}

#[derive(Clone, Debug)]
pub struct DataSample {
    pub id: SampleId,
    /// Nine-state drift-model output.
    pub clean: Trajectory<f64>,
    /// Seven-state projection with measurement noise.
    pub noisy: Trajectory<f64>,
    pub split_index: usize,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl DataSample {
    pub fn clean_single_track(&self) -> Trajectory<f64> {
        self.clean
            .project(SINGLE_TRACK_DIM)
            .expect("clean data has nine states")
    }
}

/// The three samples and the scaler fit on sample three.
#[derive(Clone, Debug)]
pub struct DataSet {
    pub samples: Vec<DataSample>,
    pub scaler: ZScoreScaler<f64>,
    pub config: Config,
    pub config_hash: String,
}

impl DataSet {
    pub fn generate(cfg: &Config) -> Result<Self> {
        cfg.validate()?;
        let clean: Vec<(SampleId, Trajectory<f64>)> = SampleId::ALL
            .iter()
            .map(|&id| Ok((id, simulate_reference(id, cfg)?)))
            .collect::<Result<_>>()?;
        let scaler = fit_scaler(&clean[2].1)?;
        let split_index = cfg.split_index();
        let samples = clean
            .into_iter()
            .map(|(id, clean)| {
                let rng_seed = u64::from(id.number()) + cfg.data.noise_seed_offset;
                let noisy = add_noise(
                    &clean.project(SINGLE_TRACK_DIM)?,
                    &scaler,
                    cfg.data.noise_sigma,
                    rng_seed,
                )?;
                Ok(DataSample {
                    id,
                    clean,
                    noisy,
                    split_index,
                    noise_sigma: cfg.data.noise_sigma,
                    rng_seed,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            samples,
            scaler,
            config: cfg.clone(),
            config_hash: cfg.data_hash(),
        })
    }

    pub fn sample(&self, id: SampleId) -> &DataSample {
        self.samples
            .iter()
            .find(|s| s.id == id)
            .expect("all three samples present")
    }

    pub fn split_index(&self) -> usize {
        self.config.split_index()
    }
}

/// Noisy training windows and scaler in the trainer's scalar type.
#[derive(Clone, Debug)]
pub struct TrainingData<T: Scalar> {
    pub scaler: ZScoreScaler<T>,
    /// Training windows in the order they are presented.
    pub windows: Vec<(SampleId, Trajectory<T>)>,
    pub substeps: usize,
}

impl<T: Scalar> TrainingData<T> {
    pub fn from_dataset(data: &DataSet) -> Self {
        let split = data.split_index();
        Self {
            scaler: data.scaler.cast(),
            windows: data
                .samples
                .iter()
                .map(|s| (s.id, s.noisy.slice(0..split).cast()))
                .collect(),
            substeps: data.config.solver.substeps,
        }
    }
}
