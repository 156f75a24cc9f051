//! Grid sweeps over hidden size, seed and learning rate.

use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{DataSet, TrainingData};
use super::trainer::{train, LossRecord};
use super::{ModelKind, TrainConfig};
use crate::eval::{score_model, score_ode};
use crate::nn::{param_count, MlpParams};
use crate::vehicle::HybridModel;
use crate::{Error, Result};

/// One sweep: every hidden size crossed with every seed, at a fixed step size.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub hiddens: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Model, learning rate, iteration count and shooting settings shared by
    /// all cells; `hidden` and `seed` are overwritten per cell.
    pub base: TrainConfig,
}

impl SweepSpec {
    pub fn cells(&self) -> Vec<TrainConfig> {
        let mut out = Vec::with_capacity(self.hiddens.len() * self.seeds.len());
        for &hidden in &self.hiddens {
            for &seed in &self.seeds {
                out.push(TrainConfig {
                    hidden,
                    seed,
                    ..self.base.clone()
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "message", rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed(String),
}

impl CellStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub model: ModelKind,
    pub hidden: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub param_count: usize,
    pub train_sse: f64,
    pub val_sse: f64,
    pub status: CellStatus,
    /// Trained weights; empty when the cell failed.
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub loss_history: Vec<LossRecord>,
}

impl SweepCell {
    pub fn net(&self) -> Result<MlpParams<f64>> {
        MlpParams::from_theta(self.model.dims(self.hidden), self.theta.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config_hash: String,
    pub ode_train_sse: f64,
    pub ode_val_sse: f64,
    pub cells: Vec<SweepCell>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn min_by<'a>(
    cells: impl Iterator<Item = &'a SweepCell>,
    key: impl Fn(&SweepCell) -> f64,
) -> Option<&'a SweepCell> {
    // first minimum wins, so ties resolve by grid order
    cells
        .filter(|c| c.status.is_ok() && key(c).is_finite())
        .fold(None, |best: Option<&SweepCell>, c| match best {
            Some(b) if key(b) <= key(c) => Some(b),
            _ => Some(c),
        })
}

impl SweepTable {
    pub fn ok_cells(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.status.is_ok())
    }

    pub fn best_by_validation(&self) -> Option<&SweepCell> {
        min_by(self.cells.iter(), |c| c.val_sse)
    }

    pub fn best_by_training(&self) -> Option<&SweepCell> {
        min_by(self.cells.iter(), |c| c.train_sse)
    }

    /// Best training SSE among cells with the given hidden size.
    pub fn best_training_for_hidden(&self, hidden: usize) -> Option<&SweepCell> {
        min_by(self.cells.iter().filter(|c| c.hidden == hidden), |c| {
            c.train_sse
        })
    }

    pub fn median_val_sse(&self) -> Option<f64> {
        median(self.ok_cells().map(|c| c.val_sse).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,hidden,seed,lr,param_count,train_sse,val_sse,status\n");
        for c in &self.cells {
            let status = match &c.status {
                CellStatus::Ok => "ok".to_string(),
                CellStatus::Failed(m) => format!("\"failed: {}\"", m.replace('"', "'")),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                c.model,
                c.hidden,
                c.seed,
                c.learning_rate,
                c.param_count,
                c.train_sse,
                c.val_sse,
                status
            );
        }
        s
    }
}

fn run_cell(cfg: &TrainConfig, data: &DataSet, train_data: &TrainingData<f64>) -> SweepCell {
    let dims = cfg.model.dims(cfg.hidden);
    let mut cell = SweepCell {
        model: cfg.model,
        hidden: cfg.hidden,
        seed: cfg.seed,
        learning_rate: cfg.learning_rate,
        param_count: param_count(dims),
        train_sse: f64::NAN,
        val_sse: f64::NAN,
        status: CellStatus::Ok,
        theta: Vec::new(),
        loss_history: Vec::new(),
    };
    let result = train(cfg, train_data).and_then(|out| {
        let model = HybridModel::new(cfg.model, &out.net, &data.scaler)?;
        let scores = score_model(&model, data)?;
        Ok((out, scores))
    });
    match result {
        Ok((out, scores)) => {
            cell.train_sse = scores.train_sse;
            cell.val_sse = scores.val_sse;
            cell.theta = out.net.into_theta();
            cell.loss_history = out.loss_history;
        }
        Err(e) => cell.status = CellStatus::Failed(e.to_string()),
    }
    cell
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool with {jobs} workers: {e}")))
}

/// Trains and scores every cell of `spec`. A failing cell is recorded as
/// such and does not abort the sweep. `jobs == 0` uses all cores. Cells
/// come back in grid order regardless of scheduling, and `on_cell` sees
/// each one as it finishes.
pub fn sweep(
    spec: &SweepSpec,
    data: &DataSet,
    jobs: usize,
    on_cell: impl Fn(&SweepCell) + Sync,
) -> Result<SweepTable> {
    let configs = spec.cells();
    for c in &configs {
        c.validate()?;
    }
    let ode = score_ode(data)?;
    let train_data = TrainingData::<f64>::from_dataset(data);
    let cells = pool(jobs)?.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                let cell = run_cell(cfg, data, &train_data);
                on_cell(&cell);
                cell
            })
            .collect::<Vec<_>>()
    });
    Ok(SweepTable {
        config_hash: data.config_hash.clone(),
        ode_train_sse: ode.train_sse,
        ode_val_sse: ode.val_sse,
        cells,
    })
}

/// Best and median errors of one learning rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrSweepRow {
    pub model: ModelKind,
    pub learning_rate: f64,
    pub best_train_sse: f64,
    pub best_val_sse: f64,
    pub median_val_sse: f64,
    pub n_ok: usize,
    pub n_cells: usize,
}

impl LrSweepRow {
    pub fn from_table(model: ModelKind, learning_rate: f64, table: &SweepTable) -> Self {
        Self {
            model,
            learning_rate,
            best_train_sse: table.best_by_training().map_or(f64::NAN, |c| c.train_sse),
            best_val_sse: table.best_by_validation().map_or(f64::NAN, |c| c.val_sse),
            median_val_sse: table.median_val_sse().unwrap_or(f64::NAN),
            n_ok: table.ok_cells().count(),
            n_cells: table.cells.len(),
        }
    }
}

/// Runs [`sweep`] once per learning rate.
pub fn sweep_learning_rates(
    spec: &SweepSpec,
    rates: &[f64],
    data: &DataSet,
    jobs: usize,
    on_cell: impl Fn(&SweepCell) + Sync,
) -> Result<(Vec<LrSweepRow>, Vec<SweepTable>)> {
    let mut rows = Vec::with_capacity(rates.len());
    let mut tables = Vec::with_capacity(rates.len());
    for &lr in rates {
        let mut s = spec.clone();
        s.base.learning_rate = lr;
        let table = sweep(&s, data, jobs, &on_cell)?;
        rows.push(LrSweepRow::from_table(spec.base.model, lr, &table));
        tables.push(table);
    }
    Ok((rows, tables))
}
