//! Sequential training over the three data samples.

use serde::{Deserialize, Serialize};

use super::data::TrainingData;
use super::shooting::{multiple_shooting_loss, segments};
use super::{Adam, TrainConfig};
use crate::dynamics::Dynamics;
use crate::nn::MlpParams;
use crate::vehicle::HybridModel;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub sample: u8,
    /// 1-based within the sample.
    pub iteration: usize,
    pub loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub net: MlpParams<T>,
    pub loss_history: Vec<LossRecord>,
}

impl<T> TrainOutcome<T> {
    /// Smallest recorded loss relative to the very first one.
    pub fn best_loss_ratio(&self) -> f64 {
        let first = self.loss_history.first().map_or(f64::NAN, |r| r.loss);
        let best = self
            .loss_history
            .iter()
            .map(|r| r.loss)
            .fold(f64::INFINITY, f64::min);
        best / first
    }
}

/// Trains a freshly seeded network on each training window in turn. The
/// network carries over between samples; shooting states and ADAM moments
/// are re-initialized from each new sample.
pub fn train<T: Scalar>(cfg: &TrainConfig, data: &TrainingData<T>) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let dims = cfg.model.dims(cfg.hidden);
    let mut net = MlpParams::<T>::init(dims, cfg.seed);
    let n_theta = net.theta().len();
    let lr = T::lit(cfg.learning_rate);
    let mut history = Vec::with_capacity(cfg.iterations * data.windows.len());

    for (id, window) in &data.windows {
        let dim = HybridModel::new(cfg.model, &net, &data.scaler)?.dim();
        let segs = segments(window.len(), cfg.shooting.segment_len);
        let mut params = net.theta().to_vec();
        for seg in &segs {
            params.extend_from_slice(window.state(seg.start));
        }
        let mut adam = Adam::new(params.len(), &cfg.adam);
        let mut grad = vec![T::zero(); params.len()];
        let inputs = |t: T| id.input(t);

        for it in 1..=cfg.iterations {
            net.theta_mut().copy_from_slice(&params[..n_theta]);
            let model = HybridModel::new(cfg.model, &net, &data.scaler)?;
            let context = || format!("sample {} iteration {it}", id.number());
            let loss = multiple_shooting_loss(
                &model,
                &params[n_theta..],
                window,
                &cfg.shooting,
                &data.scaler,
                &inputs,
                data.substeps,
            )
            .map_err(|e| e.context(context()))?;
            if !loss.loss.is_finite() {
                return Err(Error::non_finite(context()));
            }
            history.push(LossRecord {
                sample: id.number(),
                iteration: it,
                loss: loss.loss.as_f64(),
            });
            grad[..n_theta].copy_from_slice(&loss.d_theta);
            grad[n_theta..].copy_from_slice(&loss.d_shooting);
            adam.step(&mut params, &grad, lr);
            debug_assert_eq!(params.len() - n_theta, segs.len() * dim);
        }
        net.theta_mut().copy_from_slice(&params[..n_theta]);
        if !crate::scalar::all_finite(net.theta()) {
            return Err(Error::non_finite(format!(
                "network weights after sample {}",
                id.number()
            )));
        }
    }
    Ok(TrainOutcome {
        net,
        loss_history: history,
    })
}
