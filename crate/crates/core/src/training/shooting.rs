//! Multiple-shooting loss: the training window is cut into segments, each
//! rolled out from its own trainable initial state, with a continuity
//! penalty tying the end of one segment to the start of the next. All
//! errors are measured in z-space.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::ParametricDynamics;
use crate::error::check_len;
use crate::scaler::ZScoreScaler;
use crate::solver::{rollout, Rollout, TimeGrid, Trajectory};
use crate::vehicle::ExogenousInput;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootingConfig {
    /// Data points per segment.
    pub segment_len: usize,
    pub continuity_weight: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            segment_len: 80,
            continuity_weight: 1.0,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_len < 2 {
            return Err(Error::Config(format!(
                "segment length must be at least 2, got {}",
                self.segment_len
            )));
        }
        if !(self.continuity_weight >= 0.0) {
            return Err(Error::Config(
                "continuity weight must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Consecutive row ranges of length `segment_len` covering `0..n`; the last
/// one may be shorter.
pub fn segments(n: usize, segment_len: usize) -> Vec<Range<usize>> {
    (0..n)
        .step_by(segment_len.max(1))
        .map(|start| start..(start + segment_len).min(n))
        .collect()
}

#[derive(Clone, Debug)]
pub struct ShootingLoss<T> {
    pub loss: T,
    /// Data-fit part of `loss`.
    pub data_loss: T,
    /// Continuity part of `loss`, already weighted.
    pub continuity_loss: T,
    pub d_theta: Vec<T>,
    /// Gradient w.r.t. the shooting states, row-major per segment.
    pub d_shooting: Vec<T>,
    /// Largest z-space distance between a segment end and the next start.
    pub max_gap: T,
}

enum Segment<T> {
    /// Rolled out, reverse pass pending the continuity cotangent.
    Pending {
        data_loss: T,
        cot: Vec<T>,
        tape: Rollout<T>,
    },
    Done {
        data_loss: T,
        d_x0: Vec<T>,
        d_theta: Vec<T>,
    },
}

impl<T: Scalar> Segment<T> {
    fn data_loss(&self) -> T {
        match self {
            Segment::Pending { data_loss, .. } | Segment::Done { data_loss, .. } => *data_loss,
        }
    }
}

/// Loss and gradients for shooting states `shooting` (one row of
/// `model.dim()` per segment of `data`).
pub fn multiple_shooting_loss<T, M, F>(
    model: &M,
    shooting: &[T],
    data: &Trajectory<T>,
    cfg: &ShootingConfig,
    scaler: &ZScoreScaler<T>,
    inputs: &F,
    substeps: usize,
) -> Result<ShootingLoss<T>>
where
    T: Scalar,
    M: ParametricDynamics<T> + ?Sized,
    F: Fn(T) -> ExogenousInput<T> + Sync,
{
    cfg.validate()?;
    let dim = model.dim();
    let segs = segments(data.len(), cfg.segment_len);
    check_len("shooting states", segs.len() * dim, shooting.len())?;
    if data.len() < 2 {
        return Err(Error::GridMismatch(
            "training window needs at least two samples".into(),
        ));
    }
    let dt = data.times()[1] - data.times()[0];
    let inv_var: Vec<T> = scaler.stds()[..dim]
        .iter()
        .map(|&s| T::one() / (s * s))
        .collect();
    let two = T::lit(2.0);
    let n_seg = segs.len();

    let results: Vec<Segment<T>> = segs
        .par_iter()
        .enumerate()
        .map(|(k, range)| {
            let s_k = &shooting[k * dim..(k + 1) * dim];
            let last = k + 1 == n_seg;
            // Non-final segments run one extra interval to reach the junction.
            let n_intervals = if last { range.len() - 1 } else { range.len() };
            let fit_rows = range.len();
            if n_intervals == 0 {
                let mut d_x0 = vec![T::zero(); dim];
                let mut loss = T::zero();
                for c in 0..dim {
                    let e = s_k[c] - data.state(range.start)[c];
                    loss += e * e * inv_var[c];
                    d_x0[c] = two * e * inv_var[c];
                }
                return Ok(Segment::Done {
                    data_loss: loss,
                    d_x0,
                    d_theta: vec![T::zero(); model.n_params()],
                });
            }
            let grid =
                TimeGrid::with_intervals(data.times()[range.start], dt, n_intervals, substeps)?;
            let tape = rollout(model, s_k, &grid, inputs)
                .map_err(|e| e.context(format!("shooting segment {k}")))?;
            let pred = tape.trajectory();
            let mut cot = vec![T::zero(); grid.n_samples() * dim];
            let mut loss = T::zero();
            for i in 0..fit_rows {
                let p = pred.state(i);
                let d = data.state(range.start + i);
                for c in 0..dim {
                    let e = p[c] - d[c];
                    loss += e * e * inv_var[c];
                    cot[i * dim + c] = two * e * inv_var[c];
                }
            }
            if last {
                let (d_x0, d_theta) = tape.backward(model, &cot)?;
                Ok(Segment::Done {
                    data_loss: loss,
                    d_x0,
                    d_theta,
                })
            } else {
                Ok(Segment::Pending {
                    data_loss: loss,
                    cot,
                    tape,
                })
            }
        })
        .collect::<Result<_>>()?;

    let w = T::lit(cfg.continuity_weight);
    let mut continuity = T::zero();
    let mut max_gap = T::zero();
    let mut d_shooting = vec![T::zero(); shooting.len()];
    let mut junction_cot = vec![vec![T::zero(); dim]; n_seg];
    for k in 0..n_seg.saturating_sub(1) {
        let Segment::Pending { tape, .. } = &results[k] else {
            unreachable!("only the final segment completes early")
        };
        let end = tape.trajectory().state(tape.trajectory().len() - 1);
        let next = &shooting[(k + 1) * dim..(k + 2) * dim];
        let mut gap = T::zero();
        for c in 0..dim {
            let e = end[c] - next[c];
            gap += e * e * inv_var[c];
            let g = two * w * e * inv_var[c];
            junction_cot[k][c] = g;
            d_shooting[(k + 1) * dim + c] -= g;
        }
        continuity += w * gap;
        max_gap = max_gap.max(gap.sqrt());
    }

    let data_loss = results.iter().fold(T::zero(), |acc, r| acc + r.data_loss());
    let backward: Vec<(Vec<T>, Vec<T>)> = results
        .into_par_iter()
        .enumerate()
        .map(|(k, r)| match r {
            Segment::Pending { mut cot, tape, .. } => {
                let base = cot.len() - dim;
                for c in 0..dim {
                    cot[base + c] += junction_cot[k][c];
                }
                tape.backward(model, &cot)
                    .map_err(|e| e.context(format!("shooting segment {k}")))
            }
            Segment::Done { d_x0, d_theta, .. } => Ok((d_x0, d_theta)),
        })
        .collect::<Result<_>>()?;

    let mut d_theta = vec![T::zero(); model.n_params()];
    for (k, (d_x0, d_th)) in backward.iter().enumerate() {
        for c in 0..dim {
            d_shooting[k * dim + c] += d_x0[c];
        }
        for (a, &b) in d_theta.iter_mut().zip(d_th) {
            *a += b;
        }
    }
    let loss = data_loss + continuity;
    if !loss.is_finite() {
        return Err(Error::non_finite("multiple-shooting loss"));
    }
    Ok(ShootingLoss {
        loss,
        data_loss,
        continuity_loss: continuity,
        d_theta,
        d_shooting,
        max_gap,
    })
}
