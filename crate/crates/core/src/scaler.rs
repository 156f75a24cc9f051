//! Per-channel z-score normalization over the seven single-track states and
//! the two exogenous inputs.

use serde::{Deserialize, Serialize};

use crate::error::check_len;
use crate::solver::Trajectory;
use crate::vehicle::{ExogenousInput, SINGLE_TRACK_DIM};
use crate::{Error, Result, Scalar};

pub const N_CHANNELS: usize = SINGLE_TRACK_DIM + 2;
pub const A_X_CHANNEL: usize = SINGLE_TRACK_DIM;
pub const V_DELTA_CHANNEL: usize = SINGLE_TRACK_DIM + 1;

/// Only obtainable from [`fit_scaler`] or validated parts, so a scaler in
/// hand is always usable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalerParts<T>", into = "ScalerParts<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ZScoreScaler<T: Scalar> {
    means: Vec<T>,
    stds: Vec<T>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ScalerParts<T> {
    means: Vec<T>,
    stds: Vec<T>,
}

impl<T: Scalar> TryFrom<ScalerParts<T>> for ZScoreScaler<T> {
    type Error = Error;

    fn try_from(p: ScalerParts<T>) -> Result<Self> {
        Self::from_parts(p.means, p.stds)
    }
}

impl<T: Scalar> From<ZScoreScaler<T>> for ScalerParts<T> {
    fn from(s: ZScoreScaler<T>) -> Self {
        Self {
            means: s.means,
            stds: s.stds,
        }
    }
}

/// Fits means and population standard deviations to the first seven state
/// columns and both inputs of `traj`.
pub fn fit_scaler<T: Scalar>(traj: &Trajectory<T>) -> Result<ZScoreScaler<T>> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "scaler needs at least 2 samples, got {n}"
        )));
    }
    if traj.n_states() < SINGLE_TRACK_DIM {
        return Err(Error::DimensionMismatch {
            what: "scaler fitting states",
            expected: SINGLE_TRACK_DIM,
            got: traj.n_states(),
        });
    }
    let nf = T::from_usize_exact(n);
    let mut means = vec![T::zero(); N_CHANNELS];
    let mut stds = vec![T::zero(); N_CHANNELS];
    for c in 0..N_CHANNELS {
        let value = |i: usize| channel_value(traj, i, c);
        let mean = (0..n).map(value).sum::<T>() / nf;
        let var = (0..n).map(|i| (value(i) - mean).powi(2)).sum::<T>() / nf;
        if !(var > T::zero()) {
            return Err(Error::ZeroVariance { channel: c });
        }
        means[c] = mean;
        stds[c] = var.sqrt();
    }
    Ok(ZScoreScaler { means, stds })
}

fn channel_value<T: Scalar>(traj: &Trajectory<T>, i: usize, c: usize) -> T {
    match c {
        A_X_CHANNEL => traj.inputs()[i].a_x,
        V_DELTA_CHANNEL => traj.inputs()[i].v_delta,
        _ => traj.state(i)[c],
    }
}

impl<T: Scalar> ZScoreScaler<T> {
    pub fn from_parts(means: Vec<T>, stds: Vec<T>) -> Result<Self> {
        check_len("scaler means", N_CHANNELS, means.len())?;
        check_len("scaler stds", N_CHANNELS, stds.len())?;
        if let Some(c) = stds.iter().position(|&s| !(s > T::zero() && s.is_finite())) {
            return Err(Error::ZeroVariance { channel: c });
        }
        if !crate::scalar::all_finite(&means) {
            return Err(Error::non_finite("scaler means"));
        }
        Ok(Self { means, stds })
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn stds(&self) -> &[T] {
        &self.stds
    }

    #[inline]
    pub fn z(&self, channel: usize, value: T) -> T {
        (value - self.means[channel]) / self.stds[channel]
    }

    #[inline]
    pub fn unz(&self, channel: usize, z: T) -> T {
        z * self.stds[channel] + self.means[channel]
    }

    /// Z-scores the 7 states followed by the 2 inputs.
    #[inline]
    pub fn transform_into(&self, x: &[T], u: &ExogenousInput<T>, out: &mut [T]) {
        for c in 0..SINGLE_TRACK_DIM {
            out[c] = self.z(c, x[c]);
        }
        out[A_X_CHANNEL] = self.z(A_X_CHANNEL, u.a_x);
        out[V_DELTA_CHANNEL] = self.z(V_DELTA_CHANNEL, u.v_delta);
    }

    pub fn transform_state(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .take(SINGLE_TRACK_DIM)
            .enumerate()
            .map(|(c, &v)| self.z(c, v))
            .collect()
    }

    pub fn inverse_transform_state(&self, z: &[T]) -> Vec<T> {
        z.iter()
            .take(SINGLE_TRACK_DIM)
            .enumerate()
            .map(|(c, &v)| self.unz(c, v))
            .collect()
    }

    pub fn cast<U: Scalar>(&self) -> ZScoreScaler<U> {
        ZScoreScaler {
            means: self.means.iter().map(|&m| U::lit(m.as_f64())).collect(),
            stds: self.stds.iter().map(|&s| U::lit(s.as_f64())).collect(),
        }
    }
}
