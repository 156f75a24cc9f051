//! Fixed-step RK4 integration over uniform output grids, plus reverse-mode
//! and adjoint sensitivities of rollouts.

mod inputs;
mod rk4;
mod sensitivity;

pub use inputs::{input_signal, SampleId};
pub use rk4::{rk4_step, simulate};
pub use sensitivity::{
    adjoint_gradient, rollout, rollout_with_gradient, AdjointResult, Rollout, RolloutGradient,
};

use crate::error::check_len;
use crate::vehicle::ExogenousInput;
use crate::{Error, Result, Scalar};

/// Output grid `t0, t0 + dt_out, …, t0 + n·dt_out` with `substeps` RK4 steps
/// per output interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    t0: T,
    dt_out: T,
    n_intervals: usize,
    substeps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    /// `t1 − t0` must be a whole number of output intervals (to 1e-9 relative).
    pub fn new(t0: T, t1: T, dt_out: T, substeps: usize) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::Config(format!(
                "time grid needs t1 > t0 (t0 = {t0}, t1 = {t1})"
            )));
        }
        if !(dt_out > T::zero()) {
            return Err(Error::Config(format!(
                "output interval must be positive, got {dt_out}"
            )));
        }
        let ratio = ((t1 - t0) / dt_out).as_f64();
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "span {} is not a multiple of dt_out {dt_out}",
                t1 - t0
            )));
        }
        Self::with_intervals(t0, dt_out, n as usize, substeps)
    }

    pub fn with_intervals(t0: T, dt_out: T, n_intervals: usize, substeps: usize) -> Result<Self> {
        if n_intervals == 0 {
            return Err(Error::Config(
                "time grid needs at least one interval".into(),
            ));
        }
        if substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        if !(dt_out > T::zero()) {
            return Err(Error::Config(format!(
                "output interval must be positive, got {dt_out}"
            )));
        }
        Ok(Self {
            t0,
            dt_out,
            n_intervals,
            substeps,
        })
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn t1(&self) -> T {
        self.time(self.n_intervals)
    }

    pub fn dt_out(&self) -> T {
        self.dt_out
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn n_samples(&self) -> usize {
        self.n_intervals + 1
    }

    /// Internal RK4 step size.
    pub fn step(&self) -> T {
        self.dt_out / T::from_usize_exact(self.substeps)
    }

    #[inline]
    pub fn time(&self, i: usize) -> T {
        self.t0 + T::from_usize_exact(i) * self.dt_out
    }

    /// Start time of internal step `s` of output interval `i`.
    #[inline]
    pub(crate) fn step_time(&self, i: usize, s: usize) -> T {
        self.time(i) + T::from_usize_exact(s) * self.step()
    }
}

/// Sampled states and inputs on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<T>,
    n_states: usize,
    states: Vec<T>,
    inputs: Vec<ExogenousInput<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// `states` is row-major, `times.len() × n_states`.
    pub fn new(
        times: Vec<T>,
        n_states: usize,
        states: Vec<T>,
        inputs: Vec<ExogenousInput<T>>,
    ) -> Result<Self> {
        check_len("trajectory states", times.len() * n_states, states.len())?;
        check_len("trajectory inputs", times.len(), inputs.len())?;
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            times,
            n_states,
            states,
            inputs,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn inputs(&self) -> &[ExogenousInput<T>] {
        &self.inputs
    }

    pub fn states_flat(&self) -> &[T] {
        &self.states
    }

    #[inline]
    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.n_states..(i + 1) * self.n_states]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.len()).map(|i| self.state(i)[c]).collect()
    }

    /// Rows `range` as a new trajectory.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Trajectory<T> {
        Trajectory {
            times: self.times[range.clone()].to_vec(),
            n_states: self.n_states,
            states: self.states[range.start * self.n_states..range.end * self.n_states].to_vec(),
            inputs: self.inputs[range].to_vec(),
        }
    }

    /// Keeps only the first `n` state components.
    pub fn project(&self, n: usize) -> Result<Trajectory<T>> {
        if n > self.n_states {
            return Err(Error::DimensionMismatch {
                what: "projected states",
                expected: self.n_states,
                got: n,
            });
        }
        let states = (0..self.len())
            .flat_map(|i| self.state(i)[..n].iter().copied())
            .collect();
        Ok(Trajectory {
            times: self.times.clone(),
            n_states: n,
            states,
            inputs: self.inputs.clone(),
        })
    }

    pub fn map_states(&self, mut f: impl FnMut(usize, &mut [T])) -> Trajectory<T> {
        let mut out = self.clone();
        for i in 0..out.len() {
            let n = out.n_states;
            f(i, &mut out.states[i * n..(i + 1) * n]);
        }
        out
    }

    /// Largest deviation of consecutive time differences from `dt`.
    pub fn max_step_deviation(&self, dt: T) -> T {
        self.times
            .windows(2)
            .map(|w| (w[1] - w[0] - dt).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T: Scalar> Trajectory<T> {
    pub fn cast<U: Scalar>(&self) -> Trajectory<U> {
        let c = |x: T| U::lit(x.as_f64());
        Trajectory {
            times: self.times.iter().map(|&t| c(t)).collect(),
            n_states: self.n_states,
            states: self.states.iter().map(|&x| c(x)).collect(),
            inputs: self
                .inputs
                .iter()
                .map(|u| ExogenousInput::new(c(u.a_x), c(u.v_delta)))
                .collect(),
        }
    }
}
