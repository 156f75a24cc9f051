//! Gradients of rollout losses with respect to the initial state and the
//! network parameters.
//!
//! [`rollout`] records every RK4 stage so [`Rollout::backward`] can run the
//! exact reverse pass of the discrete scheme (discretize-then-optimize).
//! [`adjoint_gradient`] instead integrates the continuous adjoint system
//! backward in time together with the state and the parameter gradient.

use super::{simulate, TimeGrid, Trajectory};
use crate::dynamics::ParametricDynamics;
use crate::error::check_len;
use crate::scalar::{all_finite, axpy};
use crate::vehicle::ExogenousInput;
use crate::{Error, Result, Scalar};

/// Forward rollout with every stage state and model tape kept for the
/// reverse pass.
#[derive(Clone, Debug)]
pub struct Rollout<T> {
    trajectory: Trajectory<T>,
    grid: TimeGrid<T>,
    dim: usize,
    tape_len: usize,
    stage_x: Vec<T>,
    stage_u: Vec<ExogenousInput<T>>,
    tapes: Vec<T>,
}

/// Result of [`rollout_with_gradient`].
#[derive(Clone, Debug)]
pub struct RolloutGradient<T> {
    pub trajectory: Trajectory<T>,
    pub loss: T,
    pub d_x0: Vec<T>,
    pub d_theta: Vec<T>,
}

/// Result of [`adjoint_gradient`].
#[derive(Clone, Debug)]
pub struct AdjointResult<T> {
    pub trajectory: Trajectory<T>,
    pub loss: T,
    pub d_x0: Vec<T>,
    pub d_theta: Vec<T>,
    /// Initial state reached by integrating the state backward from `t1`.
    pub x0_recovered: Vec<T>,
}

pub fn rollout<T, M, F>(model: &M, x0: &[T], grid: &TimeGrid<T>, inputs: &F) -> Result<Rollout<T>>
where
    T: Scalar,
    M: ParametricDynamics<T> + ?Sized,
    F: Fn(T) -> ExogenousInput<T>,
{
    let dim = model.dim();
    check_len("initial state", dim, x0.len())?;
    let tape_len = model.tape_len();
    let n_steps = grid.n_intervals() * grid.substeps();
    let h = grid.step();
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);

    let mut stage_x = vec![T::zero(); n_steps * 4 * dim];
    let mut stage_u = Vec::with_capacity(n_steps * 4);
    let mut tapes = vec![T::zero(); n_steps * 4 * tape_len];
    let mut times = Vec::with_capacity(grid.n_samples());
    let mut states = Vec::with_capacity(grid.n_samples() * dim);
    let mut recorded = Vec::with_capacity(grid.n_samples());
    let mut k = vec![T::zero(); 4 * dim];
    let mut x = x0.to_vec();

    times.push(grid.t0());
    states.extend_from_slice(&x);
    recorded.push(inputs(grid.t0()));

    for i in 0..grid.n_intervals() {
        for s in 0..grid.substeps() {
            let step = i * grid.substeps() + s;
            let t = grid.step_time(i, s);
            let u0 = inputs(t);
            let um = inputs(t + half);
            let u1 = inputs(t + h);
            let xs = &mut stage_x[step * 4 * dim..(step + 1) * 4 * dim];
            let tp = &mut tapes[step * 4 * tape_len..(step + 1) * 4 * tape_len];
            let stage_times = [t, t + half, t + half, t + h];
            let stage_inputs = [u0, um, um, u1];
            let coeffs = [half, half, h];

            xs[..dim].copy_from_slice(&x);
            for st in 0..4 {
                let (before, after) = xs.split_at_mut((st + 1) * dim);
                let xst = &before[st * dim..];
                let kst = &mut k[st * dim..(st + 1) * dim];
                model
                    .rhs_taped(
                        stage_times[st],
                        xst,
                        &stage_inputs[st],
                        kst,
                        &mut tp[st * tape_len..(st + 1) * tape_len],
                    )
                    .map_err(|e| Error::AtTime {
                        t: stage_times[st].as_f64(),
                        source: Box::new(e),
                    })?;
                if st < 3 {
                    let next = &mut after[..dim];
                    for j in 0..dim {
                        next[j] = x[j] + coeffs[st] * kst[j];
                    }
                }
            }
            stage_u.extend_from_slice(&stage_inputs);
            for j in 0..dim {
                x[j] += sixth * (k[j] + two * (k[dim + j] + k[2 * dim + j]) + k[3 * dim + j]);
            }
        }
        let t = grid.time(i + 1);
        if !all_finite(&x) {
            return Err(Error::AtTime {
                t: t.as_f64(),
                source: Box::new(Error::non_finite("rollout state")),
            });
        }
        times.push(t);
        states.extend_from_slice(&x);
        recorded.push(inputs(t));
    }

    Ok(Rollout {
        trajectory: Trajectory::new(times, dim, states, recorded)?,
        grid: *grid,
        dim,
        tape_len,
        stage_x,
        stage_u,
        tapes,
    })
}

impl<T: Scalar> Rollout<T> {
    pub fn trajectory(&self) -> &Trajectory<T> {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> Trajectory<T> {
        self.trajectory
    }

    /// Pulls per-sample cotangents `∂L/∂x_i` (row-major, one row per output
    /// sample including the initial one) back to `(∂L/∂x0, ∂L/∂θ)`.
    pub fn backward<M>(&self, model: &M, cotangents: &[T]) -> Result<(Vec<T>, Vec<T>)>
    where
        M: ParametricDynamics<T> + ?Sized,
    {
        let dim = self.dim;
        let n_samples = self.grid.n_samples();
        check_len("rollout cotangents", n_samples * dim, cotangents.len())?;
        check_len("model tape", self.tape_len, model.tape_len())?;
        let mut p_bar = vec![T::zero(); model.n_params()];
        let mut g = cotangents[(n_samples - 1) * dim..].to_vec();
        if cotangents.iter().all(|&c| c == T::zero()) {
            return Ok((g, p_bar));
        }

        let h = self.grid.step();
        let half = h / T::lit(2.0);
        let sixth = h / T::lit(6.0);
        let third = h / T::lit(3.0);
        let mut kb = vec![T::zero(); 4 * dim];
        let mut tmp = vec![T::zero(); dim];

        for i in (0..self.grid.n_intervals()).rev() {
            for s in (0..self.grid.substeps()).rev() {
                let step = i * self.grid.substeps() + s;
                let t = self.grid.step_time(i, s);
                let stage_times = [t, t + half, t + half, t + h];
                let xs = &self.stage_x[step * 4 * dim..(step + 1) * 4 * dim];
                let us = &self.stage_u[step * 4..(step + 1) * 4];
                let tp = &self.tapes[step * 4 * self.tape_len..(step + 1) * 4 * self.tape_len];
                for j in 0..dim {
                    kb[j] = sixth * g[j];
                    kb[dim + j] = third * g[j];
                    kb[2 * dim + j] = third * g[j];
                    kb[3 * dim + j] = sixth * g[j];
                }
                // stage st feeds k[st], and its state depended on k[st-1]
                let back_coeff = [T::zero(), half, half, h];
                for st in (1..4).rev() {
                    tmp.fill(T::zero());
                    let (lo, hi) = kb.split_at_mut(st * dim);
                    model.vjp(
                        stage_times[st],
                        &xs[st * dim..(st + 1) * dim],
                        &us[st],
                        &tp[st * self.tape_len..(st + 1) * self.tape_len],
                        &hi[..dim],
                        &mut tmp,
                        &mut p_bar,
                    );
                    for j in 0..dim {
                        g[j] += tmp[j];
                    }
                    axpy(back_coeff[st], &tmp, &mut lo[(st - 1) * dim..]);
                }
                model.vjp(
                    stage_times[0],
                    &xs[..dim],
                    &us[0],
                    &tp[..self.tape_len],
                    &kb[..dim],
                    &mut g,
                    &mut p_bar,
                );
            }
            for j in 0..dim {
                g[j] += cotangents[i * dim + j];
            }
            if !all_finite(&g) {
                return Err(Error::AtTime {
                    t: self.grid.time(i).as_f64(),
                    source: Box::new(Error::non_finite("reverse-mode state cotangent")),
                });
            }
        }
        if !all_finite(&p_bar) {
            return Err(Error::non_finite("parameter gradient"));
        }
        Ok((g, p_bar))
    }
}

/// Rolls out `model`, evaluates `loss` on the trajectory (returning the
/// scalar and its per-sample cotangents) and backpropagates through every
/// RK4 stage.
pub fn rollout_with_gradient<T, M, F, L>(
    model: &M,
    x0: &[T],
    grid: &TimeGrid<T>,
    inputs: &F,
    loss: L,
) -> Result<RolloutGradient<T>>
where
    T: Scalar,
    M: ParametricDynamics<T> + ?Sized,
    F: Fn(T) -> ExogenousInput<T>,
    L: FnOnce(&Trajectory<T>) -> Result<(T, Vec<T>)>,
{
    let tape = rollout(model, x0, grid, inputs)?;
    let (value, cot) = loss(tape.trajectory())?;
    let (d_x0, d_theta) = tape.backward(model, &cot)?;
    Ok(RolloutGradient {
        trajectory: tape.into_trajectory(),
        loss: value,
        d_x0,
        d_theta,
    })
}

/// Loss gradient via the continuous adjoint: the augmented state
/// `[x, a, ∂L/∂θ]` starts at `[x(t1), ∂L/∂x(t1), 0]` and is integrated from
/// `t1` back to `t0` in one sweep, with `a` jumping by the loss cotangent at
/// every intermediate output sample.
pub fn adjoint_gradient<T, M, F, L>(
    model: &M,
    x0: &[T],
    grid: &TimeGrid<T>,
    inputs: &F,
    loss: L,
) -> Result<AdjointResult<T>>
where
    T: Scalar,
    M: ParametricDynamics<T> + ?Sized,
    F: Fn(T) -> ExogenousInput<T>,
    L: FnOnce(&Trajectory<T>) -> Result<(T, Vec<T>)>,
{
    let dim = model.dim();
    let n_params = model.n_params();
    let trajectory = simulate(model, x0, grid, inputs)?;
    let (value, cot) = loss(&trajectory)?;
    let n_samples = grid.n_samples();
    check_len("adjoint cotangents", n_samples * dim, cot.len())?;

    let aug = 2 * dim + n_params;
    let mut z = vec![T::zero(); aug];
    z[..dim].copy_from_slice(trajectory.state(n_samples - 1));
    z[dim..2 * dim].copy_from_slice(&cot[(n_samples - 1) * dim..]);

    let mut tape = vec![T::zero(); model.tape_len()];
    let mut x_bar = vec![T::zero(); dim];
    let mut augmented_rhs = |t: T, z: &[T], dz: &mut [T]| -> Result<()> {
        let (x, rest) = z.split_at(dim);
        let a = &rest[..dim];
        let (dx, drest) = dz.split_at_mut(dim);
        let (da, dq) = drest.split_at_mut(dim);
        let u = inputs(t);
        model.rhs_taped(t, x, &u, dx, &mut tape)?;
        x_bar.fill(T::zero());
        dq.fill(T::zero());
        model.vjp(t, x, &u, &tape, a, &mut x_bar, dq);
        for j in 0..dim {
            da[j] = -x_bar[j];
        }
        for q in dq.iter_mut() {
            *q = -*q;
        }
        Ok(())
    };

    let h = grid.step();
    let neg_h = -h;
    let half = neg_h / T::lit(2.0);
    let sixth = neg_h / T::lit(6.0);
    let two = T::lit(2.0);
    let mut k: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); aug]);
    let mut stage = vec![T::zero(); aug];

    for i in (0..grid.n_intervals()).rev() {
        for s in (0..grid.substeps()).rev() {
            let t = grid.step_time(i, s) + h;
            let [k1, k2, k3, k4] = &mut k;
            augmented_rhs(t, &z, k1)?;
            for j in 0..aug {
                stage[j] = z[j] + half * k1[j];
            }
            augmented_rhs(t + half, &stage, k2)?;
            for j in 0..aug {
                stage[j] = z[j] + half * k2[j];
            }
            augmented_rhs(t + half, &stage, k3)?;
            for j in 0..aug {
                stage[j] = z[j] + neg_h * k3[j];
            }
            augmented_rhs(t + neg_h, &stage, k4)?;
            for j in 0..aug {
                z[j] += sixth * (k1[j] + two * (k2[j] + k3[j]) + k4[j]);
            }
        }
        for j in 0..dim {
            z[dim + j] += cot[i * dim + j];
        }
        if !all_finite(&z) {
            return Err(Error::AtTime {
                t: grid.time(i).as_f64(),
                source: Box::new(Error::non_finite("adjoint state")),
            });
        }
    }

    Ok(AdjointResult {
        trajectory,
        loss: value,
        x0_recovered: z[..dim].to_vec(),
        d_x0: z[dim..2 * dim].to_vec(),
        d_theta: z[2 * dim..].to_vec(),
    })
}
