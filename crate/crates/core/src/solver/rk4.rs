use super::{TimeGrid, Trajectory};
use crate::dynamics::Dynamics;
use crate::vehicle::ExogenousInput;
use crate::{Error, Result, Scalar};

/// One classical RK4 step from `(t, x)` with step `h`; inputs are sampled at
/// `t`, `t + h/2` and `t + h`.
pub fn rk4_step<T, D, F>(model: &D, x: &[T], t: T, h: T, inputs: &F) -> Result<Vec<T>>
where
    T: Scalar,
    D: Dynamics<T> + ?Sized,
    F: Fn(T) -> ExogenousInput<T>,
{
    let mut ws = Workspace::new(x.len());
    let mut out = x.to_vec();
    ws.step(model, &mut out, t, h, inputs)?;
    Ok(out)
}

pub(crate) struct Workspace<T> {
    k: [Vec<T>; 4],
    stage: Vec<T>,
}

impl<T: Scalar> Workspace<T> {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![T::zero(); n]),
            stage: vec![T::zero(); n],
        }
    }

    /// Advances `x` in place.
    pub(crate) fn step<D, F>(
        &mut self,
        model: &D,
        x: &mut [T],
        t: T,
        h: T,
        inputs: &F,
    ) -> Result<()>
    where
        D: Dynamics<T> + ?Sized,
        F: Fn(T) -> ExogenousInput<T>,
    {
        let half = h / T::lit(2.0);
        let u0 = inputs(t);
        let um = inputs(t + half);
        let u1 = inputs(t + h);
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;

        model.rhs(t, x, &u0, k1)?;
        for i in 0..x.len() {
            stage[i] = x[i] + half * k1[i];
        }
        model.rhs(t + half, stage, &um, k2)?;
        for i in 0..x.len() {
            stage[i] = x[i] + half * k2[i];
        }
        model.rhs(t + half, stage, &um, k3)?;
        for i in 0..x.len() {
            stage[i] = x[i] + h * k3[i];
        }
        model.rhs(t + h, stage, &u1, k4)?;
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        for i in 0..x.len() {
            x[i] += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        Ok(())
    }
}

/// Integrates `model` from `x0` over `grid`, recording the state and the
/// input at every output time.
pub fn simulate<T, D, F>(
    model: &D,
    x0: &[T],
    grid: &TimeGrid<T>,
    inputs: &F,
) -> Result<Trajectory<T>>
where
    T: Scalar,
    D: Dynamics<T> + ?Sized,
    F: Fn(T) -> ExogenousInput<T>,
{
    let n = model.dim();
    crate::error::check_len("initial state", n, x0.len())?;
    let samples = grid.n_samples();
    let mut times = Vec::with_capacity(samples);
    let mut states = Vec::with_capacity(samples * n);
    let mut recorded = Vec::with_capacity(samples);
    let mut ws = Workspace::new(n);
    let mut x = x0.to_vec();
    let h = grid.step();

    times.push(grid.t0());
    states.extend_from_slice(&x);
    recorded.push(inputs(grid.t0()));
    for i in 0..grid.n_intervals() {
        for s in 0..grid.substeps() {
            let t = grid.step_time(i, s);
            ws.step(model, &mut x, t, h, inputs)
                .map_err(|e| Error::AtTime {
                    t: t.as_f64(),
                    source: Box::new(e),
                })?;
        }
        let t = grid.time(i + 1);
        if !crate::scalar::all_finite(&x) {
            return Err(Error::AtTime {
                t: t.as_f64(),
                source: Box::new(Error::non_finite("simulated state")),
            });
        }
        times.push(t);
        states.extend_from_slice(&x);
        recorded.push(inputs(t));
    }
    Trajectory::new(times, n, states, recorded)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp;
    impl Dynamics<f64> for Exp {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, x: &[f64], _u: &ExogenousInput<f64>, dx: &mut [f64]) -> Result<()> {
            dx[0] = x[0];
            Ok(())
        }
    }

    struct Still;
    impl Dynamics<f64> for Still {
        fn dim(&self) -> usize {
            3
        }
        fn rhs(&self, _t: f64, _x: &[f64], _u: &ExogenousInput<f64>, dx: &mut [f64]) -> Result<()> {
            dx.fill(0.0);
            Ok(())
        }
    }

    fn no_input(_: f64) -> ExogenousInput<f64> {
        ExogenousInput::default()
    }

    #[test]
    fn zero_rhs_keeps_state() {
        let x = rk4_step(&Still, &[1.0, -2.0, 3.5], 0.0, 0.1, &no_input).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.5]);
        let grid = TimeGrid::new(0.0, 1.0, 0.1, 3).unwrap();
        let traj = simulate(&Still, &[1.0, -2.0, 3.5], &grid, &no_input).unwrap();
        assert_eq!(traj.len(), 11);
        assert!((0..traj.len()).all(|i| traj.state(i) == [1.0, -2.0, 3.5]));
    }

    #[test]
    fn exponential_step_is_taylor_polynomial() {
        let h: f64 = 0.1;
        let x = rk4_step(&Exp, &[1.0], 0.0, h, &no_input).unwrap();
        let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((x[0] - taylor).abs() < 1e-12);
        assert!((x[0] - 1.105_170_833_333_333_3).abs() < 1e-12);
    }

    #[test]
    fn uniform_output_grid() {
        let grid = TimeGrid::new(0.0, 100.0, 0.1, 10).unwrap();
        let traj = simulate(&Still, &[0.0; 3], &grid, &no_input).unwrap();
        assert_eq!(traj.len(), 1001);
        assert!(traj.max_step_deviation(0.1) < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(1.0, 1.0, 0.1, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.1, 0).is_err());
        assert!(TimeGrid::new(0.0, 1.05, 0.1, 1).is_err());
    }
}
