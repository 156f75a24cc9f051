//! Linear-tire single-track model used as the white-box benchmark, and the
//! kinematic rows it shares with every other model.

use super::{
    check_finite, check_velocity, idx, ExogenousInput, SingleTrackState, VehicleParams,
    SINGLE_TRACK_DIM,
};
use crate::dynamics::Dynamics;
use crate::{Result, Scalar};

/// Writes the four kinematic rows `(v·cos(ψ+β), v·sin(ψ+β), ω, v_δ)` into
/// `out[..4]`. `x` uses the common state layout.
#[inline]
pub fn kinematic_rows<T: Scalar>(x: &[T], u: &ExogenousInput<T>, out: &mut [T]) {
    let (s, c) = (x[idx::PSI] + x[idx::BETA]).sin_cos();
    let v = x[idx::V];
    out[0] = v * c;
    out[1] = v * s;
    out[2] = x[idx::OMEGA];
    out[3] = u.v_delta;
}

/// Reverse-mode companion of [`kinematic_rows`]: accumulates
/// `cot[..4]ᵀ ∂rows/∂x` into `x_bar`.
#[inline]
pub fn kinematic_vjp<T: Scalar>(x: &[T], cot: &[T], x_bar: &mut [T]) {
    let (s, c) = (x[idx::PSI] + x[idx::BETA]).sin_cos();
    let v = x[idx::V];
    let d_angle = v * (c * cot[1] - s * cot[0]);
    x_bar[idx::V] += c * cot[0] + s * cot[1];
    x_bar[idx::PSI] += d_angle;
    x_bar[idx::BETA] += d_angle;
    x_bar[idx::OMEGA] += cot[2];
}

/// Linear lateral tire forces `(F_fy, F_ry)` in N.
pub fn lateral_tire_forces<T: Scalar>(
    x: &SingleTrackState<T>,
    p: &VehicleParams<T>,
    v_floor: T,
) -> Result<(T, T)> {
    check_velocity(x.v, v_floor)?;
    let (fz_f, fz_r) = p.axle_loads();
    let f_fy = p.mu * p.c_f * fz_f * (x.delta - x.omega * p.l_f / x.v - x.beta);
    let f_ry = p.mu * p.c_r * fz_r * (x.omega * p.l_r / x.v - x.beta);
    Ok((f_fy, f_ry))
}

pub fn single_track_rhs<T: Scalar>(
    x: &[T],
    u: &ExogenousInput<T>,
    p: &VehicleParams<T>,
    v_floor: T,
) -> Result<[T; SINGLE_TRACK_DIM]> {
    check_finite("single-track", x, u)?;
    let s = SingleTrackState::from_slice(x)?;
    let (f_fy, f_ry) = lateral_tire_forces(&s, p, v_floor)?;
    let mut dx = [T::zero(); SINGLE_TRACK_DIM];
    kinematic_rows(x, u, &mut dx[..4]);
    dx[idx::V] = u.a_x;
    dx[idx::BETA] = (f_fy + f_ry) / (p.m * s.v) - s.omega;
    dx[idx::OMEGA] = (f_fy * p.l_f - f_ry * p.l_r) / p.i_z;
    Ok(dx)
}

/// White-box benchmark model as a solver right-hand side.
#[derive(Clone, Copy, Debug)]
pub struct SingleTrackModel<T> {
    pub params: VehicleParams<T>,
    pub v_floor: T,
}

impl<T: Scalar> Dynamics<T> for SingleTrackModel<T> {
    fn dim(&self) -> usize {
        SINGLE_TRACK_DIM
    }

    fn rhs(&self, _t: T, x: &[T], u: &ExogenousInput<T>, dx: &mut [T]) -> Result<()> {
        dx.copy_from_slice(&single_track_rhs(x, u, &self.params, self.v_floor)?);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn state(delta: f64, v: f64, beta: f64, omega: f64) -> SingleTrackState<f64> {
        SingleTrackState {
            delta,
            v,
            beta,
            omega,
            ..Default::default()
        }
    }

    #[test]
    fn straight_driving() {
        let x = [0.0, 0.0, 0.0, 0.0, 25.0, 0.0, 0.0];
        let d = single_track_rhs(
            &x,
            &ExogenousInput::new(0.06, 0.0),
            &VehicleParams::default(),
            0.1,
        )
        .unwrap();
        assert_eq!(d, [25.0, 0.0, 0.0, 0.0, 0.06, 0.0, 0.0]);
    }

    #[test]
    fn zero_slip_zero_force() {
        let f = lateral_tire_forces(&state(0.0, 20.0, 0.0, 0.0), &VehicleParams::default(), 0.1)
            .unwrap();
        assert_eq!(f, (0.0, 0.0));
    }

    #[test]
    fn front_force_from_steering() {
        let f = lateral_tire_forces(&state(0.05, 20.0, 0.0, 0.0), &VehicleParams::default(), 0.1)
            .unwrap();
        // 1.048 * 20.89 * (1225 * 9.81 * 1.508 / 2.391) * 0.05
        let expected = 1.048 * 20.89 * (1225.0 * 9.81 * 1.508 / 2.391) * 0.05;
        assert!((f.0 - expected).abs() < 1e-9);
        assert!((f.0 - 8_296.531_920_647_429).abs() < 1e-6);
        assert_eq!(f.1, 0.0);
    }

    #[test]
    fn forces_scale_with_friction() {
        let p = VehicleParams::default();
        let p2 = VehicleParams {
            mu: 2.0 * p.mu,
            ..p
        };
        let s = state(0.03, 18.0, -0.01, 0.2);
        let (a, b) = lateral_tire_forces(&s, &p, 0.1).unwrap();
        let (a2, b2) = lateral_tire_forces(&s, &p2, 0.1).unwrap();
        assert!((a2 - 2.0 * a).abs() < 1e-9 * a.abs());
        assert!((b2 - 2.0 * b).abs() < 1e-9 * b.abs());
    }

    #[test]
    fn velocity_floor() {
        let x = [0.0, 0.0, 0.0, 0.0, 0.09, 0.0, 0.0];
        let r = single_track_rhs(
            &x,
            &ExogenousInput::default(),
            &VehicleParams::default(),
            0.1,
        );
        assert!(matches!(r, Err(Error::Singularity { .. })));
    }
}
