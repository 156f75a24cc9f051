//! Single-track drift reference model: wheel-speed states and magic-formula
//! tires on static axle loads.

use super::{
    check_finite, check_velocity, idx, kinematic_rows, DriftState, ExogenousInput, MagicFormula,
    TireCoefficients, VehicleParams, DRIFT_DIM,
};
use crate::dynamics::Dynamics;
use crate::{Result, Scalar};

/// `D·sin(C·atan(B·s − E·(B·s − atan(B·s))))`, odd in `s`.
#[inline]
pub fn magic_formula<T: Scalar>(slip: T, mf: &MagicFormula<T>) -> T {
    let bs = mf.b * slip;
    mf.d * (mf.c * (bs - mf.e * (bs - bs.atan())).atan()).sin()
}

/// Tire forces in N, expressed in each wheel's own frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TireForces<T> {
    pub f_fx: T,
    pub f_fy: T,
    pub f_rx: T,
    pub f_ry: T,
}

/// Engine and brake torque `(T_e, T_b)` from the commanded acceleration.
/// Positive demand goes to the engine channel, negative to the brake channel.
pub fn torque_from_accel<T: Scalar>(a_x: T, p: &VehicleParams<T>) -> (T, T) {
    let torque = p.m * a_x * p.r_w;
    if a_x >= T::zero() {
        (torque, T::zero())
    } else {
        (T::zero(), torque)
    }
}

/// Longitudinal and lateral tire forces of the drift model.
///
/// Longitudinal slip is `(r_w·ω_wheel − u_wheel) / max(u_wheel, v_floor)`,
/// slip angles follow single-track geometry. Lateral forces act against the
/// slip angle so that both axles are restoring.
pub fn tire_forces<T: Scalar>(
    x: &DriftState<T>,
    p: &VehicleParams<T>,
    tires: &TireCoefficients<T>,
    v_floor: T,
) -> Result<TireForces<T>> {
    check_velocity(x.v, v_floor)?;
    let (sin_beta, cos_beta) = x.beta.sin_cos();
    let (sin_delta, cos_delta) = x.delta.sin_cos();
    let v_lat = x.v * sin_beta;
    let v_long = x.v * cos_beta;

    let alpha_f = (v_lat + p.l_f * x.omega).atan2(v_long) - x.delta;
    let alpha_r = (v_lat - p.l_r * x.omega).atan2(v_long);

    let u_wf = v_long * cos_delta + (v_lat + p.l_f * x.omega) * sin_delta;
    let u_wr = v_long;
    let s_f = (p.r_w * x.omega_f - u_wf) / u_wf.max(v_floor);
    let s_r = (p.r_w * x.omega_r - u_wr) / u_wr.max(v_floor);

    let (fz_f, fz_r) = p.axle_loads();
    Ok(TireForces {
        f_fx: fz_f * magic_formula(s_f, &tires.front_longitudinal),
        f_fy: fz_f * magic_formula(-alpha_f, &tires.front_lateral),
        f_rx: fz_r * magic_formula(s_r, &tires.rear_longitudinal),
        f_ry: fz_r * magic_formula(-alpha_r, &tires.rear_lateral),
    })
}

/// State derivative of the drift model.
pub fn drift_rhs<T: Scalar>(
    x: &[T],
    u: &ExogenousInput<T>,
    p: &VehicleParams<T>,
    tires: &TireCoefficients<T>,
    v_floor: T,
) -> Result<[T; DRIFT_DIM]> {
    check_finite("drift", x, u)?;
    let s = DriftState::from_slice(x)?;
    let f = tire_forces(&s, p, tires, v_floor)?;
    let (t_e, t_b) = torque_from_accel(u.a_x, p);

    let mut dx = [T::zero(); DRIFT_DIM];
    kinematic_rows(x, u, &mut dx[..4]);

    let (sin_bd, cos_bd) = (s.beta - s.delta).sin_cos();
    let (sin_b, cos_b) = s.beta.sin_cos();
    let (sin_d, cos_d) = s.delta.sin_cos();
    let one = T::one();

    dx[idx::V] = (f.f_fx * cos_bd + f.f_fy * sin_bd + f.f_rx * cos_b + f.f_ry * sin_b) / p.m;
    dx[idx::BETA] = (f.f_fy * cos_bd - f.f_fx * sin_bd - f.f_rx * sin_b + f.f_ry * cos_b)
        / (p.m * s.v)
        - s.omega;
    dx[idx::OMEGA] = ((f.f_fx * sin_d + f.f_fy * cos_d) * p.l_f - f.f_ry * p.l_r) / p.i_z;
    dx[idx::OMEGA_F] = (-p.r_w * f.f_fx + p.t_b * t_b + p.t_e * t_e) / p.i_w;
    dx[idx::OMEGA_R] = (-p.r_w * f.f_rx + (one - p.t_b) * t_b + (one - p.t_e) * t_e) / p.i_w;
    Ok(dx)
}

/// Drift reference model as a solver right-hand side.
#[derive(Clone, Copy, Debug)]
pub struct DriftModel<T> {
    pub params: VehicleParams<T>,
    pub tires: TireCoefficients<T>,
    pub v_floor: T,
}

impl<T: Scalar> DriftModel<T> {
    /// Wheel speeds at which both tires roll without longitudinal slip.
    pub fn rolling_wheel_speeds(&self, x: &DriftState<T>) -> (T, T) {
        let p = &self.params;
        let v_lat = x.v * x.beta.sin();
        let v_long = x.v * x.beta.cos();
        let (sin_d, cos_d) = x.delta.sin_cos();
        let u_wf = v_long * cos_d + (v_lat + p.l_f * x.omega) * sin_d;
        (u_wf / p.r_w, v_long / p.r_w)
    }
}

impl<T: Scalar> Dynamics<T> for DriftModel<T> {
    fn dim(&self) -> usize {
        DRIFT_DIM
    }

    fn rhs(&self, _t: T, x: &[T], u: &ExogenousInput<T>, dx: &mut [T]) -> Result<()> {
        let d = drift_rhs(x, u, &self.params, &self.tires, self.v_floor)?;
        dx.copy_from_slice(&d);
        Ok(())
    }
}
