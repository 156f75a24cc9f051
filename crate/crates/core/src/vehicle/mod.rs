//! Vehicle parameters, state layouts and the closed-form right-hand sides.

mod drift;
mod hybrid;
mod single_track;

pub use drift::{drift_rhs, magic_formula, tire_forces, torque_from_accel, DriftModel, TireForces};
pub use hybrid::{node_rhs, ude_rhs, HybridModel, ModelKind, NeuralOde, Ude, UDE_FEATURES};
pub use single_track::{
    kinematic_rows, kinematic_vjp, lateral_tire_forces, single_track_rhs, SingleTrackModel,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Default lower bound on the velocity for right-hand sides containing `1/v`.
pub const DEFAULT_V_FLOOR: f64 = 0.1;

/// Number of states of the drift reference model.
pub const DRIFT_DIM: usize = 9;
/// Number of states shared by the ODE, neural ODE and UDE models.
pub const SINGLE_TRACK_DIM: usize = 7;

/// Index of each state component in the flat state vectors.
pub mod idx {
    pub const DX: usize = 0;
    pub const DY: usize = 1;
    pub const PSI: usize = 2;
    pub const DELTA: usize = 3;
    pub const V: usize = 4;
    pub const BETA: usize = 5;
    pub const OMEGA: usize = 6;
    pub const OMEGA_F: usize = 7;
    pub const OMEGA_R: usize = 8;
}

pub const STATE_NAMES: [&str; DRIFT_DIM] = [
    "x", "y", "psi", "delta", "v", "beta", "omega", "omega_f", "omega_r",
];

/// Physical constants of the vehicle. Inertias in kg·m².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct VehicleParams<T> {
    pub m: T,
    pub l_f: T,
    pub l_r: T,
    pub mu: T,
    pub c_f: T,
    pub c_r: T,
    /// Retained for completeness; vertical load transfer is not modeled.
    pub h: T,
    pub i_z: T,
    pub i_w: T,
    pub t_e: T,
    pub t_b: T,
    pub r_w: T,
    pub g: T,
}

impl<T: Scalar> Default for VehicleParams<T> {
    fn default() -> Self {
        Self {
            m: T::lit(1225.0),
            l_f: T::lit(0.883),
            l_r: T::lit(1.508),
            mu: T::lit(1.048),
            c_f: T::lit(20.89),
            c_r: T::lit(20.89),
            h: T::lit(0.557),
            i_z: T::lit(1538.0),
            i_w: T::lit(1700.0),
            t_e: T::lit(1.0),
            t_b: T::lit(0.76),
            r_w: T::lit(0.344),
            g: T::lit(9.81),
        }
    }
}

impl<T: Scalar> VehicleParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("l_f", self.l_f),
            ("l_r", self.l_r),
            ("mu", self.mu),
            ("h", self.h),
            ("i_z", self.i_z),
            ("i_w", self.i_w),
            ("r_w", self.r_w),
            ("g", self.g),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > T::zero()) {
                return Err(Error::Config(format!(
                    "vehicle parameter {name} must be positive, got {value}"
                )));
            }
        }
        for (name, value) in [("t_e", self.t_e), ("t_b", self.t_b)] {
            if !(value >= T::zero() && value <= T::one()) {
                return Err(Error::Config(format!(
                    "split parameter {name} must lie in [0, 1], got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Static vertical loads `(F_zf, F_zr)` in N.
    pub fn axle_loads(&self) -> (T, T) {
        let wheelbase = self.l_f + self.l_r;
        let weight = self.m * self.g;
        (weight * self.l_r / wheelbase, weight * self.l_f / wheelbase)
    }

    pub fn cast<U: Scalar>(&self) -> VehicleParams<U> {
        let c = |x: T| U::lit(x.as_f64());
        VehicleParams {
            m: c(self.m),
            l_f: c(self.l_f),
            l_r: c(self.l_r),
            mu: c(self.mu),
            c_f: c(self.c_f),
            c_r: c(self.c_r),
            h: c(self.h),
            i_z: c(self.i_z),
            i_w: c(self.i_w),
            t_e: c(self.t_e),
            t_b: c(self.t_b),
            r_w: c(self.r_w),
            g: c(self.g),
        }
    }
}

/// Magic-formula shape parameters for one axle and direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct MagicFormula<T> {
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
}

impl<T: Scalar> Default for MagicFormula<T> {
    fn default() -> Self {
        Self {
            b: T::lit(10.0),
            c: T::lit(1.9),
            d: T::lit(1.0),
            e: T::lit(0.97),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct TireCoefficients<T> {
    pub front_longitudinal: MagicFormula<T>,
    pub front_lateral: MagicFormula<T>,
    pub rear_longitudinal: MagicFormula<T>,
    pub rear_lateral: MagicFormula<T>,
}

impl<T: Scalar> Default for TireCoefficients<T> {
    fn default() -> Self {
        Self::uniform(MagicFormula::default())
    }
}

impl<T: Scalar> TireCoefficients<T> {
    pub fn uniform(mf: MagicFormula<T>) -> Self {
        Self {
            front_longitudinal: mf,
            front_lateral: mf,
            rear_longitudinal: mf,
            rear_lateral: mf,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for mf in [
            self.front_longitudinal,
            self.front_lateral,
            self.rear_longitudinal,
            self.rear_lateral,
        ] {
            if !(mf.b > T::zero() && mf.c > T::zero() && mf.d > T::zero() && mf.e.is_finite()) {
                return Err(Error::Config(format!(
                    "magic formula needs B, C, D > 0 (got B={}, C={}, D={}, E={})",
                    mf.b, mf.c, mf.d, mf.e
                )));
            }
        }
        Ok(())
    }
}

/// Longitudinal acceleration and steering rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExogenousInput<T> {
    pub a_x: T,
    pub v_delta: T,
}

impl<T: Scalar> ExogenousInput<T> {
    pub fn new(a_x: T, v_delta: T) -> Self {
        Self { a_x, v_delta }
    }

    pub fn is_finite(&self) -> bool {
        self.a_x.is_finite() && self.v_delta.is_finite()
    }
}

/// Nine-component state of the drift reference model.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DriftState<T> {
    pub dx: T,
    pub dy: T,
    pub psi: T,
    pub delta: T,
    pub v: T,
    pub beta: T,
    pub omega: T,
    pub omega_f: T,
    pub omega_r: T,
}

impl<T: Scalar> DriftState<T> {
    pub fn from_slice(x: &[T]) -> Result<Self> {
        crate::error::check_len("drift state", DRIFT_DIM, x.len())?;
        Ok(Self {
            dx: x[0],
            dy: x[1],
            psi: x[2],
            delta: x[3],
            v: x[4],
            beta: x[5],
            omega: x[6],
            omega_f: x[7],
            omega_r: x[8],
        })
    }

    pub fn to_array(&self) -> [T; DRIFT_DIM] {
        [
            self.dx,
            self.dy,
            self.psi,
            self.delta,
            self.v,
            self.beta,
            self.omega,
            self.omega_f,
            self.omega_r,
        ]
    }

    /// Drops the wheel speeds.
    pub fn single_track(&self) -> SingleTrackState<T> {
        SingleTrackState {
            dx: self.dx,
            dy: self.dy,
            psi: self.psi,
            delta: self.delta,
            v: self.v,
            beta: self.beta,
            omega: self.omega,
        }
    }
}

/// Seven-component state of the single-track family of models.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SingleTrackState<T> {
    pub dx: T,
    pub dy: T,
    pub psi: T,
    pub delta: T,
    pub v: T,
    pub beta: T,
    pub omega: T,
}

impl<T: Scalar> SingleTrackState<T> {
    pub fn from_slice(x: &[T]) -> Result<Self> {
        crate::error::check_len("single-track state", SINGLE_TRACK_DIM, x.len())?;
        Ok(Self {
            dx: x[0],
            dy: x[1],
            psi: x[2],
            delta: x[3],
            v: x[4],
            beta: x[5],
            omega: x[6],
        })
    }

    pub fn to_array(&self) -> [T; SINGLE_TRACK_DIM] {
        [
            self.dx, self.dy, self.psi, self.delta, self.v, self.beta, self.omega,
        ]
    }
}

pub(crate) fn check_velocity<T: Scalar>(v: T, v_floor: T) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::non_finite("velocity"));
    }
    if v < v_floor {
        return Err(Error::Singularity {
            v: v.as_f64(),
            floor: v_floor.as_f64(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite<T: Scalar>(what: &str, x: &[T], u: &ExogenousInput<T>) -> Result<()> {
    if crate::scalar::all_finite(x) && u.is_finite() {
        Ok(())
    } else {
        Err(Error::non_finite(format!("{what} state/input")))
    }
}
