//! Right-hand sides that embed a network: the black-box neural ODE and the
//! hybrid UDE with physical kinematics.

use serde::{Deserialize, Serialize};

use super::{kinematic_rows, kinematic_vjp, ExogenousInput, SINGLE_TRACK_DIM};
use crate::dynamics::{Dynamics, ParametricDynamics};
use crate::error::check_len;
use crate::nn::{MlpDims, MlpParams};
use crate::scaler::{ZScoreScaler, N_CHANNELS};
use crate::{Error, Result, Scalar};

/// Scaler channels fed to the UDE network: δ, v, β, ω, a_x, v_δ.
pub const UDE_FEATURES: [usize; 6] = [3, 4, 5, 6, 7, 8];

/// Which network-based model family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Node,
    Ude,
}

impl ModelKind {
    pub fn dims(self, hidden: usize) -> MlpDims {
        match self {
            ModelKind::Node => MlpDims::new(N_CHANNELS, hidden, SINGLE_TRACK_DIM),
            ModelKind::Ude => MlpDims::new(UDE_FEATURES.len(), hidden, 3),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Node => "node",
            ModelKind::Ude => "ude",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "node" => Ok(ModelKind::Node),
            "ude" => Ok(ModelKind::Ude),
            other => Err(Error::Config(format!(
                "unknown model kind {other:?} (expected node or ude)"
            ))),
        }
    }
}

fn check_dims(net: MlpDims, n_in: usize, n_out: usize) -> Result<()> {
    check_len("network input dimension", n_in, net.n_in)?;
    check_len("network output dimension", n_out, net.n_out)
}

/// All seven derivatives from the network applied to z-scored `[x, u]`.
pub fn node_rhs<T: Scalar>(
    x: &[T],
    u: &ExogenousInput<T>,
    net: &MlpParams<T>,
    scaler: &ZScoreScaler<T>,
) -> Result<[T; SINGLE_TRACK_DIM]> {
    let model = NeuralOde::new(net, scaler)?;
    check_len("state", SINGLE_TRACK_DIM, x.len())?;
    let mut dx = [T::zero(); SINGLE_TRACK_DIM];
    model.rhs(T::zero(), x, u, &mut dx)?;
    Ok(dx)
}

/// Kinematic rows plus network-predicted `(v̇, β̇, ω̇)`.
pub fn ude_rhs<T: Scalar>(
    x: &[T],
    u: &ExogenousInput<T>,
    net: &MlpParams<T>,
    scaler: &ZScoreScaler<T>,
) -> Result<[T; SINGLE_TRACK_DIM]> {
    let model = Ude::new(net, scaler)?;
    check_len("state", SINGLE_TRACK_DIM, x.len())?;
    let mut dx = [T::zero(); SINGLE_TRACK_DIM];
    model.rhs(T::zero(), x, u, &mut dx)?;
    Ok(dx)
}

#[derive(Clone, Copy, Debug)]
pub struct NeuralOde<'a, T: Scalar> {
    net: &'a MlpParams<T>,
    scaler: &'a ZScoreScaler<T>,
}

impl<'a, T: Scalar> NeuralOde<'a, T> {
    pub fn new(net: &'a MlpParams<T>, scaler: &'a ZScoreScaler<T>) -> Result<Self> {
        check_dims(net.dims(), N_CHANNELS, SINGLE_TRACK_DIM)?;
        Ok(Self { net, scaler })
    }
}

impl<T: Scalar> Dynamics<T> for NeuralOde<'_, T> {
    fn dim(&self) -> usize {
        SINGLE_TRACK_DIM
    }

    fn rhs(&self, t: T, x: &[T], u: &ExogenousInput<T>, dx: &mut [T]) -> Result<()> {
        let mut tape = [T::zero(); 64];
        let len = self.tape_len();
        if len <= tape.len() {
            self.rhs_taped(t, x, u, dx, &mut tape[..len])
        } else {
            self.rhs_taped(t, x, u, dx, &mut vec![T::zero(); len])
        }
    }
}

impl<T: Scalar> ParametricDynamics<T> for NeuralOde<'_, T> {
    fn n_params(&self) -> usize {
        self.net.theta().len()
    }

    fn tape_len(&self) -> usize {
        N_CHANNELS + self.net.dims().n_hidden
    }

    fn rhs_taped(
        &self,
        _t: T,
        x: &[T],
        u: &ExogenousInput<T>,
        dx: &mut [T],
        tape: &mut [T],
    ) -> Result<()> {
        let (input, hidden) = tape.split_at_mut(N_CHANNELS);
        self.scaler.transform_into(x, u, input);
        self.net.forward_into(input, hidden, dx);
        Ok(())
    }

    fn vjp(
        &self,
        _t: T,
        _x: &[T],
        _u: &ExogenousInput<T>,
        tape: &[T],
        cot: &[T],
        x_bar: &mut [T],
        p_bar: &mut [T],
    ) {
        let (input, hidden) = tape.split_at(N_CHANNELS);
        let mut d_input = [T::zero(); N_CHANNELS];
        self.net
            .backward_accumulate(input, hidden, cot, p_bar, &mut d_input);
        for c in 0..SINGLE_TRACK_DIM {
            x_bar[c] += d_input[c] / self.scaler.stds()[c];
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Ude<'a, T: Scalar> {
    net: &'a MlpParams<T>,
    scaler: &'a ZScoreScaler<T>,
}

impl<'a, T: Scalar> Ude<'a, T> {
    pub fn new(net: &'a MlpParams<T>, scaler: &'a ZScoreScaler<T>) -> Result<Self> {
        check_dims(net.dims(), UDE_FEATURES.len(), 3)?;
        Ok(Self { net, scaler })
    }
}

impl<T: Scalar> Dynamics<T> for Ude<'_, T> {
    fn dim(&self) -> usize {
        SINGLE_TRACK_DIM
    }

    fn rhs(&self, t: T, x: &[T], u: &ExogenousInput<T>, dx: &mut [T]) -> Result<()> {
        let mut tape = [T::zero(); 64];
        let len = self.tape_len();
        if len <= tape.len() {
            self.rhs_taped(t, x, u, dx, &mut tape[..len])
        } else {
            self.rhs_taped(t, x, u, dx, &mut vec![T::zero(); len])
        }
    }
}

impl<T: Scalar> ParametricDynamics<T> for Ude<'_, T> {
    fn n_params(&self) -> usize {
        self.net.theta().len()
    }

    fn tape_len(&self) -> usize {
        UDE_FEATURES.len() + self.net.dims().n_hidden
    }

    fn rhs_taped(
        &self,
        _t: T,
        x: &[T],
        u: &ExogenousInput<T>,
        dx: &mut [T],
        tape: &mut [T],
    ) -> Result<()> {
        kinematic_rows(x, u, &mut dx[..4]);
        let (input, hidden) = tape.split_at_mut(UDE_FEATURES.len());
        let mut z = [T::zero(); N_CHANNELS];
        self.scaler.transform_into(x, u, &mut z);
        for (slot, &c) in input.iter_mut().zip(&UDE_FEATURES) {
            *slot = z[c];
        }
        self.net.forward_into(input, hidden, &mut dx[4..]);
        Ok(())
    }

    fn vjp(
        &self,
        _t: T,
        x: &[T],
        _u: &ExogenousInput<T>,
        tape: &[T],
        cot: &[T],
        x_bar: &mut [T],
        p_bar: &mut [T],
    ) {
        kinematic_vjp(x, &cot[..4], x_bar);
        let (input, hidden) = tape.split_at(UDE_FEATURES.len());
        let mut d_input = [T::zero(); UDE_FEATURES.len()];
        self.net
            .backward_accumulate(input, hidden, &cot[4..], p_bar, &mut d_input);
        for (&c, &d) in UDE_FEATURES.iter().zip(&d_input) {
            if c < SINGLE_TRACK_DIM {
                x_bar[c] += d / self.scaler.stds()[c];
            }
        }
    }
}

/// Either network model, chosen at run time.
#[derive(Clone, Copy, Debug)]
pub enum HybridModel<'a, T: Scalar> {
    Node(NeuralOde<'a, T>),
    Ude(Ude<'a, T>),
}

impl<'a, T: Scalar> HybridModel<'a, T> {
    pub fn new(
        kind: ModelKind,
        net: &'a MlpParams<T>,
        scaler: &'a ZScoreScaler<T>,
    ) -> Result<Self> {
        Ok(match kind {
            ModelKind::Node => HybridModel::Node(NeuralOde::new(net, scaler)?),
            ModelKind::Ude => HybridModel::Ude(Ude::new(net, scaler)?),
        })
    }
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            HybridModel::Node($m) => $e,
            HybridModel::Ude($m) => $e,
        }
    };
}

impl<T: Scalar> Dynamics<T> for HybridModel<'_, T> {
    fn dim(&self) -> usize {
        SINGLE_TRACK_DIM
    }

    fn rhs(&self, t: T, x: &[T], u: &ExogenousInput<T>, dx: &mut [T]) -> Result<()> {
        dispatch!(self, m => m.rhs(t, x, u, dx))
    }
}

impl<T: Scalar> ParametricDynamics<T> for HybridModel<'_, T> {
    fn n_params(&self) -> usize {
        dispatch!(self, m => m.n_params())
    }

    fn tape_len(&self) -> usize {
        dispatch!(self, m => m.tape_len())
    }

    fn rhs_taped(
        &self,
        t: T,
        x: &[T],
        u: &ExogenousInput<T>,
        dx: &mut [T],
        tape: &mut [T],
    ) -> Result<()> {
        dispatch!(self, m => m.rhs_taped(t, x, u, dx, tape))
    }

    fn vjp(
        &self,
        t: T,
        x: &[T],
        u: &ExogenousInput<T>,
        tape: &[T],
        cot: &[T],
        x_bar: &mut [T],
        p_bar: &mut [T],
    ) {
        dispatch!(self, m => m.vjp(t, x, u, tape, cot, x_bar, p_bar))
    }
}
