//! Right-hand-side abstractions consumed by the solver and the trainer.

use crate::vehicle::ExogenousInput;
use crate::{Result, Scalar};

/// An autonomous-plus-input ODE `dx/dt = f(t, x, u)`.
pub trait Dynamics<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, t: T, x: &[T], u: &ExogenousInput<T>, dx: &mut [T]) -> Result<()>;
}

/// A right-hand side with trainable parameters and a reverse-mode
/// vector-Jacobian product.
///
/// `rhs_taped` records whatever intermediates the reverse pass needs into a
/// caller-provided buffer of length `tape_len()`, so rollouts can keep one
/// flat arena instead of allocating per stage.
pub trait ParametricDynamics<T: Scalar>: Dynamics<T> {
    fn n_params(&self) -> usize;

    fn tape_len(&self) -> usize;

    fn rhs_taped(
        &self,
        t: T,
        x: &[T],
        u: &ExogenousInput<T>,
        dx: &mut [T],
        tape: &mut [T],
    ) -> Result<()>;

    /// Accumulates `cotᵀ ∂f/∂x` into `x_bar` and `cotᵀ ∂f/∂θ` into `p_bar`.
    #[allow(clippy::too_many_arguments)]
    fn vjp(
        &self,
        t: T,
        x: &[T],
        u: &ExogenousInput<T>,
        tape: &[T],
        cot: &[T],
        x_bar: &mut [T],
        p_bar: &mut [T],
    );
}

impl<T: Scalar, D: Dynamics<T> + ?Sized> Dynamics<T> for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn rhs(&self, t: T, x: &[T], u: &ExogenousInput<T>, dx: &mut [T]) -> Result<()> {
        (**self).rhs(t, x, u, dx)
    }
}

impl<T: Scalar, D: ParametricDynamics<T> + ?Sized> ParametricDynamics<T> for &D {
    fn n_params(&self) -> usize {
        (**self).n_params()
    }

    fn tape_len(&self) -> usize {
        (**self).tape_len()
    }

    fn rhs_taped(
        &self,
        t: T,
        x: &[T],
        u: &ExogenousInput<T>,
        dx: &mut [T],
        tape: &mut [T],
    ) -> Result<()> {
        (**self).rhs_taped(t, x, u, dx, tape)
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
        (**self).vjp(t, x, u, tape, cot, x_bar, p_bar)
    }
}
