//! One-hidden-layer tanh network over a flat parameter vector.
//!
//! `theta` layout: `W1` (n_hidden × n_in, row-major), `b1`, `W2`
//! (n_out × n_hidden, row-major), `b2`. The same ordering is used by
//! gradients and by the weight file format.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::check_len;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MlpDims {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
}

impl MlpDims {
    pub const fn new(n_in: usize, n_hidden: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_hidden,
            n_out,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_in == 0 || self.n_hidden == 0 || self.n_out == 0 {
            return Err(Error::Config(format!(
                "network dimensions must be positive, got {self:?}"
            )));
        }
        Ok(())
    }

    fn w1(&self) -> std::ops::Range<usize> {
        0..self.n_in * self.n_hidden
    }

    fn b1(&self) -> std::ops::Range<usize> {
        let s = self.w1().end;
        s..s + self.n_hidden
    }

    fn w2(&self) -> std::ops::Range<usize> {
        let s = self.b1().end;
        s..s + self.n_hidden * self.n_out
    }

    pub(crate) fn b2(&self) -> std::ops::Range<usize> {
        let s = self.w2().end;
        s..s + self.n_out
    }
}

/// Number of trainable weights of a network with the given dimensions.
pub const fn param_count(dims: MlpDims) -> usize {
    dims.n_in * dims.n_hidden + dims.n_hidden + dims.n_hidden * dims.n_out + dims.n_out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams<T> {
    dims: MlpDims,
    theta: Vec<T>,
}

/// Reverse-mode result of [`MlpParams::backward`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub d_theta: Vec<T>,
    pub d_input: Vec<T>,
}

impl<T: Scalar> MlpParams<T> {
    pub fn from_theta(dims: MlpDims, theta: Vec<T>) -> Result<Self> {
        dims.validate()?;
        check_len("network parameters", param_count(dims), theta.len())?;
        if !crate::scalar::all_finite(&theta) {
            return Err(Error::non_finite("network parameters"));
        }
        Ok(Self { dims, theta })
    }

    pub fn zeros(dims: MlpDims) -> Self {
        Self {
            dims,
            theta: vec![T::zero(); param_count(dims)],
        }
    }

    /// Glorot-uniform weights, zero biases. Deterministic in `seed`.
    pub fn init(dims: MlpDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = vec![T::zero(); param_count(dims)];
        let l1 = (6.0 / (dims.n_in + dims.n_hidden) as f64).sqrt();
        let l2 = (6.0 / (dims.n_hidden + dims.n_out) as f64).sqrt();
        for w in &mut theta[dims.w1()] {
            *w = T::lit(rng.gen_range(-l1..=l1));
        }
        for w in &mut theta[dims.w2()] {
            *w = T::lit(rng.gen_range(-l2..=l2));
        }
        Self { dims, theta }
    }

    pub fn dims(&self) -> MlpDims {
        self.dims
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [T] {
        &mut self.theta
    }

    pub fn into_theta(self) -> Vec<T> {
        self.theta
    }

    pub fn cast<U: Scalar>(&self) -> MlpParams<U> {
        MlpParams {
            dims: self.dims,
            theta: self.theta.iter().map(|&w| U::lit(w.as_f64())).collect(),
        }
    }

    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        check_len("network input", self.dims.n_in, input.len())?;
        let mut hidden = vec![T::zero(); self.dims.n_hidden];
        let mut out = vec![T::zero(); self.dims.n_out];
        self.forward_into(input, &mut hidden, &mut out);
        Ok(out)
    }

    /// Unchecked forward pass keeping the hidden activations.
    #[inline]
    pub fn forward_into(&self, input: &[T], hidden: &mut [T], out: &mut [T]) {
        let d = self.dims;
        let w1 = &self.theta[d.w1()];
        let b1 = &self.theta[d.b1()];
        let w2 = &self.theta[d.w2()];
        let b2 = &self.theta[d.b2()];
        for j in 0..d.n_hidden {
            let row = &w1[j * d.n_in..(j + 1) * d.n_in];
            hidden[j] = (b1[j] + crate::scalar::dot(row, input)).tanh();
        }
        for k in 0..d.n_out {
            let row = &w2[k * d.n_hidden..(k + 1) * d.n_hidden];
            out[k] = b2[k] + crate::scalar::dot(row, hidden);
        }
    }

    pub fn backward(&self, input: &[T], cotangent: &[T]) -> Result<Gradients<T>> {
        check_len("network input", self.dims.n_in, input.len())?;
        check_len("output cotangent", self.dims.n_out, cotangent.len())?;
        let mut hidden = vec![T::zero(); self.dims.n_hidden];
        let mut out = vec![T::zero(); self.dims.n_out];
        self.forward_into(input, &mut hidden, &mut out);
        let mut grads = Gradients {
            d_theta: vec![T::zero(); self.theta.len()],
            d_input: vec![T::zero(); self.dims.n_in],
        };
        self.backward_accumulate(
            input,
            &hidden,
            cotangent,
            &mut grads.d_theta,
            &mut grads.d_input,
        );
        Ok(grads)
    }

    /// Accumulates parameter and input gradients given the hidden
    /// activations of a previous [`forward_into`](Self::forward_into).
    #[inline]
    pub fn backward_accumulate(
        &self,
        input: &[T],
        hidden: &[T],
        cot: &[T],
        d_theta: &mut [T],
        d_input: &mut [T],
    ) {
        let d = self.dims;
        let w1 = &self.theta[d.w1()];
        let w2 = &self.theta[d.w2()];
        let (dw1_b1, dw2_b2) = d_theta.split_at_mut(d.w2().start);
        let (dw1, db1) = dw1_b1.split_at_mut(d.b1().start);
        let (dw2, db2) = dw2_b2.split_at_mut(d.n_hidden * d.n_out);

        for k in 0..d.n_out {
            let c = cot[k];
            if c == T::zero() {
                continue;
            }
            db2[k] += c;
            crate::scalar::axpy(c, hidden, &mut dw2[k * d.n_hidden..(k + 1) * d.n_hidden]);
        }
        for j in 0..d.n_hidden {
            let mut dh = T::zero();
            for k in 0..d.n_out {
                dh += w2[k * d.n_hidden + j] * cot[k];
            }
            let da = dh * (T::one() - hidden[j] * hidden[j]);
            db1[j] += da;
            crate::scalar::axpy(da, input, &mut dw1[j * d.n_in..(j + 1) * d.n_in]);
            crate::scalar::axpy(da, &w1[j * d.n_in..(j + 1) * d.n_in], d_input);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_counts() {
        let node: Vec<usize> = [5, 8, 10, 12]
            .iter()
            .map(|&h| param_count(MlpDims::new(9, h, 7)))
            .collect();
        let ude: Vec<usize> = [5, 8, 10, 12]
            .iter()
            .map(|&h| param_count(MlpDims::new(6, h, 3)))
            .collect();
        assert_eq!(node, [92, 143, 177, 211]);
        assert_eq!(ude, [53, 83, 103, 123]);
        assert_eq!(param_count(MlpDims::new(1, 1, 1)), 4);
    }

    #[test]
    fn init_is_seeded() {
        let dims = MlpDims::new(9, 5, 7);
        let a = MlpParams::<f64>::init(dims, 1);
        assert_eq!(a, MlpParams::init(dims, 1));
        assert_ne!(a, MlpParams::init(dims, 2));
        assert!(a.theta()[dims.b1()].iter().all(|&b| b == 0.0));
        assert!(a.theta()[dims.b2()].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn init_respects_glorot_bound() {
        let dims = MlpDims::new(9, 5, 7);
        let bound = (6.0f64 / 14.0).sqrt();
        let mut draws = 0;
        for seed in 0..223 {
            let net = MlpParams::<f64>::init(dims, seed);
            for &w in &net.theta()[dims.w1()] {
                assert!(w.abs() <= bound);
                draws += 1;
            }
        }
        assert!(draws >= 10_000);
    }

    #[test]
    fn zero_and_bias_only_outputs() {
        let dims = MlpDims::new(3, 4, 2);
        let net = MlpParams::<f64>::zeros(dims);
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        let mut theta = vec![0.0; param_count(dims)];
        theta[dims.b2()].copy_from_slice(&[0.5, -1.5]);
        let net = MlpParams::from_theta(dims, theta).unwrap();
        assert_eq!(net.forward(&[7.0, 8.0, 9.0]).unwrap(), vec![0.5, -1.5]);
    }

    #[test]
    fn b2_gradient_is_identity() {
        let dims = MlpDims::new(3, 4, 2);
        let net = MlpParams::<f64>::init(dims, 3);
        let g = net.backward(&[0.1, 0.2, 0.3], &[0.0, 1.0]).unwrap();
        assert_eq!(&g.d_theta[dims.b2()], &[0.0, 1.0]);
        let g = net.backward(&[0.1, 0.2, 0.3], &[0.0, 0.0]).unwrap();
        assert!(g.d_theta.iter().chain(&g.d_input).all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_errors() {
        let net = MlpParams::<f64>::zeros(MlpDims::new(3, 4, 2));
        assert!(net.forward(&[1.0]).is_err());
        assert!(net.backward(&[1.0, 2.0, 3.0], &[1.0]).is_err());
        assert!(MlpParams::<f64>::from_theta(MlpDims::new(3, 4, 2), vec![0.0; 5]).is_err());
    }

    #[test]
    fn single_precision_forward_tracks_double() {
        let net = MlpParams::<f64>::init(MlpDims::new(9, 10, 7), 4);
        let x: Vec<f64> = (0..9).map(|i| 0.3 * i as f64 - 1.0).collect();
        let y64 = net.forward(&x).unwrap();
        let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        let y32 = net.cast::<f32>().forward(&x32).unwrap();
        for (a, b) in y64.iter().zip(&y32) {
            assert!((a - *b as f64).abs() < 1e-5);
        }
    }
}
