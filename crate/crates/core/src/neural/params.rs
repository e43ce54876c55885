use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndcore::{RngStream, Tensor};

/// Initial posterior scale of variational weights.
pub const INIT_SIGMA: f64 = 0.05;

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`softplus`] for positive arguments.
pub fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn glorot(fan_in: usize, fan_out: usize, rng: &mut RngStream) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| (2.0 * rng.uniform() - 1.0) * limit)
        .collect();
    Tensor::new(vec![fan_in, fan_out], data).expect("sized by construction")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    /// `in × out`
    pub w: Tensor,
    /// `out`
    pub b: Tensor,
}

impl DenseParams {
    pub fn new(w: Tensor, b: Tensor) -> Result<Self> {
        let p = Self { w, b };
        p.check()?;
        Ok(p)
    }

    pub fn init(fan_in: usize, fan_out: usize, rng: &mut RngStream) -> Self {
        Self {
            w: glorot(fan_in, fan_out, rng),
            b: Tensor::zeros(&[fan_out]),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.w.rank() != 2 || self.b.rank() != 1 || self.w.cols() != self.b.len() {
            return Err(Error::invalid(format!(
                "dense weights {:?} and bias {:?} disagree",
                self.w.shape(),
                self.b.shape()
            )));
        }
        Ok(())
    }

    pub fn fan_in(&self) -> usize {
        self.w.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.b.len()
    }
}

/// Mean-field Gaussian posterior over a dense layer's weights and bias.
/// Scales are `softplus(rho)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalDenseParams {
    pub w_mu: Tensor,
    pub w_rho: Tensor,
    pub b_mu: Tensor,
    pub b_rho: Tensor,
}

impl VariationalDenseParams {
    pub fn new(w_mu: Tensor, w_rho: Tensor, b_mu: Tensor, b_rho: Tensor) -> Result<Self> {
        let p = Self {
            w_mu,
            w_rho,
            b_mu,
            b_rho,
        };
        p.check()?;
        Ok(p)
    }

    pub fn init(fan_in: usize, fan_out: usize, rng: &mut RngStream) -> Self {
        let rho = softplus_inv(INIT_SIGMA);
        Self {
            w_mu: glorot(fan_in, fan_out, rng),
            w_rho: Tensor::full(&[fan_in, fan_out], rho),
            b_mu: Tensor::zeros(&[fan_out]),
            b_rho: Tensor::full(&[fan_out], rho),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let ok = self.w_mu.rank() == 2
            && self.w_mu.shape() == self.w_rho.shape()
            && self.b_mu.rank() == 1
            && self.b_mu.shape() == self.b_rho.shape()
            && self.w_mu.cols() == self.b_mu.len();
        if !ok {
            return Err(Error::invalid(format!(
                "variational shapes disagree: w {:?}/{:?}, b {:?}/{:?}",
                self.w_mu.shape(),
                self.w_rho.shape(),
                self.b_mu.shape(),
                self.b_rho.shape()
            )));
        }
        Ok(())
    }

    pub fn w_sigma(&self) -> Tensor {
        self.w_rho.map(softplus)
    }

    pub fn b_sigma(&self) -> Tensor {
        self.b_rho.map(softplus)
    }

    pub fn fan_in(&self) -> usize {
        self.w_mu.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.b_mu.len()
    }

    pub fn mean_params(&self) -> DenseParams {
        DenseParams {
            w: self.w_mu.clone(),
            b: self.b_mu.clone(),
        }
    }
}

/// One LSTM layer: input kernels `w_*` (in × units), recurrent kernels
/// `u_*` (units × units) and biases `b_*` for the input, forget, output and
/// candidate gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub w_i: Tensor,
    pub w_f: Tensor,
    pub w_o: Tensor,
    pub w_g: Tensor,
    pub u_i: Tensor,
    pub u_f: Tensor,
    pub u_o: Tensor,
    pub u_g: Tensor,
    pub b_i: Tensor,
    pub b_f: Tensor,
    pub b_o: Tensor,
    pub b_g: Tensor,
}

impl LstmParams {
    pub fn init(input: usize, units: usize, rng: &mut RngStream) -> Self {
        Self {
            w_i: glorot(input, units, rng),
            w_f: glorot(input, units, rng),
            w_o: glorot(input, units, rng),
            w_g: glorot(input, units, rng),
            u_i: glorot(units, units, rng),
            u_f: glorot(units, units, rng),
            u_o: glorot(units, units, rng),
            u_g: glorot(units, units, rng),
            b_i: Tensor::zeros(&[units]),
            b_f: Tensor::zeros(&[units]),
            b_o: Tensor::zeros(&[units]),
            b_g: Tensor::zeros(&[units]),
        }
    }

    pub fn zeros(input: usize, units: usize) -> Self {
        let w = Tensor::zeros(&[input, units]);
        let u = Tensor::zeros(&[units, units]);
        let b = Tensor::zeros(&[units]);
        Self {
            w_i: w.clone(),
            w_f: w.clone(),
            w_o: w.clone(),
            w_g: w,
            u_i: u.clone(),
            u_f: u.clone(),
            u_o: u.clone(),
            u_g: u,
            b_i: b.clone(),
            b_f: b.clone(),
            b_o: b.clone(),
            b_g: b,
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_i.rows()
    }

    pub fn units(&self) -> usize {
        self.b_i.len()
    }

    pub(crate) fn check(&self) -> Result<()> {
        let (n_in, units) = (self.input_size(), self.units());
        let w_ok = [&self.w_i, &self.w_f, &self.w_o, &self.w_g]
            .iter()
            .all(|w| w.shape() == [n_in, units]);
        let u_ok = [&self.u_i, &self.u_f, &self.u_o, &self.u_g]
            .iter()
            .all(|u| u.shape() == [units, units]);
        let b_ok = [&self.b_i, &self.b_f, &self.b_o, &self.b_g]
            .iter()
            .all(|b| b.shape() == [units]);
        if w_ok && u_ok && b_ok {
            Ok(())
        } else {
            Err(Error::invalid("LSTM gate shapes disagree"))
        }
    }

    pub fn tensors(&self) -> [&Tensor; 12] {
        [
            &self.w_i, &self.w_f, &self.w_o, &self.w_g, &self.u_i, &self.u_f, &self.u_o, &self.u_g,
            &self.b_i, &self.b_f, &self.b_o, &self.b_g,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 12] {
        [
            &mut self.w_i,
            &mut self.w_f,
            &mut self.w_o,
            &mut self.w_g,
            &mut self.u_i,
            &mut self.u_f,
            &mut self.u_o,
            &mut self.u_g,
            &mut self.b_i,
            &mut self.b_f,
            &mut self.b_o,
            &mut self.b_g,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_inverse_round_trips() {
        for y in [1e-4, 0.05, 0.5, 3.0, 40.0] {
            assert!((softplus(softplus_inv(y)) - y).abs() < 1e-12 * y.max(1.0));
        }
        assert_eq!(softplus(-1000.0), 0.0);
    }

    #[test]
    fn variational_init_scale() {
        let p = VariationalDenseParams::init(3, 2, &mut RngStream::new(0));
        assert!(p
            .w_sigma()
            .data()
            .iter()
            .all(|s| (s - INIT_SIGMA).abs() < 1e-12));
        assert!(p.b_sigma().data().iter().all(|s| *s > 0.0));
    }

    #[test]
    fn glorot_limit_respected() {
        let p = DenseParams::init(96, 32, &mut RngStream::new(4));
        let limit = (6.0f64 / 128.0).sqrt();
        assert!(p.w.data().iter().all(|v| v.abs() <= limit));
        assert_eq!(p.b.data(), &[0.0; 32]);
    }
}
