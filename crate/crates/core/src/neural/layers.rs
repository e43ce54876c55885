//! Dense layers with their stochastic variants.
//!
//! Every variant splits into a noise draw ([`UqDense::sample_noise`]) and a
//! pure function of `(input, params, noise)`. Training, Monte Carlo
//! prediction and gradient checks all go through the same pure forward, so a
//! frozen [`DenseNoise`] makes the layer deterministic and differentiable.

use serde::{Deserialize, Serialize};

use super::params::{sigmoid, DenseParams, VariationalDenseParams};
use crate::error::{Error, Result};
use crate::ndcore::{sample_bernoulli_mask, sample_gaussian, sample_rademacher, RngStream, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, t: &Tensor) -> Tensor {
        match self {
            Activation::Relu => t.map(|v| v.max(0.0)),
            Activation::Identity => t.clone(),
        }
    }

    /// Multiplies an upstream gradient by the activation derivative at `pre`.
    fn backprop(self, pre: &Tensor, grad: &Tensor) -> Result<Tensor> {
        match self {
            Activation::Relu => pre.zip_map(grad, |p, g| if p > 0.0 { g } else { 0.0 }),
            Activation::Identity => Ok(grad.clone()),
        }
    }
}

/// Stochastic mechanism of a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "p", rename_all = "lowercase")]
pub enum DenseKind {
    Plain,
    /// Inverted dropout on the layer's output activations.
    Dropout(f64),
    /// Inverted Bernoulli mask on weights and bias.
    DropConnect(f64),
    /// Bayes by Backprop: one weight sample per batch.
    Bbb,
    /// Flipout: shared perturbation decorrelated per example by sign vectors.
    Flipout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DenseWeights {
    Point(DenseParams),
    Gaussian(VariationalDenseParams),
}

/// A realization of a layer's randomness for one batch. Masks are stored
/// already scaled by `1/(1-p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseNoise {
    None,
    OutputMask(Tensor),
    WeightMask {
        w: Tensor,
        b: Tensor,
    },
    WeightEps {
        w: Tensor,
        b: Tensor,
    },
    Flipout {
        w_eps: Tensor,
        b_eps: Tensor,
        s: Tensor,
        r: Tensor,
        t: Tensor,
    },
}

fn check_drop_prob(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "drop probability must lie in [0, 1), got {p}"
        )))
    }
}

fn scaled_mask(shape: &[usize], p: f64, rng: &mut RngStream) -> Result<Tensor> {
    check_drop_prob(p)?;
    let scale = 1.0 / (1.0 - p);
    Ok(sample_bernoulli_mask(shape, 1.0 - p, rng)?.map(|m| m * scale))
}

fn check_input(x: &Tensor, fan_in: usize) -> Result<()> {
    if x.rank() != 2 || x.cols() != fan_in {
        return Err(Error::invalid(format!(
            "layer expects batch×{fan_in} input, got {:?}",
            x.shape()
        )));
    }
    Ok(())
}

/// `activation(x·W + b)`.
pub fn dense_forward(x: &Tensor, params: &DenseParams, activation: Activation) -> Result<Tensor> {
    params.check()?;
    check_input(x, params.fan_in())?;
    Ok(activation.apply(&x.matmul(&params.w)?.add_row(&params.b)?))
}

/// Dense layer followed by inverted dropout on its activations.
pub fn dropout_forward(
    x: &Tensor,
    params: &DenseParams,
    activation: Activation,
    drop_prob: f64,
    rng: &mut RngStream,
    stochastic: bool,
) -> Result<Tensor> {
    let layer = UqDense::new(
        DenseKind::Dropout(drop_prob),
        DenseWeights::Point(params.clone()),
        activation,
    )?;
    let noise = layer.sample_noise(x.rows(), rng, stochastic)?;
    layer.forward(x, &noise)
}

/// Dense layer whose weights and bias are masked by inverted Bernoulli noise.
pub fn dropconnect_forward(
    x: &Tensor,
    params: &DenseParams,
    activation: Activation,
    drop_prob: f64,
    rng: &mut RngStream,
    stochastic: bool,
) -> Result<Tensor> {
    let layer = UqDense::new(
        DenseKind::DropConnect(drop_prob),
        DenseWeights::Point(params.clone()),
        activation,
    )?;
    let noise = layer.sample_noise(x.rows(), rng, stochastic)?;
    layer.forward(x, &noise)
}

pub fn bbb_dense_forward(
    x: &Tensor,
    params: &VariationalDenseParams,
    activation: Activation,
    rng: &mut RngStream,
    stochastic: bool,
) -> Result<Tensor> {
    let layer = UqDense::new(
        DenseKind::Bbb,
        DenseWeights::Gaussian(params.clone()),
        activation,
    )?;
    let noise = layer.sample_noise(x.rows(), rng, stochastic)?;
    layer.forward(x, &noise)
}

pub fn flipout_dense_forward(
    x: &Tensor,
    params: &VariationalDenseParams,
    activation: Activation,
    rng: &mut RngStream,
    stochastic: bool,
) -> Result<Tensor> {
    let layer = UqDense::new(
        DenseKind::Flipout,
        DenseWeights::Gaussian(params.clone()),
        activation,
    )?;
    let noise = layer.sample_noise(x.rows(), rng, stochastic)?;
    layer.forward(x, &noise)
}

/// Values kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Tensor,
    pre: Tensor,
    /// Effective weight matrix used by the pass (masked or sampled).
    w_eff: Option<Tensor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqDense {
    pub kind: DenseKind,
    pub activation: Activation,
    pub weights: DenseWeights,
}

impl UqDense {
    pub fn new(kind: DenseKind, weights: DenseWeights, activation: Activation) -> Result<Self> {
        match (&kind, &weights) {
            (DenseKind::Bbb | DenseKind::Flipout, DenseWeights::Point(_)) => {
                return Err(Error::invalid("variational layer needs Gaussian weights"))
            }
            (
                DenseKind::Plain | DenseKind::Dropout(_) | DenseKind::DropConnect(_),
                DenseWeights::Gaussian(_),
            ) => return Err(Error::invalid("point-estimate layer needs point weights")),
            _ => {}
        }
        if let DenseKind::Dropout(p) | DenseKind::DropConnect(p) = kind {
            check_drop_prob(p)?;
        }
        match &weights {
            DenseWeights::Point(p) => p.check()?,
            DenseWeights::Gaussian(p) => p.check()?,
        }
        Ok(Self {
            kind,
            activation,
            weights,
        })
    }

    pub fn init(
        kind: DenseKind,
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let weights = match kind {
            DenseKind::Bbb | DenseKind::Flipout => {
                DenseWeights::Gaussian(VariationalDenseParams::init(fan_in, fan_out, rng))
            }
            _ => DenseWeights::Point(DenseParams::init(fan_in, fan_out, rng)),
        };
        Self::new(kind, weights, activation)
    }

    pub fn fan_in(&self) -> usize {
        match &self.weights {
            DenseWeights::Point(p) => p.fan_in(),
            DenseWeights::Gaussian(p) => p.fan_in(),
        }
    }

    pub fn fan_out(&self) -> usize {
        match &self.weights {
            DenseWeights::Point(p) => p.fan_out(),
            DenseWeights::Gaussian(p) => p.fan_out(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self.kind, DenseKind::Plain)
    }

    pub fn variational(&self) -> Option<&VariationalDenseParams> {
        match &self.weights {
            DenseWeights::Gaussian(p) => Some(p),
            DenseWeights::Point(_) => None,
        }
    }

    /// Parameter tensors: `[w, b]` or `[w_mu, w_rho, b_mu, b_rho]`.
    pub fn tensors(&self) -> Vec<&Tensor> {
        match &self.weights {
            DenseWeights::Point(p) => vec![&p.w, &p.b],
            DenseWeights::Gaussian(p) => vec![&p.w_mu, &p.w_rho, &p.b_mu, &p.b_rho],
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        match &mut self.weights {
            DenseWeights::Point(p) => vec![&mut p.w, &mut p.b],
            DenseWeights::Gaussian(p) => vec![&mut p.w_mu, &mut p.w_rho, &mut p.b_mu, &mut p.b_rho],
        }
    }

    pub fn tensor_names(&self) -> &'static [&'static str] {
        match &self.weights {
            DenseWeights::Point(_) => &["w", "b"],
            DenseWeights::Gaussian(_) => &["w_mu", "w_rho", "b_mu", "b_rho"],
        }
    }

    pub fn sample_noise(
        &self,
        batch: usize,
        rng: &mut RngStream,
        stochastic: bool,
    ) -> Result<DenseNoise> {
        if !stochastic {
            return Ok(DenseNoise::None);
        }
        let (n_in, n_out) = (self.fan_in(), self.fan_out());
        Ok(match self.kind {
            DenseKind::Plain => DenseNoise::None,
            DenseKind::Dropout(p) => DenseNoise::OutputMask(scaled_mask(&[batch, n_out], p, rng)?),
            DenseKind::DropConnect(p) => DenseNoise::WeightMask {
                w: scaled_mask(&[n_in, n_out], p, rng)?,
                b: scaled_mask(&[n_out], p, rng)?,
            },
            DenseKind::Bbb => DenseNoise::WeightEps {
                w: sample_gaussian(&[n_in, n_out], 0.0, 1.0, rng)?,
                b: sample_gaussian(&[n_out], 0.0, 1.0, rng)?,
            },
            DenseKind::Flipout => DenseNoise::Flipout {
                w_eps: sample_gaussian(&[n_in, n_out], 0.0, 1.0, rng)?,
                b_eps: sample_gaussian(&[n_out], 0.0, 1.0, rng)?,
                s: sample_rademacher(&[batch, n_in], rng),
                r: sample_rademacher(&[batch, n_out], rng),
                t: sample_rademacher(&[batch, n_out], rng),
            },
        })
    }

    pub fn forward(&self, x: &Tensor, noise: &DenseNoise) -> Result<Tensor> {
        Ok(self.forward_cached(x, noise)?.0)
    }

    pub fn forward_cached(&self, x: &Tensor, noise: &DenseNoise) -> Result<(Tensor, DenseCache)> {
        check_input(x, self.fan_in())?;
        let (pre, w_eff) = match (&self.weights, noise) {
            (DenseWeights::Point(p), DenseNoise::None | DenseNoise::OutputMask(_)) => {
                (x.matmul(&p.w)?.add_row(&p.b)?, None)
            }
            (DenseWeights::Point(p), DenseNoise::WeightMask { w, b }) => {
                let w_eff = p.w.mul(w)?;
                let pre = x.matmul(&w_eff)?.add_row(&p.b.mul(b)?)?;
                (pre, Some(w_eff))
            }
            (DenseWeights::Gaussian(p), DenseNoise::None) => {
                (x.matmul(&p.w_mu)?.add_row(&p.b_mu)?, None)
            }
            (DenseWeights::Gaussian(p), DenseNoise::WeightEps { w, b }) => {
                let w_eff = p.w_mu.add(&p.w_sigma().mul(w)?)?;
                let b_eff = p.b_mu.add(&p.b_sigma().mul(b)?)?;
                (x.matmul(&w_eff)?.add_row(&b_eff)?, Some(w_eff))
            }
            (
                DenseWeights::Gaussian(p),
                DenseNoise::Flipout {
                    w_eps,
                    b_eps,
                    s,
                    r,
                    t,
                },
            ) => {
                let delta_w = p.w_sigma().mul(w_eps)?;
                let delta_b = p.b_sigma().mul(b_eps)?;
                let mean = x.matmul(&p.w_mu)?.add_row(&p.b_mu)?;
                let pert = x.mul(s)?.matmul(&delta_w)?.mul(r)?;
                let bias_pert = Tensor::zeros(t.shape()).add_row(&delta_b)?.mul(t)?;
                (mean.add(&pert)?.add(&bias_pert)?, Some(delta_w))
            }
            _ => return Err(Error::invalid("noise does not match layer kind")),
        };
        let mut out = self.activation.apply(&pre);
        if let DenseNoise::OutputMask(m) = noise {
            out = out.mul(m)?;
        }
        Ok((
            out,
            DenseCache {
                input: x.clone(),
                pre,
                w_eff,
            },
        ))
    }

    /// Returns the input gradient and parameter gradients in [`Self::tensors`] order.
    pub fn backward(
        &self,
        cache: &DenseCache,
        noise: &DenseNoise,
        grad_out: &Tensor,
    ) -> Result<(Tensor, Vec<Tensor>)> {
        let grad_act = match noise {
            DenseNoise::OutputMask(m) => grad_out.mul(m)?,
            _ => grad_out.clone(),
        };
        let gp = self.activation.backprop(&cache.pre, &grad_act)?;
        let x = &cache.input;
        match (&self.weights, noise) {
            (DenseWeights::Point(p), DenseNoise::None | DenseNoise::OutputMask(_)) => {
                let gx = gp.matmul_nt(&p.w)?;
                Ok((gx, vec![x.matmul_tn(&gp)?, gp.sum_rows()?]))
            }
            (DenseWeights::Point(_), DenseNoise::WeightMask { w, b }) => {
                let w_eff = cache.w_eff.as_ref().expect("cached masked weights");
                let gx = gp.matmul_nt(w_eff)?;
                let gw = x.matmul_tn(&gp)?.mul(w)?;
                let gb = gp.sum_rows()?.mul(b)?;
                Ok((gx, vec![gw, gb]))
            }
            (DenseWeights::Gaussian(p), DenseNoise::None) => {
                let gx = gp.matmul_nt(&p.w_mu)?;
                let zw = Tensor::zeros(p.w_rho.shape());
                let zb = Tensor::zeros(p.b_rho.shape());
                Ok((gx, vec![x.matmul_tn(&gp)?, zw, gp.sum_rows()?, zb]))
            }
            (DenseWeights::Gaussian(p), DenseNoise::WeightEps { w, b }) => {
                let w_eff = cache.w_eff.as_ref().expect("cached sampled weights");
                let gx = gp.matmul_nt(w_eff)?;
                let gw = x.matmul_tn(&gp)?;
                let gb = gp.sum_rows()?;
                let g_wrho = gw.mul(w)?.mul(&p.w_rho.map(sigmoid))?;
                let g_brho = gb.mul(b)?.mul(&p.b_rho.map(sigmoid))?;
                Ok((gx, vec![gw, g_wrho, gb, g_brho]))
            }
            (
                DenseWeights::Gaussian(p),
                DenseNoise::Flipout {
                    w_eps,
                    b_eps,
                    s,
                    r,
                    t,
                },
            ) => {
                let delta_w = cache.w_eff.as_ref().expect("cached perturbation");
                let gr = gp.mul(r)?;
                let gx = gp
                    .matmul_nt(&p.w_mu)?
                    .add(&gr.matmul_nt(delta_w)?.mul(s)?)?;
                let g_wmu = x.matmul_tn(&gp)?;
                let g_bmu = gp.sum_rows()?;
                let g_dw = x.mul(s)?.matmul_tn(&gr)?;
                let g_db = gp.mul(t)?.sum_rows()?;
                let g_wrho = g_dw.mul(w_eps)?.mul(&p.w_rho.map(sigmoid))?;
                let g_brho = g_db.mul(b_eps)?.mul(&p.b_rho.map(sigmoid))?;
                Ok((gx, vec![g_wmu, g_wrho, g_bmu, g_brho]))
            }
            _ => Err(Error::invalid("noise does not match layer kind")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::params::softplus_inv;

    fn t2(rows: &[Vec<f64>]) -> Tensor {
        Tensor::from_rows(rows).unwrap()
    }

    fn dense(w: Tensor, b: Vec<f64>) -> DenseParams {
        DenseParams::new(w, Tensor::vector(b)).unwrap()
    }

    #[test]
    fn dense_examples() {
        let eye = dense(t2(&[vec![1.0, 0.0], vec![0.0, 1.0]]), vec![0.0, 0.0]);
        let y = dense_forward(&t2(&[vec![1.0, 2.0]]), &eye, Activation::Relu).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0]);

        let ones = dense(t2(&[vec![1.0], vec![1.0]]), vec![0.0]);
        let y = dense_forward(&t2(&[vec![1.0, -1.0]]), &ones, Activation::Relu).unwrap();
        assert_eq!(y.data(), &[0.0]);

        let bias = dense(t2(&[vec![3.0]]), vec![5.0]);
        let y = dense_forward(&t2(&[vec![0.0]]), &bias, Activation::Identity).unwrap();
        assert_eq!(y.data(), &[5.0]);

        assert!(dense_forward(&t2(&[vec![1.0, 2.0, 3.0]]), &eye, Activation::Relu).is_err());
    }

    #[test]
    fn dropconnect_enumeration() {
        let p = dense(t2(&[vec![1.0], vec![1.0]]), vec![0.0]);
        let x = t2(&[vec![1.0, 1.0]]);
        let mut rng = RngStream::new(3);
        let mut seen = [false; 3];
        for _ in 0..200 {
            let y = dropconnect_forward(&x, &p, Activation::Identity, 0.5, &mut rng, true).unwrap();
            let v = y.data()[0];
            assert!(v == 0.0 || v == 2.0 || v == 4.0, "unexpected {v}");
            seen[(v / 2.0) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn drop_rates_validated() {
        let p = dense(t2(&[vec![1.0]]), vec![0.0]);
        let x = t2(&[vec![1.0]]);
        let mut rng = RngStream::new(0);
        assert!(dropout_forward(&x, &p, Activation::Identity, 1.0, &mut rng, true).is_err());
        assert!(dropconnect_forward(&x, &p, Activation::Identity, -0.1, &mut rng, true).is_err());
    }

    #[test]
    fn flipout_decorrelates_identical_rows() {
        let sigma = softplus_inv(0.5);
        let p = VariationalDenseParams::new(
            Tensor::full(&[3, 2], 0.3),
            Tensor::full(&[3, 2], sigma),
            Tensor::zeros(&[2]),
            Tensor::full(&[2], sigma),
        )
        .unwrap();
        let x = t2(&[vec![1.0, -2.0, 0.5], vec![1.0, -2.0, 0.5]]);
        let y = flipout_dense_forward(&x, &p, Activation::Identity, &mut RngStream::new(8), true)
            .unwrap();
        assert_ne!(&y.data()[0..2], &y.data()[2..4]);
        let y =
            bbb_dense_forward(&x, &p, Activation::Identity, &mut RngStream::new(8), true).unwrap();
        assert_eq!(&y.data()[0..2], &y.data()[2..4]);
    }

    #[test]
    fn noise_kind_mismatch_rejected() {
        let layer = UqDense::init(
            DenseKind::Plain,
            2,
            1,
            Activation::Relu,
            &mut RngStream::new(1),
        )
        .unwrap();
        let bad = DenseNoise::WeightEps {
            w: Tensor::zeros(&[2, 1]),
            b: Tensor::zeros(&[1]),
        };
        assert!(layer.forward(&Tensor::zeros(&[1, 2]), &bad).is_err());
        assert!(UqDense::new(
            DenseKind::Bbb,
            DenseWeights::Point(DenseParams::init(2, 1, &mut RngStream::new(1))),
            Activation::Relu
        )
        .is_err());
    }
}
