#![allow(dead_code)]

use tsuq::ndcore::{finite_diff_grad, sample_gaussian, RngStream, Tensor};
use tsuq::neural::{
    gaussian_nll_with_grad, kl_gaussian_with_grad, lstm_sequence, lstm_sequence_backward,
    mse_with_grad, Activation, DenseKind, LstmParams, UqDense, VariationalDenseParams,
};

pub const FD_EPS: f64 = 1e-6;

pub fn randn(shape: &[usize], rng: &mut RngStream) -> Tensor {
    sample_gaussian(shape, 0.0, 1.0, rng).unwrap()
}

fn norm(t: &Tensor) -> f64 {
    t.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or the absolute gap when both are tiny.
pub fn rel_err(a: &Tensor, b: &Tensor) -> f64 {
    let gap = norm(&a.sub(b).unwrap());
    gap / norm(a).max(norm(b)).max(1e-8)
}

fn weighted_sum(out: &Tensor, r: &Tensor) -> f64 {
    out.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

/// Worst relative error over the input and every parameter tensor of a
/// dense layer with its noise frozen.
pub fn dense_grad_error(kind: DenseKind, activation: Activation, rng: &mut RngStream) -> f64 {
    let (batch, fan_in, fan_out) = (5, 4, 3);
    let mut layer = UqDense::init(kind, fan_in, fan_out, activation, rng).unwrap();
    for t in layer.tensors_mut() {
        let jitter = randn(t.shape(), rng).scale(0.5);
        t.axpy(1.0, &jitter).unwrap();
    }
    let noise = layer.sample_noise(batch, rng, true).unwrap();
    let x = randn(&[batch, fan_in], rng);
    let r = randn(&[batch, fan_out], rng);

    let (_, cache) = layer.forward_cached(&x, &noise).unwrap();
    let (gx, gp) = layer.backward(&cache, &noise, &r).unwrap();

    let fx = finite_diff_grad(
        |xp| weighted_sum(&layer.forward(xp, &noise).unwrap(), &r),
        &x,
        FD_EPS,
    )
    .unwrap();
    let mut worst = rel_err(&gx, &fx);
    for (k, g) in gp.iter().enumerate() {
        let base = layer.tensors()[k].clone();
        let fd = finite_diff_grad(
            |p| {
                let mut probe = layer.clone();
                *probe.tensors_mut()[k] = p.clone();
                weighted_sum(&probe.forward(&x, &noise).unwrap(), &r)
            },
            &base,
            FD_EPS,
        )
        .unwrap();
        worst = worst.max(rel_err(g, &fd));
    }
    worst
}

/// Worst relative error of backpropagation through a 12-step LSTM layer.
pub fn lstm_grad_error(rng: &mut RngStream) -> f64 {
    let (batch, input, units, steps) = (2, 2, 3, 12);
    let mut params = LstmParams::init(input, units, rng);
    for t in params.tensors_mut() {
        let jitter = randn(t.shape(), rng).scale(0.3);
        t.axpy(1.0, &jitter).unwrap();
    }
    let xs: Vec<Tensor> = (0..steps).map(|_| randn(&[batch, input], rng)).collect();
    let rs: Vec<Tensor> = (0..steps).map(|_| randn(&[batch, units], rng)).collect();
    let loss = |p: &LstmParams, xs: &[Tensor]| -> f64 {
        let (hs, _) = lstm_sequence(xs, p).unwrap();
        hs.iter().zip(&rs).map(|(h, r)| weighted_sum(h, r)).sum()
    };
    let (_, tape) = lstm_sequence(&xs, &params).unwrap();
    let grad_h: Vec<Option<Tensor>> = rs.iter().cloned().map(Some).collect();
    let (gx, gp) = lstm_sequence_backward(&tape, &params, &grad_h).unwrap();

    let mut worst: f64 = 0.0;
    for (k, g) in gp.iter().enumerate() {
        let base = params.tensors()[k].clone();
        let fd = finite_diff_grad(
            |t| {
                let mut probe = params.clone();
                *probe.tensors_mut()[k] = t.clone();
                loss(&probe, &xs)
            },
            &base,
            FD_EPS,
        )
        .unwrap();
        worst = worst.max(rel_err(g, &fd));
    }
    for t in [0, steps / 2, steps - 1] {
        let fd = finite_diff_grad(
            |xt| {
                let mut probe = xs.clone();
                probe[t] = xt.clone();
                loss(&params, &probe)
            },
            &xs[t],
            FD_EPS,
        )
        .unwrap();
        worst = worst.max(rel_err(&gx[t], &fd));
    }
    worst
}

pub fn mse_grad_error(rng: &mut RngStream) -> f64 {
    let mu = randn(&[6, 3], rng);
    let y = randn(&[6, 3], rng);
    let (_, g) = mse_with_grad(&mu, &y).unwrap();
    let fd = finite_diff_grad(|m| mse_with_grad(m, &y).unwrap().0, &mu, FD_EPS).unwrap();
    rel_err(&g, &fd)
}

pub fn nll_grad_error(rng: &mut RngStream) -> f64 {
    let mu = randn(&[6, 3], rng);
    let lv = randn(&[6, 3], rng);
    let y = randn(&[6, 3], rng);
    let (_, g_mu, g_lv) = gaussian_nll_with_grad(&mu, &lv, &y).unwrap();
    let f_mu = finite_diff_grad(
        |m| gaussian_nll_with_grad(m, &lv, &y).unwrap().0,
        &mu,
        FD_EPS,
    )
    .unwrap();
    let f_lv = finite_diff_grad(
        |l| gaussian_nll_with_grad(&mu, l, &y).unwrap().0,
        &lv,
        FD_EPS,
    )
    .unwrap();
    rel_err(&g_mu, &f_mu).max(rel_err(&g_lv, &f_lv))
}

pub fn kl_grad_error(rng: &mut RngStream) -> f64 {
    let w_mu = randn(&[3, 2], rng);
    let w_rho = randn(&[3, 2], rng).map(|v| v - 2.0);
    let b_mu = randn(&[2], rng);
    let b_rho = randn(&[2], rng).map(|v| v - 2.0);
    let prior = 0.5 + rng.uniform();
    let params = VariationalDenseParams::new(w_mu, w_rho, b_mu, b_rho).unwrap();
    let (_, grads) = kl_gaussian_with_grad(&params, prior).unwrap();
    let pick = |p: &VariationalDenseParams, k: usize| -> Tensor {
        [&p.w_mu, &p.w_rho, &p.b_mu, &p.b_rho][k].clone()
    };
    let mut worst: f64 = 0.0;
    for (k, g) in grads.iter().enumerate() {
        let fd = finite_diff_grad(
            |t| {
                let mut probe = params.clone();
                *[
                    &mut probe.w_mu,
                    &mut probe.w_rho,
                    &mut probe.b_mu,
                    &mut probe.b_rho,
                ][k] = t.clone();
                kl_gaussian_with_grad(&probe, prior).unwrap().0
            },
            &pick(&params, k),
            FD_EPS,
        )
        .unwrap();
        worst = worst.max(rel_err(g, &fd));
    }
    worst
}
