use super::params::{sigmoid, VariationalDenseParams};
use crate::error::{Error, Result};
use crate::ndcore::Tensor;

/// Bounds applied to the Gaussian head's log-variance output.
pub const LOG_VAR_MIN: f64 = -10.0;
pub const LOG_VAR_MAX: f64 = 10.0;

fn same_shape(a: &Tensor, b: &Tensor, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "{what}: shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid(format!("{what}: empty input")));
    }
    Ok(())
}

/// `N⁻¹ Σ (log σ² + (μ − y)² / σ²)` with `σ² = exp(log_var)`.
pub fn gaussian_nll_loss(mu: &Tensor, log_var: &Tensor, y: &Tensor) -> Result<f64> {
    Ok(gaussian_nll_with_grad(mu, log_var, y)?.0)
}

/// Loss together with its gradients with respect to `mu` and `log_var`.
pub fn gaussian_nll_with_grad(
    mu: &Tensor,
    log_var: &Tensor,
    y: &Tensor,
) -> Result<(f64, Tensor, Tensor)> {
    same_shape(mu, y, "gaussian_nll_loss")?;
    same_shape(log_var, y, "gaussian_nll_loss")?;
    if let Some(lv) = log_var
        .data()
        .iter()
        .find(|lv| !(LOG_VAR_MIN..=LOG_VAR_MAX).contains(*lv))
    {
        return Err(Error::invalid(format!(
            "log variance {lv} outside the clamp range"
        )));
    }
    let n = y.len() as f64;
    let mut total = 0.0;
    let mut g_mu = Vec::with_capacity(y.len());
    let mut g_lv = Vec::with_capacity(y.len());
    for ((&m, &lv), &t) in mu.data().iter().zip(log_var.data()).zip(y.data()) {
        let inv_var = (-lv).exp();
        let r = m - t;
        total += lv + r * r * inv_var;
        g_mu.push(2.0 * r * inv_var / n);
        g_lv.push((1.0 - r * r * inv_var) / n);
    }
    let shape = y.shape().to_vec();
    Ok((
        total / n,
        Tensor::new(shape.clone(), g_mu)?,
        Tensor::new(shape, g_lv)?,
    ))
}

pub fn mse_loss(mu: &Tensor, y: &Tensor) -> Result<f64> {
    Ok(mse_with_grad(mu, y)?.0)
}

pub fn mse_with_grad(mu: &Tensor, y: &Tensor) -> Result<(f64, Tensor)> {
    same_shape(mu, y, "mse_loss")?;
    let n = y.len() as f64;
    let resid = mu.sub(y)?;
    let loss = resid.data().iter().map(|r| r * r).sum::<f64>() / n;
    Ok((loss, resid.scale(2.0 / n)))
}

/// `KL(q ‖ N(0, prior_std²))` summed over all weights and biases.
pub fn kl_gaussian(params: &VariationalDenseParams, prior_std: f64) -> Result<f64> {
    Ok(kl_gaussian_with_grad(params, prior_std)?.0)
}

/// KL value and gradients in `[w_mu, w_rho, b_mu, b_rho]` order.
pub fn kl_gaussian_with_grad(
    params: &VariationalDenseParams,
    prior_std: f64,
) -> Result<(f64, Vec<Tensor>)> {
    if !(prior_std > 0.0) {
        return Err(Error::invalid(format!(
            "prior std must be positive, got {prior_std}"
        )));
    }
    let prior_var = prior_std * prior_std;
    let mut total = 0.0;
    let mut part = |mu: &Tensor, rho: &Tensor| -> Result<(Tensor, Tensor)> {
        let mut g_mu = Vec::with_capacity(mu.len());
        let mut g_rho = Vec::with_capacity(mu.len());
        for (&m, &r) in mu.data().iter().zip(rho.data()) {
            let s = super::params::softplus(r);
            total += (prior_std / s).ln() + (s * s + m * m) / (2.0 * prior_var) - 0.5;
            g_mu.push(m / prior_var);
            g_rho.push((-1.0 / s + s / prior_var) * sigmoid(r));
        }
        Ok((
            Tensor::new(mu.shape().to_vec(), g_mu)?,
            Tensor::new(mu.shape().to_vec(), g_rho)?,
        ))
    };
    let (gw_mu, gw_rho) = part(&params.w_mu, &params.w_rho)?;
    let (gb_mu, gb_rho) = part(&params.b_mu, &params.b_rho)?;
    Ok((total, vec![gw_mu, gw_rho, gb_mu, gb_rho]))
}
