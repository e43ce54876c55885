use super::params::{sigmoid, LstmParams};
use crate::error::{Error, Result};
use crate::ndcore::Tensor;

/// Intermediate values of one cell step.
#[derive(Debug, Clone)]
pub struct StepCache {
    x: Tensor,
    h_prev: Tensor,
    c_prev: Tensor,
    i: Tensor,
    f: Tensor,
    o: Tensor,
    g: Tensor,
    tanh_c: Tensor,
}

fn gate(x: &Tensor, h: &Tensor, w: &Tensor, u: &Tensor, b: &Tensor) -> Result<Tensor> {
    x.matmul(w)?.add(&h.matmul(u)?)?.add_row(b)
}

fn step_cached(
    x: &Tensor,
    h: &Tensor,
    c: &Tensor,
    p: &LstmParams,
) -> Result<(Tensor, Tensor, StepCache)> {
    p.check()?;
    let units = p.units();
    if x.rank() != 2 || x.cols() != p.input_size() {
        return Err(Error::invalid(format!(
            "LSTM expects batch×{} input, got {:?}",
            p.input_size(),
            x.shape()
        )));
    }
    let batch = x.rows();
    if h.shape() != [batch, units] || c.shape() != [batch, units] {
        return Err(Error::invalid(format!(
            "LSTM state must be {batch}×{units}, got h {:?} c {:?}",
            h.shape(),
            c.shape()
        )));
    }
    let i = gate(x, h, &p.w_i, &p.u_i, &p.b_i)?.map(sigmoid);
    let f = gate(x, h, &p.w_f, &p.u_f, &p.b_f)?.map(sigmoid);
    let o = gate(x, h, &p.w_o, &p.u_o, &p.b_o)?.map(sigmoid);
    let g = gate(x, h, &p.w_g, &p.u_g, &p.b_g)?.map(f64::tanh);
    let c_new = f.mul(c)?.add(&i.mul(&g)?)?;
    let tanh_c = c_new.map(f64::tanh);
    let h_new = o.mul(&tanh_c)?;
    let cache = StepCache {
        x: x.clone(),
        h_prev: h.clone(),
        c_prev: c.clone(),
        i,
        f,
        o,
        g,
        tanh_c,
    };
    Ok((h_new, c_new, cache))
}

/// One LSTM cell update, returning `(h', c')`.
pub fn lstm_step(
    x: &Tensor,
    h: &Tensor,
    c: &Tensor,
    params: &LstmParams,
) -> Result<(Tensor, Tensor)> {
    let (h, c, _) = step_cached(x, h, c, params)?;
    Ok((h, c))
}

/// Tape of a full sequence pass through one layer.
#[derive(Debug, Clone)]
pub struct LstmTape {
    steps: Vec<StepCache>,
}

/// Runs a layer over a time-major list of `batch × in` inputs from a zero
/// state and returns every hidden state.
pub fn lstm_sequence(xs: &[Tensor], params: &LstmParams) -> Result<(Vec<Tensor>, LstmTape)> {
    let batch = xs.first().map_or(0, Tensor::rows);
    let units = params.units();
    let mut h = Tensor::zeros(&[batch, units]);
    let mut c = Tensor::zeros(&[batch, units]);
    let mut hs = Vec::with_capacity(xs.len());
    let mut steps = Vec::with_capacity(xs.len());
    for x in xs {
        let (h_new, c_new, cache) = step_cached(x, &h, &c, params)?;
        h = h_new;
        c = c_new;
        hs.push(h.clone());
        steps.push(cache);
    }
    Ok((hs, LstmTape { steps }))
}

/// Backpropagation through time.
///
/// `grad_h[t]` is the loss gradient flowing into hidden state `t` from above
/// (`None` where nothing reads that state). Returns the per-step input
/// gradients and parameter gradients in [`LstmParams::tensors`] order.
pub fn lstm_sequence_backward(
    tape: &LstmTape,
    params: &LstmParams,
    grad_h: &[Option<Tensor>],
) -> Result<(Vec<Tensor>, Vec<Tensor>)> {
    let n = tape.steps.len();
    if grad_h.len() != n {
        return Err(Error::invalid(
            "one upstream gradient slot per time step required",
        ));
    }
    let mut grads: Vec<Tensor> = params
        .tensors()
        .iter()
        .map(|t| Tensor::zeros(t.shape()))
        .collect();
    let mut grad_x = vec![Tensor::zeros(&[0]); n];
    let Some(last) = tape.steps.last() else {
        return Ok((grad_x, grads));
    };
    let mut dh_next = Tensor::zeros(last.h_prev.shape());
    let mut dc_next = Tensor::zeros(last.c_prev.shape());
    let ws = [&params.w_i, &params.w_f, &params.w_o, &params.w_g];
    let us = [&params.u_i, &params.u_f, &params.u_o, &params.u_g];

    for t in (0..n).rev() {
        let s = &tape.steps[t];
        let dh = match &grad_h[t] {
            Some(g) => dh_next.add(g)?,
            None => dh_next.clone(),
        };
        let d_o = dh.mul(&s.tanh_c)?;
        let dtanh = dh
            .mul(&s.o)?
            .zip_map(&s.tanh_c, |d, tc| d * (1.0 - tc * tc))?;
        let dc = dc_next.add(&dtanh)?;
        let d_i = dc.mul(&s.g)?;
        let d_g = dc.mul(&s.i)?;
        let d_f = dc.mul(&s.c_prev)?;
        dc_next = dc.mul(&s.f)?;

        let sig_back = |d: &Tensor, a: &Tensor| d.zip_map(a, |d, a| d * a * (1.0 - a));
        let pre = [
            sig_back(&d_i, &s.i)?,
            sig_back(&d_f, &s.f)?,
            sig_back(&d_o, &s.o)?,
            d_g.zip_map(&s.g, |d, g| d * (1.0 - g * g))?,
        ];

        let mut dx = Tensor::zeros(s.x.shape());
        let mut dh_prev = Tensor::zeros(s.h_prev.shape());
        for k in 0..4 {
            grads[k].axpy(1.0, &s.x.matmul_tn(&pre[k])?)?;
            grads[4 + k].axpy(1.0, &s.h_prev.matmul_tn(&pre[k])?)?;
            grads[8 + k].axpy(1.0, &pre[k].sum_rows()?)?;
            dx.axpy(1.0, &pre[k].matmul_nt(ws[k])?)?;
            dh_prev.axpy(1.0, &pre[k].matmul_nt(us[k])?)?;
        }
        grad_x[t] = dx;
        dh_next = dh_prev;
    }
    Ok((grad_x, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_zero_state() {
        let p = LstmParams::zeros(1, 1);
        let z = Tensor::zeros(&[1, 1]);
        let (h, c) = lstm_step(&z, &z, &z, &p).unwrap();
        assert_eq!(h.data(), &[0.0]);
        assert_eq!(c.data(), &[0.0]);
    }

    #[test]
    fn zero_params_unit_cell() {
        let p = LstmParams::zeros(1, 1);
        let z = Tensor::zeros(&[1, 1]);
        let one = Tensor::full(&[1, 1], 1.0);
        let (h, c) = lstm_step(&z, &z, &one, &p).unwrap();
        assert!((c.data()[0] - 0.5).abs() < 1e-15);
        // 0.5 * tanh(0.5)
        assert!((h.data()[0] - 0.231_058_578_630_004_9).abs() < 1e-12);
        assert!((h.data()[0] - 0.2311).abs() < 1e-4);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = LstmParams::zeros(2, 3);
        let z = Tensor::zeros(&[1, 3]);
        assert!(lstm_step(&Tensor::zeros(&[1, 3]), &z, &z, &p).is_err());
        assert!(lstm_step(&Tensor::zeros(&[1, 2]), &Tensor::zeros(&[1, 2]), &z, &p).is_err());
    }
}
