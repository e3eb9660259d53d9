//! Layer primitives: forward passes and their analytic adjoints.
//!
//! Convolution and its backward pass are written as accumulations of
//! scaled, shifted rows so the innermost loops run over contiguous slices
//! and vectorize.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand_core::RngCore;

use crate::rng::uniform_f64;
use crate::tensor::Tensor;

use super::NnError;

fn dims3<F: Float>(t: &Tensor<F>, what: &str) -> Result<(usize, usize, usize), NnError> {
    match *t.shape() {
        [c, h, w] => Ok((c, h, w)),
        ref s => Err(NnError::ShapeMismatch(format!("{what}: expected 3-d tensor, got {s:?}"))),
    }
}

/// Per-(ky,kx) overlap of a shifted row with the image: output positions
/// `lo..hi` such that `pos + shift` stays inside `0..len`.
#[inline]
fn shifted_range(len: usize, shift: isize) -> (usize, usize) {
    let lo = if shift < 0 { (-shift) as usize } else { 0 };
    let hi = if shift > 0 { len.saturating_sub(shift as usize) } else { len };
    (lo, hi.max(lo))
}

/// 2-d convolution, stride 1, zero ("same") padding of `k/2`; odd `k`.
///
/// `input` is `(C, H, W)`, `weights` `(F, C, k, k)`, `bias` `(F)`; the output
/// is `(F, H, W)` with
/// `out[f,y,x] = bias[f] + Σ w[f,c,i,j] · in[c, y+i−k/2, x+j−k/2]`.
pub fn conv2d_forward<F: Float>(
    input: &Tensor<F>,
    weights: &Tensor<F>,
    bias: &Tensor<F>,
) -> Result<Tensor<F>, NnError> {
    let (c_in, h, w) = dims3(input, "conv input")?;
    let (f_out, k) = check_conv_shapes(weights, bias, c_in)?;
    let pad = (k / 2) as isize;

    let mut out = Tensor::zeros(&[f_out, h, w]);
    let in_d = input.data();
    let w_d = weights.data();
    let b_d = bias.data();
    let out_d = out.data_mut();

    for f in 0..f_out {
        out_d[f * h * w..(f + 1) * h * w].fill(b_d[f]);
        for c in 0..c_in {
            for ky in 0..k {
                let dy = ky as isize - pad;
                let (y_lo, y_hi) = shifted_range(h, dy);
                for kx in 0..k {
                    let wv = w_d[((f * c_in + c) * k + ky) * k + kx];
                    let dx = kx as isize - pad;
                    let (x_lo, x_hi) = shifted_range(w, dx);
                    if x_lo >= x_hi {
                        continue;
                    }
                    for y in y_lo..y_hi {
                        let y_in = (y as isize + dy) as usize;
                        let o_base = (f * h + y) * w;
                        let i_start = (((c * h + y_in) * w + x_lo) as isize + dx) as usize;
                        let o_row = &mut out_d[o_base + x_lo..o_base + x_hi];
                        let i_row = &in_d[i_start..i_start + (x_hi - x_lo)];
                        for (o, i) in o_row.iter_mut().zip(i_row) {
                            *o = *o + wv * *i;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of a conv2d output w.r.t. its input, weights, and bias.
pub fn conv2d_backward<F: Float>(
    input: &Tensor<F>,
    weights: &Tensor<F>,
    d_out: &Tensor<F>,
) -> Result<(Tensor<F>, Tensor<F>, Tensor<F>), NnError> {
    let (c_in, h, w) = dims3(input, "conv input")?;
    let (f_out, k) = {
        match *weights.shape() {
            [f, c, k, k2] if c == c_in && k == k2 => (f, k),
            ref s => {
                return Err(NnError::ShapeMismatch(format!(
                    "conv weights {s:?} incompatible with input channels {c_in}"
                )))
            }
        }
    };
    if d_out.shape() != [f_out, h, w] {
        return Err(NnError::ShapeMismatch(format!(
            "conv d_out {:?}, expected {:?}",
            d_out.shape(),
            [f_out, h, w]
        )));
    }
    let pad = (k / 2) as isize;

    let mut d_input = Tensor::zeros(&[c_in, h, w]);
    let mut d_weights = Tensor::zeros(weights.shape());
    let mut d_bias = Tensor::zeros(&[f_out]);

    let in_d = input.data();
    let w_d = weights.data();
    let do_d = d_out.data();
    let di_d = d_input.data_mut();
    let dw_d = d_weights.data_mut();
    let db_d = d_bias.data_mut();

    for f in 0..f_out {
        let mut bias_sum = F::zero();
        for v in &do_d[f * h * w..(f + 1) * h * w] {
            bias_sum = bias_sum + *v;
        }
        db_d[f] = bias_sum;

        for c in 0..c_in {
            for ky in 0..k {
                let dy = ky as isize - pad;
                let (y_lo, y_hi) = shifted_range(h, dy);
                for kx in 0..k {
                    let widx = ((f * c_in + c) * k + ky) * k + kx;
                    let wv = w_d[widx];
                    let dx = kx as isize - pad;
                    let (x_lo, x_hi) = shifted_range(w, dx);
                    if x_lo >= x_hi {
                        continue;
                    }
                    // Forward did out[f,y,x] += wv · in[c,y+dy,x+dx] over
                    // exactly these ranges; accumulate both adjoints.
                    let mut w_grad = F::zero();
                    for y in y_lo..y_hi {
                        let y_in = (y as isize + dy) as usize;
                        let o_base = (f * h + y) * w;
                        let i_start = (((c * h + y_in) * w + x_lo) as isize + dx) as usize;
                        let do_row = &do_d[o_base + x_lo..o_base + x_hi];
                        let in_row = &in_d[i_start..i_start + (x_hi - x_lo)];
                        let di_row = &mut di_d[i_start..i_start + (x_hi - x_lo)];
                        for ((g, i), di) in do_row.iter().zip(in_row).zip(di_row) {
                            w_grad = w_grad + *g * *i;
                            *di = *di + wv * *g;
                        }
                    }
                    dw_d[widx] = dw_d[widx] + w_grad;
                }
            }
        }
    }
    Ok((d_input, d_weights, d_bias))
}

fn check_conv_shapes<F: Float>(
    weights: &Tensor<F>,
    bias: &Tensor<F>,
    c_in: usize,
) -> Result<(usize, usize), NnError> {
    let (f_out, k) = match *weights.shape() {
        [f, c, k, k2] if c == c_in && k == k2 && k % 2 == 1 => (f, k),
        ref s => {
            return Err(NnError::ShapeMismatch(format!(
                "conv weights {s:?} need shape (F, {c_in}, k, k) with odd k"
            )))
        }
    };
    if bias.shape() != [f_out] {
        return Err(NnError::ShapeMismatch(format!(
            "conv bias {:?}, expected [{f_out}]",
            bias.shape()
        )));
    }
    Ok((f_out, k))
}

/// 2×2 max-pooling with stride 2.
///
/// Returns the pooled tensor and, per output element, the linear index of the
/// winning input position (ties go to the first in row-major scan order).
pub fn maxpool2d_forward<F: Float>(
    input: &Tensor<F>,
) -> Result<(Tensor<F>, Vec<usize>), NnError> {
    let (c, h, w) = dims3(input, "pool input")?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NnError::OddDimension { height: h, width: w });
    }
    let (ho, wo) = (h / 2, w / 2);
    let mut out = Tensor::zeros(&[c, ho, wo]);
    let mut argmax = vec![0usize; c * ho * wo];
    let in_d = input.data();
    let out_d = out.data_mut();

    for ch in 0..c {
        for y in 0..ho {
            for x in 0..wo {
                let base = (ch * h + 2 * y) * w + 2 * x;
                let candidates = [base, base + 1, base + w, base + w + 1];
                let mut best = candidates[0];
                let mut best_v = in_d[best];
                for &idx in &candidates[1..] {
                    if in_d[idx] > best_v {
                        best_v = in_d[idx];
                        best = idx;
                    }
                }
                let o = (ch * ho + y) * wo + x;
                out_d[o] = best_v;
                argmax[o] = best;
            }
        }
    }
    Ok((out, argmax))
}

/// Routes pooled gradients back to the recorded argmax positions.
pub fn maxpool2d_backward<F: Float>(
    d_out: &Tensor<F>,
    argmax: &[usize],
    input_shape: &[usize],
) -> Tensor<F> {
    debug_assert_eq!(d_out.numel(), argmax.len());
    let mut d_input = Tensor::zeros(input_shape);
    let di = d_input.data_mut();
    for (g, &src) in d_out.data().iter().zip(argmax) {
        di[src] = di[src] + *g;
    }
    d_input
}

/// `max(0, x)` elementwise.
pub fn relu_forward<F: Float>(input: &Tensor<F>) -> Tensor<F> {
    let data = input.data().iter().map(|v| v.max(F::zero())).collect();
    Tensor::from_vec(input.shape(), data)
}

/// ReLU adjoint; `preact` is the forward *input*, gradient is zero where it
/// was non-positive.
pub fn relu_backward<F: Float>(d_out: &Tensor<F>, preact: &Tensor<F>) -> Tensor<F> {
    debug_assert_eq!(d_out.shape(), preact.shape());
    let data = d_out
        .data()
        .iter()
        .zip(preact.data())
        .map(|(g, p)| if *p > F::zero() { *g } else { F::zero() })
        .collect();
    Tensor::from_vec(d_out.shape(), data)
}

/// Fully connected layer `W·x + b`; `weights` is `(out, in)` row-major.
pub fn dense_forward<F: Float>(
    input: &[F],
    weights: &Tensor<F>,
    bias: &Tensor<F>,
) -> Result<Vec<F>, NnError> {
    let (n_out, n_in) = dense_dims(weights, bias, input.len())?;
    let w = weights.data();
    let mut out = Vec::with_capacity(n_out);
    for o in 0..n_out {
        let row = &w[o * n_in..(o + 1) * n_in];
        let mut acc = bias.data()[o];
        for (wv, x) in row.iter().zip(input) {
            acc = acc + *wv * *x;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Gradients of a dense layer w.r.t. input, weights, and bias.
pub fn dense_backward<F: Float>(
    input: &[F],
    weights: &Tensor<F>,
    d_out: &[F],
) -> (Vec<F>, Tensor<F>, Tensor<F>) {
    let n_in = input.len();
    let n_out = d_out.len();
    debug_assert_eq!(weights.shape(), [n_out, n_in]);
    let w = weights.data();

    let mut d_input = vec![F::zero(); n_in];
    let mut d_weights = Tensor::zeros(&[n_out, n_in]);
    let dw = d_weights.data_mut();
    for o in 0..n_out {
        let g = d_out[o];
        let row = &w[o * n_in..(o + 1) * n_in];
        let dw_row = &mut dw[o * n_in..(o + 1) * n_in];
        for i in 0..n_in {
            d_input[i] = d_input[i] + g * row[i];
            dw_row[i] = g * input[i];
        }
    }
    let d_bias = Tensor::from_vec(&[n_out], d_out.to_vec());
    (d_input, d_weights, d_bias)
}

fn dense_dims<F: Float>(
    weights: &Tensor<F>,
    bias: &Tensor<F>,
    in_len: usize,
) -> Result<(usize, usize), NnError> {
    match *weights.shape() {
        [n_out, n_in] if n_in == in_len && bias.shape() == [n_out] => Ok((n_out, n_in)),
        ref s => Err(NnError::ShapeMismatch(format!(
            "dense weights {s:?} / bias {:?} incompatible with input length {in_len}",
            bias.shape()
        ))),
    }
}

/// Mean cross-entropy over a batch of logits `(N, K)`, plus the softmax
/// probabilities. Numerically stabilized with max subtraction; the loss is
/// computed as log-sum-exp so it stays finite for extreme logits.
pub fn softmax_cross_entropy<F: Float>(
    logits: &Tensor<F>,
    labels: &[u8],
) -> Result<(f64, Tensor<F>), NnError> {
    let (n, k) = match *logits.shape() {
        [n, k] if n == labels.len() && n > 0 => (n, k),
        ref s => {
            return Err(NnError::ShapeMismatch(format!(
                "logits {s:?} incompatible with {} labels",
                labels.len()
            )))
        }
    };
    let mut probs = Tensor::zeros(&[n, k]);
    let mut loss_sum = 0.0f64;
    for i in 0..n {
        let label = labels[i] as usize;
        if label >= k {
            return Err(NnError::ShapeMismatch(format!("label {label} out of range for {k} classes")));
        }
        let row = &logits.data()[i * k..(i + 1) * k];
        let p_row = &mut probs.data_mut()[i * k..(i + 1) * k];
        loss_sum += row_softmax_ce(row, label, p_row);
    }
    Ok((loss_sum / n as f64, probs))
}

/// Stable per-row softmax + cross-entropy; fills `p_row`, returns the loss.
pub(super) fn row_softmax_ce<F: Float>(row: &[F], label: usize, p_row: &mut [F]) -> f64 {
    let mut max = row[0];
    for v in &row[1..] {
        max = max.max(*v);
    }
    let mut denom = F::zero();
    for (p, v) in p_row.iter_mut().zip(row) {
        let e = (*v - max).exp();
        *p = e;
        denom = denom + e;
    }
    for p in p_row.iter_mut() {
        *p = *p / denom;
    }
    // loss = lse − logit_label = ln(Σ exp(v − max)) + max − logit_label
    denom.to_f64().unwrap().ln() + (max - row[label]).to_f64().unwrap()
}

/// Gradient of the mean cross-entropy w.r.t. the logits: `(p − onehot) / N`.
pub fn softmax_cross_entropy_backward<F: Float>(probs: &Tensor<F>, labels: &[u8]) -> Tensor<F> {
    let [n, k] = *probs.shape() else { panic!("probs must be (N, K)") };
    debug_assert_eq!(n, labels.len());
    let inv_n = F::from(1.0 / n as f64).unwrap();
    let mut d = probs.clone();
    let dd = d.data_mut();
    for i in 0..n {
        let y = labels[i] as usize;
        dd[i * k + y] = dd[i * k + y] - F::one();
        for v in &mut dd[i * k..(i + 1) * k] {
            *v = *v * inv_n;
        }
    }
    d
}

/// Inverted dropout. In train mode each unit is zeroed with probability
/// `rate` and survivors are scaled by `1/(1−rate)`; eval mode is the
/// identity. Returns the output and the mask of applied scale factors.
pub fn dropout_forward<F: Float>(
    input: &[F],
    rate: f64,
    train: bool,
    rng: &mut impl RngCore,
) -> (Vec<F>, Vec<F>) {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
    if !train || rate == 0.0 {
        return (input.to_vec(), vec![F::one(); input.len()]);
    }
    let scale = F::from(1.0 / (1.0 - rate)).unwrap();
    let mut mask = Vec::with_capacity(input.len());
    let mut out = Vec::with_capacity(input.len());
    for x in input {
        let keep = uniform_f64(rng) >= rate;
        let m = if keep { scale } else { F::zero() };
        mask.push(m);
        out.push(*x * m);
    }
    (out, mask)
}

/// Dropout adjoint: reuse the forward mask.
pub fn dropout_backward<F: Float>(d_out: &[F], mask: &[F]) -> Vec<F> {
    debug_assert_eq!(d_out.len(), mask.len());
    d_out.iter().zip(mask).map(|(g, m)| *g * *m).collect()
}
