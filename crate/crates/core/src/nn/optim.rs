//! Parameter update rules.

use num_traits::Float;

use super::model::{Grads, ModelSpec, Params};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Optimizer {
    Sgd,
    Adam,
}

/// Plain gradient descent: `p ← p − rate·g`.
pub fn sgd_step<F: Float>(params: &mut Params<F>, grads: &Grads<F>, rate: f64) {
    let rate = F::from(rate).unwrap();
    for ((w, b), (gw, gb)) in params.layers.iter_mut().zip(&grads.layers) {
        for (p, g) in w.data_mut().iter_mut().zip(gw.data()) {
            *p = *p - rate * *g;
        }
        for (p, g) in b.data_mut().iter_mut().zip(gb.data()) {
            *p = *p - rate * *g;
        }
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// First/second moment accumulators plus the step counter.
pub struct AdamState<F> {
    m: Params<F>,
    v: Params<F>,
    t: u64,
}

impl<F: Float> AdamState<F> {
    pub fn new(spec: &ModelSpec) -> Self {
        AdamState { m: Params::zeros_like(spec), v: Params::zeros_like(spec), t: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// Bias-corrected Adam update with `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e−8`.
pub fn adam_step<F: Float>(
    params: &mut Params<F>,
    grads: &Grads<F>,
    state: &mut AdamState<F>,
    rate: f64,
) {
    state.t += 1;
    let b1 = F::from(ADAM_BETA1).unwrap();
    let b2 = F::from(ADAM_BETA2).unwrap();
    let one = F::one();
    let corr1 = F::from(1.0 - ADAM_BETA1.powi(state.t as i32)).unwrap();
    let corr2 = F::from(1.0 - ADAM_BETA2.powi(state.t as i32)).unwrap();
    let eps = F::from(ADAM_EPS).unwrap();
    let rate = F::from(rate).unwrap();

    for (((w, b), (gw, gb)), ((mw, mb), (vw, vb))) in params
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(state.m.layers.iter_mut().zip(state.v.layers.iter_mut()))
    {
        let update = |p: &mut [F], g: &[F], m: &mut [F], v: &mut [F]| {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                let m_hat = m[i] / corr1;
                let v_hat = v[i] / corr2;
                p[i] = p[i] - rate * m_hat / (v_hat.sqrt() + eps);
            }
        };
        update(w.data_mut(), gw.data(), mw.data_mut(), vw.data_mut());
        update(b.data_mut(), gb.data(), mb.data_mut(), vb.data_mut());
    }
}
