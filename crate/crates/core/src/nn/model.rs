//! The fixed conv-net architecture and its forward/backward orchestration.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand_core::RngCore;

use crate::rng::uniform_range;
use crate::tensor::Tensor;

use super::ops::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout_backward,
    dropout_forward, maxpool2d_backward, maxpool2d_forward, relu_backward, relu_forward,
    row_softmax_ce,
};
use super::NnError;

/// Number of conv blocks (conv → ReLU → 2×2 max-pool).
pub const CONV_BLOCKS: usize = 4;

/// Architecture description: four conv blocks, dropout after the second and
/// fourth pools, then `Flatten → Dense → ReLU → Dropout → Dense`.
#[derive(Clone, PartialEq, Debug)]
pub struct ModelSpec {
    /// Input shape `(channels, height, width)`; height and width must be
    /// divisible by 16 so the four poolings divide evenly.
    pub input: (usize, usize, usize),
    /// Square conv kernel size (odd; same-padding, stride 1).
    pub kernel: usize,
    /// Filters per conv block.
    pub conv_channels: [usize; CONV_BLOCKS],
    /// Hidden width of the first dense layer.
    pub dense_hidden: usize,
    /// Output classes.
    pub classes: usize,
    /// Dropout rates: after pool 2, after pool 4, after the dense ReLU.
    pub dropout_rates: [f64; 3],
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::with_input(96, 96)
    }
}

impl ModelSpec {
    /// The default stack for an RGB input of the given size.
    pub fn with_input(height: usize, width: usize) -> Self {
        ModelSpec {
            input: (3, height, width),
            kernel: 3,
            conv_channels: [32, 48, 64, 96],
            dense_hidden: 256,
            classes: 2,
            dropout_rates: [0.25, 0.25, 0.5],
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let (c, h, w) = self.input;
        let fail = |msg: String| Err(NnError::InvalidSpec(msg));
        if c == 0 || h == 0 || w == 0 {
            return fail(format!("degenerate input shape {:?}", self.input));
        }
        if h % 16 != 0 || w % 16 != 0 {
            return fail(format!("input {h}x{w} not divisible by the four 2x poolings"));
        }
        if self.kernel % 2 == 0 {
            return fail(format!("kernel {} must be odd for same-padding", self.kernel));
        }
        if self.conv_channels.iter().any(|&f| f == 0) || self.dense_hidden == 0 {
            return fail("zero-width layer".into());
        }
        if self.classes != 2 {
            return fail(format!("binary classifier requires 2 classes, got {}", self.classes));
        }
        if self.dropout_rates.iter().any(|r| !(0.0..1.0).contains(r)) {
            return fail("dropout rates must be in [0, 1)".into());
        }
        Ok(())
    }

    /// Spatial size after the four poolings.
    pub fn pooled_hw(&self) -> (usize, usize) {
        (self.input.1 / 16, self.input.2 / 16)
    }

    /// Length of the flattened feature vector entering the dense head.
    pub fn flatten_len(&self) -> usize {
        let (h, w) = self.pooled_hw();
        self.conv_channels[CONV_BLOCKS - 1] * h * w
    }

    /// `(fan_in, fan_out)` per parameterized layer, conv blocks first.
    fn layer_dims(&self) -> Vec<LayerDims> {
        let mut dims = Vec::with_capacity(CONV_BLOCKS + 2);
        let mut c_in = self.input.0;
        for &f in &self.conv_channels {
            dims.push(LayerDims::Conv { filters: f, in_channels: c_in, kernel: self.kernel });
            c_in = f;
        }
        dims.push(LayerDims::Dense { n_out: self.dense_hidden, n_in: self.flatten_len() });
        dims.push(LayerDims::Dense { n_out: self.classes, n_in: self.dense_hidden });
        dims
    }

    /// Total learnable parameter count (weights + biases).
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|d| match *d {
                LayerDims::Conv { filters, in_channels, kernel } => {
                    filters * in_channels * kernel * kernel + filters
                }
                LayerDims::Dense { n_out, n_in } => n_out * n_in + n_out,
            })
            .sum()
    }

    /// Canonical one-line description, embedded in checkpoints so a loaded
    /// parameter file can be rejected when it does not match the spec.
    pub fn descriptor(&self) -> String {
        let (c, h, w) = self.input;
        format!(
            "in={c}x{h}x{w};k={k};conv={c1},{c2},{c3},{c4};dense={dh},{cls};drop={d1},{d2},{d3}",
            k = self.kernel,
            c1 = self.conv_channels[0],
            c2 = self.conv_channels[1],
            c3 = self.conv_channels[2],
            c4 = self.conv_channels[3],
            dh = self.dense_hidden,
            cls = self.classes,
            d1 = self.dropout_rates[0],
            d2 = self.dropout_rates[1],
            d3 = self.dropout_rates[2],
        )
    }
}

enum LayerDims {
    Conv { filters: usize, in_channels: usize, kernel: usize },
    Dense { n_out: usize, n_in: usize },
}

/// Learnable weights: `(weight, bias)` tensors for the four conv layers and
/// two dense layers, in forward order.
#[derive(Clone, PartialEq, Debug)]
pub struct Params<F> {
    pub layers: Vec<(Tensor<F>, Tensor<F>)>,
}

/// Gradients mirror the parameter layout shape-for-shape.
pub type Grads<F> = Params<F>;

impl<F: Float> Params<F> {
    /// He-uniform initialization (`±√(6 / fan_in)`), biases zero. Draws from
    /// `rng` in a fixed layer order, so a seeded stream reproduces exactly.
    pub fn init(spec: &ModelSpec, rng: &mut impl RngCore) -> Self {
        let layers = spec
            .layer_dims()
            .iter()
            .map(|d| {
                let (shape, fan_in, n_bias): (Vec<usize>, usize, usize) = match *d {
                    LayerDims::Conv { filters, in_channels, kernel } => (
                        [filters, in_channels, kernel, kernel].to_vec(),
                        in_channels * kernel * kernel,
                        filters,
                    ),
                    LayerDims::Dense { n_out, n_in } => ([n_out, n_in].to_vec(), n_in, n_out),
                };
                let limit = (6.0 / fan_in as f64).sqrt();
                let n: usize = shape.iter().product();
                let data = (0..n)
                    .map(|_| F::from(uniform_range(rng, -limit, limit)).unwrap())
                    .collect();
                (Tensor::from_vec(&shape, data), Tensor::zeros(&[n_bias]))
            })
            .collect();
        Params { layers }
    }

    /// Zero tensors in the same layout (gradient accumulators, Adam moments).
    pub fn zeros_like(spec: &ModelSpec) -> Self {
        let layers = spec
            .layer_dims()
            .iter()
            .map(|d| match *d {
                LayerDims::Conv { filters, in_channels, kernel } => (
                    Tensor::zeros(&[filters, in_channels, kernel, kernel]),
                    Tensor::zeros(&[filters]),
                ),
                LayerDims::Dense { n_out, n_in } => {
                    (Tensor::zeros(&[n_out, n_in]), Tensor::zeros(&[n_out]))
                }
            })
            .collect();
        Params { layers }
    }

    pub fn numel(&self) -> usize {
        self.layers.iter().map(|(w, b)| w.numel() + b.numel()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|(w, b)| w.all_finite() && b.all_finite())
    }

    /// Sets every element to zero, keeping shapes.
    pub fn zero(&mut self) {
        for (w, b) in &mut self.layers {
            w.data_mut().fill(F::zero());
            b.data_mut().fill(F::zero());
        }
    }

    pub fn cast<G: Float>(&self) -> Params<G> {
        Params { layers: self.layers.iter().map(|(w, b)| (w.cast(), b.cast())).collect() }
    }
}

/// Everything the backward pass needs from one sample's forward pass.
pub struct ForwardCache<F> {
    conv_inputs: Vec<Tensor<F>>,
    conv_preacts: Vec<Tensor<F>>,
    pool_argmax: Vec<Vec<usize>>,
    dropout_masks: [Vec<F>; 3],
    dense1_input: Vec<F>,
    dense1_preact: Vec<F>,
    dense2_input: Vec<F>,
    pub logits: Vec<F>,
}

/// Forward pass in training mode, caching intermediates for [`backward`].
///
/// With `dropout_enabled = false` the dropout layers are skipped entirely
/// (no random draws), which keeps the rng stream identical to eval behavior.
pub fn forward_train<F: Float>(
    spec: &ModelSpec,
    params: &Params<F>,
    x: &Tensor<F>,
    dropout_enabled: bool,
    rng: &mut impl RngCore,
) -> Result<ForwardCache<F>, NnError> {
    check_input(spec, x)?;
    let mut conv_inputs = Vec::with_capacity(CONV_BLOCKS);
    let mut conv_preacts = Vec::with_capacity(CONV_BLOCKS);
    let mut pool_argmax = Vec::with_capacity(CONV_BLOCKS);
    let mut dropout_masks: [Vec<F>; 3] = [Vec::new(), Vec::new(), Vec::new()];

    let mut cur = x.clone();
    for block in 0..CONV_BLOCKS {
        let (w, b) = &params.layers[block];
        let preact = conv2d_forward(&cur, w, b)?;
        let activated = relu_forward(&preact);
        let (mut pooled, argmax) = maxpool2d_forward(&activated)?;

        conv_inputs.push(cur);
        conv_preacts.push(preact);
        pool_argmax.push(argmax);

        // Dropout after the second and fourth pools.
        let drop_slot = match block {
            1 => Some(0),
            3 => Some(1),
            _ => None,
        };
        if let Some(slot) = drop_slot {
            if dropout_enabled {
                let (out, mask) =
                    dropout_forward(pooled.data(), spec.dropout_rates[slot], true, rng);
                pooled = Tensor::from_vec(pooled.shape(), out);
                dropout_masks[slot] = mask;
            }
        }
        cur = pooled;
    }

    let dense1_input = cur.data().to_vec(); // flatten
    let (w5, b5) = &params.layers[CONV_BLOCKS];
    let dense1_preact = dense_forward(&dense1_input, w5, b5)?;
    let mut dense2_input: Vec<F> =
        dense1_preact.iter().map(|v| v.max(F::zero())).collect();
    if dropout_enabled {
        let (out, mask) = dropout_forward(&dense2_input, spec.dropout_rates[2], true, rng);
        dense2_input = out;
        dropout_masks[2] = mask;
    }
    let (w6, b6) = &params.layers[CONV_BLOCKS + 1];
    let logits = dense_forward(&dense2_input, w6, b6)?;

    Ok(ForwardCache {
        conv_inputs,
        conv_preacts,
        pool_argmax,
        dropout_masks,
        dense1_input,
        dense1_preact,
        dense2_input,
        logits,
    })
}

/// Inference-mode forward pass (dropout off, nothing cached).
pub fn forward_eval<F: Float>(
    spec: &ModelSpec,
    params: &Params<F>,
    x: &Tensor<F>,
) -> Result<Vec<F>, NnError> {
    check_input(spec, x)?;
    let mut cur = x.clone();
    for block in 0..CONV_BLOCKS {
        let (w, b) = &params.layers[block];
        let preact = conv2d_forward(&cur, w, b)?;
        let activated = relu_forward(&preact);
        let (pooled, _) = maxpool2d_forward(&activated)?;
        cur = pooled;
    }
    let (w5, b5) = &params.layers[CONV_BLOCKS];
    let hidden = dense_forward(cur.data(), w5, b5)?;
    let activated: Vec<F> = hidden.iter().map(|v| v.max(F::zero())).collect();
    let (w6, b6) = &params.layers[CONV_BLOCKS + 1];
    dense_forward(&activated, w6, b6)
}

fn check_input<F: Float>(spec: &ModelSpec, x: &Tensor<F>) -> Result<(), NnError> {
    let (c, h, w) = spec.input;
    if x.shape() != [c, h, w] {
        return Err(NnError::ShapeMismatch(format!(
            "input {:?}, spec expects {:?}",
            x.shape(),
            [c, h, w]
        )));
    }
    Ok(())
}

/// Backpropagates `d_logits` for one cached sample, accumulating parameter
/// gradients into `grads` (which must mirror the parameter layout).
pub fn backward<F: Float>(
    params: &Params<F>,
    cache: &ForwardCache<F>,
    d_logits: &[F],
    grads: &mut Grads<F>,
) {
    // Dense head.
    let (w6, _) = &params.layers[CONV_BLOCKS + 1];
    let (d, dw6, db6) = dense_backward(&cache.dense2_input, w6, d_logits);
    accumulate(&mut grads.layers[CONV_BLOCKS + 1], &dw6, &db6);

    let d = apply_mask(d, &cache.dropout_masks[2]);
    let mut d: Vec<F> = d
        .iter()
        .zip(&cache.dense1_preact)
        .map(|(g, p)| if *p > F::zero() { *g } else { F::zero() })
        .collect();

    let (w5, _) = &params.layers[CONV_BLOCKS];
    let (d_flat, dw5, db5) = dense_backward(&cache.dense1_input, w5, &d);
    accumulate(&mut grads.layers[CONV_BLOCKS], &dw5, &db5);
    d = d_flat;

    // Conv blocks in reverse.
    for block in (0..CONV_BLOCKS).rev() {
        let drop_slot = match block {
            1 => Some(0),
            3 => Some(1),
            _ => None,
        };
        if let Some(slot) = drop_slot {
            d = apply_mask(d, &cache.dropout_masks[slot]);
        }

        let preact = &cache.conv_preacts[block];
        let [c, ph, pw] = *preact.shape() else { unreachable!() };
        let pooled_grad = Tensor::from_vec(&[c, ph / 2, pw / 2], d);
        let relu_grad =
            maxpool2d_backward(&pooled_grad, &cache.pool_argmax[block], preact.shape());
        let conv_grad = relu_backward(&relu_grad, preact);

        let (w, _) = &params.layers[block];
        let (d_in, dw, db) = conv2d_backward(&cache.conv_inputs[block], w, &conv_grad)
            .expect("cached shapes are consistent");
        accumulate(&mut grads.layers[block], &dw, &db);
        d = d_in.data().to_vec();
    }
}

fn apply_mask<F: Float>(d: Vec<F>, mask: &[F]) -> Vec<F> {
    if mask.is_empty() {
        d // dropout was disabled for this pass
    } else {
        dropout_backward(&d, mask)
    }
}

fn accumulate<F: Float>(slot: &mut (Tensor<F>, Tensor<F>), dw: &Tensor<F>, db: &Tensor<F>) {
    for (a, b) in slot.0.data_mut().iter_mut().zip(dw.data()) {
        *a = *a + *b;
    }
    for (a, b) in slot.1.data_mut().iter_mut().zip(db.data()) {
        *a = *a + *b;
    }
}

/// Loss/accuracy tallies for one mini-batch.
pub struct BatchStats {
    pub loss: f64,
    pub correct: usize,
}

/// Mean-loss gradients over a mini-batch, accumulated into `grads`.
///
/// Samples are processed in order, one cached forward/backward each, so the
/// result is deterministic for a fixed rng state.
pub fn batch_gradients<F: Float>(
    spec: &ModelSpec,
    params: &Params<F>,
    inputs: &[&Tensor<F>],
    labels: &[u8],
    dropout_enabled: bool,
    rng: &mut impl RngCore,
    grads: &mut Grads<F>,
) -> Result<BatchStats, NnError> {
    if inputs.is_empty() || inputs.len() != labels.len() {
        return Err(NnError::ShapeMismatch(format!(
            "batch of {} inputs with {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    grads.zero();
    let n = inputs.len();
    let inv_n = F::from(1.0 / n as f64).unwrap();
    let mut loss_sum = 0.0f64;
    let mut correct = 0usize;

    for (x, &label) in inputs.iter().zip(labels) {
        let cache = forward_train(spec, params, x, dropout_enabled, rng)?;
        let k = cache.logits.len();
        if label as usize >= k {
            return Err(NnError::ShapeMismatch(format!("label {label} out of range")));
        }
        let mut probs = alloc::vec![F::zero(); k];
        loss_sum += row_softmax_ce(&cache.logits, label as usize, &mut probs);
        if argmax(&cache.logits) == label as usize {
            correct += 1;
        }
        // d(mean loss)/d(logits) = (p − onehot) / N for this sample.
        let mut d_logits = probs;
        d_logits[label as usize] = d_logits[label as usize] - F::one();
        for v in &mut d_logits {
            *v = *v * inv_n;
        }
        backward(params, &cache, &d_logits, grads);
    }
    Ok(BatchStats { loss: loss_sum / n as f64, correct })
}

fn argmax<F: Float>(xs: &[F]) -> usize {
    let mut best = 0;
    for (i, v) in xs.iter().enumerate().skip(1) {
        if *v > xs[best] {
            best = i;
        }
    }
    best
}

/// Eval-mode prediction: `(class, [p_down, p_up])`. Ties resolve to the
/// first (lowest-index) class.
pub fn predict<F: Float>(
    spec: &ModelSpec,
    params: &Params<F>,
    x: &Tensor<F>,
) -> Result<(u8, [f64; 2]), NnError> {
    let logits = forward_eval(spec, params, x)?;
    debug_assert_eq!(logits.len(), 2);
    let mut probs = [F::zero(); 2];
    row_softmax_ce(&logits, 0, &mut probs);
    let class = argmax(&logits) as u8;
    Ok((class, [probs[0].to_f64().unwrap(), probs[1].to_f64().unwrap()]))
}
