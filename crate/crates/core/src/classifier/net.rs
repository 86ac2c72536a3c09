//! Fully connected network internals: forward, backward, and parameter
//! updates. Hidden layers use rectified-linear activations with inverted
//! dropout; the single output unit is a sigmoid.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::NetworkArchitecture;

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Layer {
    /// Shape (out, in).
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Network {
    /// Hidden layers followed by the single-unit output layer.
    pub layers: Vec<Layer>,
}

pub(super) struct ForwardCache {
    /// Layer inputs: `inputs[k]` feeds layer `k`; `inputs[0]` is the batch.
    inputs: Vec<Array2<f64>>,
    /// Pre-activation values per hidden layer.
    pre_activations: Vec<Array2<f64>>,
    /// Inverted-dropout masks per hidden layer (empty when dropout is off).
    masks: Vec<Option<Array2<f64>>>,
    /// Output-layer logits, shape (n, 1).
    pub logits: Array2<f64>,
}

pub(super) struct Gradients {
    pub layers: Vec<LayerGradient>,
}

pub(super) struct LayerGradient {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Network {
    /// Scaled-uniform initialization, `U(-b, b)` with `b = sqrt(6/fan_in)`
    /// (the rectifier-friendly constant), zero biases.
    pub fn init(arch: &NetworkArchitecture, rng: &mut ChaCha8Rng) -> Self {
        let mut layers = Vec::with_capacity(arch.hidden_layers.len() + 1);
        let mut fan_in = arch.input_dim;
        for &width in arch.hidden_layers.iter().chain(std::iter::once(&1usize)) {
            let bound = (6.0 / fan_in as f64).sqrt();
            let w = Array2::from_shape_fn((width, fan_in), |_| rng.random_range(-bound..bound));
            layers.push(Layer {
                w,
                b: Array1::zeros(width),
            });
            fan_in = width;
        }
        Self { layers }
    }

    pub fn hidden_count(&self) -> usize {
        self.layers.len() - 1
    }

    /// Forward pass. `dropout` draws a fresh inverted-dropout mask per
    /// hidden layer; pass `None` for inference and gradient checking.
    pub fn forward(
        &self,
        batch: &Array2<f64>,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> ForwardCache {
        let hidden = self.hidden_count();
        let mut inputs = Vec::with_capacity(hidden + 1);
        let mut pre_activations = Vec::with_capacity(hidden);
        let mut masks = Vec::with_capacity(hidden);
        let mut dropout = dropout;

        let mut activation = batch.clone();
        for layer in &self.layers[..hidden] {
            inputs.push(activation.clone());
            let z = activation.dot(&layer.w.t()) + &layer.b;
            let mut h = z.mapv(|v| v.max(0.0));
            let mask = match &mut dropout {
                Some((rate, rng)) if *rate > 0.0 => {
                    let keep = 1.0 - *rate;
                    let mask = Array2::from_shape_fn(h.raw_dim(), |_| {
                        if rng.random::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    });
                    h *= &mask;
                    Some(mask)
                }
                _ => None,
            };
            pre_activations.push(z);
            masks.push(mask);
            activation = h;
        }

        let output = self.layers.last().expect("network has an output layer");
        let logits = activation.dot(&output.w.t()) + &output.b;
        inputs.push(activation);

        ForwardCache {
            inputs,
            pre_activations,
            masks,
            logits,
        }
    }

    /// Sigmoid probabilities for a batch, dropout disabled.
    pub fn predict_probabilities(&self, batch: &Array2<f64>) -> Array1<f64> {
        let cache = self.forward(batch, None);
        cache.logits.column(0).mapv(sigmoid)
    }

    /// Mean binary cross-entropy and parameter gradients for one batch.
    /// The cache must come from a forward pass over the same batch.
    pub fn backward(&self, cache: &ForwardCache, targets: &Array1<f64>) -> (f64, Gradients) {
        let n = targets.len() as f64;
        let hidden = self.hidden_count();

        let loss = cache
            .logits
            .column(0)
            .iter()
            .zip(targets)
            .map(|(&z, &y)| y * softplus(-z) + (1.0 - y) * softplus(z))
            .sum::<f64>()
            / n;

        // dL/dz for the sigmoid + cross-entropy head: (p - y) / n.
        let mut delta: Array2<f64> = cache.logits.mapv(sigmoid);
        for (row, &y) in targets.iter().enumerate() {
            delta[(row, 0)] = (delta[(row, 0)] - y) / n;
        }

        let mut grads: Vec<LayerGradient> = Vec::with_capacity(self.layers.len());
        let output = self.layers.last().expect("network has an output layer");
        grads.push(LayerGradient {
            w: delta.t().dot(&cache.inputs[hidden]),
            b: delta.sum_axis(Axis(0)),
        });

        let mut upstream = delta.dot(&output.w);
        for k in (0..hidden).rev() {
            if let Some(mask) = &cache.masks[k] {
                upstream *= mask;
            }
            let dz = &upstream * &cache.pre_activations[k].mapv(|z| if z > 0.0 { 1.0 } else { 0.0 });
            grads.push(LayerGradient {
                w: dz.t().dot(&cache.inputs[k]),
                b: dz.sum_axis(Axis(0)),
            });
            if k > 0 {
                upstream = dz.dot(&self.layers[k].w);
            }
        }

        grads.reverse();
        (loss, Gradients { layers: grads })
    }

    pub fn apply_momentum_update(
        &mut self,
        grads: &Gradients,
        velocities: &mut Vec<LayerGradient>,
        learning_rate: f64,
        momentum: f64,
    ) {
        if velocities.is_empty() {
            for layer in &self.layers {
                velocities.push(LayerGradient {
                    w: Array2::zeros(layer.w.raw_dim()),
                    b: Array1::zeros(layer.b.raw_dim()),
                });
            }
        }
        for ((layer, grad), velocity) in self
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(velocities.iter_mut())
        {
            velocity.w.zip_mut_with(&grad.w, |v, g| {
                *v = momentum * *v - learning_rate * g;
            });
            velocity.b.zip_mut_with(&grad.b, |v, g| {
                *v = momentum * *v - learning_rate * g;
            });
            layer.w += &velocity.w;
            layer.b += &velocity.b;
        }
    }

    /// Flat view of all parameters, layer by layer (weights row-major, then
    /// bias). Used by the finite-difference check.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn get_parameter(&self, index: usize) -> f64 {
        let (layer, offset) = self.locate(index);
        let l = &self.layers[layer];
        if offset < l.w.len() {
            l.w.as_slice().expect("standard layout")[offset]
        } else {
            l.b[offset - l.w.len()]
        }
    }

    pub fn set_parameter(&mut self, index: usize, value: f64) {
        let (layer, offset) = self.locate(index);
        let l = &mut self.layers[layer];
        if offset < l.w.len() {
            l.w.as_slice_mut().expect("standard layout")[offset] = value;
        } else {
            let k = offset - l.w.len();
            l.b[k] = value;
        }
    }

    fn locate(&self, mut index: usize) -> (usize, usize) {
        for (k, layer) in self.layers.iter().enumerate() {
            let span = layer.w.len() + layer.b.len();
            if index < span {
                return (k, index);
            }
            index -= span;
        }
        panic!("parameter index out of range");
    }

    pub fn flat_gradient(grads: &Gradients) -> Vec<f64> {
        let mut out = Vec::new();
        for grad in &grads.layers {
            out.extend(grad.w.iter().copied());
            out.extend(grad.b.iter().copied());
        }
        out
    }
}

pub(super) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `ln(1 + exp(x))` without overflow.
pub(super) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
