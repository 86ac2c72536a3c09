//! News/not-news classification with a fully connected feedforward
//! network.
//!
//! The classifier consumes averaged-embedding feature vectors and emits a
//! probability that the message is news. Training is mini-batch SGD with
//! momentum on binary cross-entropy, inverted dropout on hidden
//! activations, and early stopping on a held-out validation slice. The
//! best-validation weights are kept.

mod io;
mod net;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::FeatureVector;
use crate::error::{Error, Result};
use crate::seed;

use net::Network;

pub use io::{load_model, save_model};

/// Binary message class; `Event` means news.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Event,
    NotEvent,
}

impl Class {
    fn target(self) -> f64 {
        match self {
            Class::Event => 1.0,
            Class::NotEvent => 0.0,
        }
    }
}

/// Network shape: rectified-linear hidden layers, one sigmoid output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkArchitecture {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub dropout_rate: f64,
}

impl NetworkArchitecture {
    /// Default stack: hidden widths 400/400/200/100 with dropout 0.5.
    pub fn with_input_dim(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_layers: vec![400, 400, 200, 100],
            dropout_rate: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidInput("input_dim must be > 0".into()));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::InvalidInput("hidden layer widths must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidInput("dropout_rate must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Optimization settings; every field is overridable from configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Share of the training data held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 64,
            max_epochs: 200,
            patience: 10,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidInput("learning_rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidInput("momentum must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidInput(
                "batch_size and max_epochs must be > 0".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.validation_fraction) {
            return Err(Error::InvalidInput(
                "validation_fraction must lie in [0, 0.5)".into(),
            ));
        }
        Ok(())
    }
}

/// What training observed; kept with the model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSummary {
    pub epochs_run: usize,
    pub final_validation_accuracy: f64,
    pub seed: u64,
    /// Mean training loss per epoch (not persisted).
    pub train_losses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Class,
    /// Probability of `Event`.
    pub confidence: f64,
}

/// A trained network plus its architecture and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    arch: NetworkArchitecture,
    network: Network,
    pub summary: TrainingSummary,
    /// Confidence at or above which `predict` labels `Event`.
    pub decision_threshold: f64,
}

impl ClassifierModel {
    pub fn architecture(&self) -> &NetworkArchitecture {
        &self.arch
    }

    pub fn input_dim(&self) -> usize {
        self.arch.input_dim
    }

    /// Forward pass with dropout disabled.
    pub fn predict(&self, feature: &FeatureVector) -> Result<Prediction> {
        if feature.dimension() != self.arch.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input_dim,
                actual: feature.dimension(),
            });
        }
        let batch =
            Array2::from_shape_vec((1, feature.dimension()), feature.values().to_vec())
                .expect("shape matches data length");
        let confidence = self.network.predict_probabilities(&batch)[0];
        Ok(Prediction {
            label: if confidence >= self.decision_threshold {
                Class::Event
            } else {
                Class::NotEvent
            },
            confidence,
        })
    }

    /// Test-only handle for building models with explicit weights.
    #[cfg(test)]
    fn from_network(arch: NetworkArchitecture, network: Network) -> Self {
        Self {
            arch,
            network,
            summary: TrainingSummary {
                epochs_run: 0,
                final_validation_accuracy: 0.0,
                seed: 0,
                train_losses: Vec::new(),
            },
            decision_threshold: 0.5,
        }
    }
}

fn to_matrix(features: &[(FeatureVector, Class)], indices: &[usize]) -> (Array2<f64>, Array1<f64>) {
    let dim = features[indices[0]].0.dimension();
    let mut x = Array2::zeros((indices.len(), dim));
    let mut y = Array1::zeros(indices.len());
    for (row, &i) in indices.iter().enumerate() {
        x.row_mut(row)
            .iter_mut()
            .zip(features[i].0.values())
            .for_each(|(cell, v)| *cell = *v);
        y[row] = features[i].1.target();
    }
    (x, y)
}

/// Trains a classifier. Deterministic given `cfg.seed`; requires at least
/// one example of each class and features matching `arch.input_dim`.
pub fn train(
    features: &[(FeatureVector, Class)],
    arch: &NetworkArchitecture,
    cfg: &TrainingConfig,
) -> Result<ClassifierModel> {
    arch.validate()?;
    cfg.validate()?;
    if features.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    for (feature, _) in features {
        if feature.dimension() != arch.input_dim {
            return Err(Error::DimensionMismatch {
                expected: arch.input_dim,
                actual: feature.dimension(),
            });
        }
    }
    let events = features.iter().filter(|(_, c)| *c == Class::Event).count();
    if events == 0 || events == features.len() {
        return Err(Error::SingleClassTrainingData);
    }

    // Stratified validation split so a rare class cannot vanish from the
    // training side.
    let mut split_rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, "classifier:split"));
    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    for class in [Class::Event, Class::NotEvent] {
        let mut members: Vec<usize> = (0..features.len())
            .filter(|&i| features[i].1 == class)
            .collect();
        members.shuffle(&mut split_rng);
        let take = ((members.len() as f64 * cfg.validation_fraction).round() as usize)
            .min(members.len() - 1);
        val_idx.extend_from_slice(&members[..take]);
        train_idx.extend_from_slice(&members[take..]);
    }
    if val_idx.is_empty() {
        // Tiny datasets: validate on the training points rather than nothing.
        val_idx = train_idx.clone();
    }
    val_idx.sort_unstable();
    train_idx.sort_unstable();

    let (val_x, val_y) = to_matrix(features, &val_idx);

    let mut init_rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, "classifier:init"));
    let mut network = Network::init(arch, &mut init_rng);
    let mut epoch_rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, "classifier:epochs"));

    let mut velocities = Vec::new();
    let mut best = network.clone();
    // Snapshot key: highest validation accuracy, lowest loss on ties. The
    // loss keeps the snapshot moving after accuracy saturates, which is
    // what makes the final confidences sharp.
    let mut best_key = (f64::NEG_INFINITY, f64::INFINITY);
    let mut best_accuracy_seen = f64::NEG_INFINITY;
    let mut best_loss_seen = f64::INFINITY;
    let mut stale_epochs = 0usize;
    let mut epochs_run = 0usize;
    let mut train_losses = Vec::new();

    for _ in 0..cfg.max_epochs {
        epochs_run += 1;
        let mut order = train_idx.clone();
        order.shuffle(&mut epoch_rng);

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let (x, y) = to_matrix(features, chunk);
            let cache = network.forward(&x, Some((arch.dropout_rate, &mut epoch_rng)));
            let (loss, grads) = network.backward(&cache, &y);
            network.apply_momentum_update(&grads, &mut velocities, cfg.learning_rate, cfg.momentum);
            epoch_loss += loss;
            batches += 1;
        }
        train_losses.push(epoch_loss / batches as f64);

        let (accuracy, val_loss) = validation_metrics(&network, &val_x, &val_y);
        if accuracy > best_key.0 || (accuracy == best_key.0 && val_loss < best_key.1) {
            best_key = (accuracy, val_loss);
            best = network.clone();
        }
        let improved = accuracy > best_accuracy_seen || val_loss < best_loss_seen;
        best_accuracy_seen = best_accuracy_seen.max(accuracy);
        best_loss_seen = best_loss_seen.min(val_loss);
        if improved {
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= cfg.patience {
                break;
            }
        }
    }

    Ok(ClassifierModel {
        arch: arch.clone(),
        network: best,
        summary: TrainingSummary {
            epochs_run,
            final_validation_accuracy: best_key.0,
            seed: cfg.seed,
            train_losses,
        },
        decision_threshold: 0.5,
    })
}

fn validation_metrics(network: &Network, x: &Array2<f64>, y: &Array1<f64>) -> (f64, f64) {
    let probabilities = network.predict_probabilities(x);
    let correct = probabilities
        .iter()
        .zip(y)
        .filter(|(&p, &target)| (p >= 0.5) == (target >= 0.5))
        .count();
    let n = y.len() as f64;
    let loss = probabilities
        .iter()
        .zip(y)
        .map(|(&p, &target)| {
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
        })
        .sum::<f64>()
        / n;
    (correct as f64 / n, loss)
}

/// Standard binary metrics with `Event` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierEvaluation {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

pub fn evaluate_classifier(
    model: &ClassifierModel,
    test: &[(FeatureVector, Class)],
) -> Result<ClassifierEvaluation> {
    if test.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    for (feature, class) in test {
        let predicted = model.predict(feature)?.label;
        match (predicted, class) {
            (Class::Event, Class::Event) => tp += 1,
            (Class::Event, Class::NotEvent) => fp += 1,
            (Class::NotEvent, Class::NotEvent) => tn += 1,
            (Class::NotEvent, Class::Event) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(ClassifierEvaluation {
        accuracy: (tp + tn) as f64 / test.len() as f64,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
    })
}

/// Compares analytic gradients to central finite differences on a seeded
/// random network (dropout disabled) and returns the maximum relative
/// error over all parameters.
pub fn gradient_check(
    arch: &NetworkArchitecture,
    samples: &[(FeatureVector, Class)],
    seed: u64,
) -> Result<f64> {
    arch.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidInput("gradient check needs samples".into()));
    }
    for (feature, _) in samples {
        if feature.dimension() != arch.input_dim {
            return Err(Error::DimensionMismatch {
                expected: arch.input_dim,
                actual: feature.dimension(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut network = Network::init(arch, &mut rng);
    let indices: Vec<usize> = (0..samples.len()).collect();
    let (x, y) = to_matrix(samples, &indices);

    let cache = network.forward(&x, None);
    let (_, grads) = network.backward(&cache, &y);
    let analytic = Network::flat_gradient(&grads);
    debug_assert_eq!(analytic.len(), network.parameter_count());

    let epsilon = 1e-5;
    let mut max_relative_error = 0.0f64;
    for (index, &analytic_gradient) in analytic.iter().enumerate() {
        let original = network.get_parameter(index);

        network.set_parameter(index, original + epsilon);
        let plus = loss_of(&network, &x, &y);
        network.set_parameter(index, original - epsilon);
        let minus = loss_of(&network, &x, &y);
        network.set_parameter(index, original);

        let numeric = (plus - minus) / (2.0 * epsilon);
        let denom = (analytic_gradient.abs() + numeric.abs()).max(1e-8);
        max_relative_error = max_relative_error.max((analytic_gradient - numeric).abs() / denom);
    }
    Ok(max_relative_error)
}

fn loss_of(network: &Network, x: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let cache = network.forward(x, None);
    let (loss, _) = network.backward(&cache, y);
    loss
}

/// Gaussian class blobs in feature space; a convenient linearly separable
/// dataset for smoke tests.
pub fn gaussian_blobs(
    per_class: usize,
    dim: usize,
    separation: f64,
    spread: f64,
    seed: u64,
) -> Vec<(FeatureVector, Class)> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class * 2);
    for class in [Class::Event, Class::NotEvent] {
        let center = match class {
            Class::Event => separation / 2.0,
            Class::NotEvent => -separation / 2.0,
        };
        for _ in 0..per_class {
            let values: Vec<f64> = (0..dim)
                .map(|_| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    center + spread * noise
                })
                .collect();
            out.push((FeatureVector::new(values), class));
        }
    }
    out
}

#[cfg(test)]
mod tests;
