use ndarray::{Array1, Array2};

use crate::embedding::FeatureVector;

use super::net::{Layer, Network};
use super::*;

fn fv(values: &[f64]) -> FeatureVector {
    FeatureVector::new(values.to_vec())
}

fn small_arch(input_dim: usize) -> NetworkArchitecture {
    NetworkArchitecture {
        input_dim,
        hidden_layers: vec![16, 8],
        dropout_rate: 0.2,
    }
}

fn quick_config(seed: u64) -> TrainingConfig {
    TrainingConfig {
        max_epochs: 60,
        seed,
        ..TrainingConfig::default()
    }
}

/// Nearest-centroid rule: the independent check that a dataset really is
/// separable before we ask the network to separate it.
fn centroid_accuracy(data: &[(FeatureVector, Class)]) -> f64 {
    let dim = data[0].0.dimension();
    let mut centroids = [(vec![0.0; dim], 0usize), (vec![0.0; dim], 0usize)];
    for (feature, class) in data {
        let slot = &mut centroids[(*class == Class::Event) as usize];
        for (c, v) in slot.0.iter_mut().zip(feature.values()) {
            *c += v;
        }
        slot.1 += 1;
    }
    for slot in &mut centroids {
        for c in &mut slot.0 {
            *c /= slot.1.max(1) as f64;
        }
    }
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
    };
    let correct = data
        .iter()
        .filter(|(feature, class)| {
            let to_not_event = dist(feature.values(), &centroids[0].0);
            let to_event = dist(feature.values(), &centroids[1].0);
            (to_event < to_not_event) == (*class == Class::Event)
        })
        .count();
    correct as f64 / data.len() as f64
}

fn zero_network(arch: &NetworkArchitecture) -> Network {
    let mut layers = Vec::new();
    let mut fan_in = arch.input_dim;
    for &width in arch.hidden_layers.iter().chain(std::iter::once(&1usize)) {
        layers.push(Layer {
            w: Array2::zeros((width, fan_in)),
            b: Array1::zeros(width),
        });
        fan_in = width;
    }
    Network { layers }
}

#[test]
fn zero_weights_give_exactly_half_confidence() {
    let arch = small_arch(3);
    let model = ClassifierModel::from_network(arch.clone(), zero_network(&arch));
    let p = model.predict(&fv(&[0.4, -1.0, 2.5])).unwrap();
    assert_eq!(p.confidence, 0.5);
    assert_eq!(p.label, Class::Event); // threshold is inclusive
}

#[test]
fn confidence_stays_in_unit_interval() {
    let data = gaussian_blobs(40, 3, 4.0, 0.5, 7);
    let model = train(&data, &small_arch(3), &quick_config(7)).unwrap();
    for (feature, _) in &data {
        let p = model.predict(feature).unwrap();
        assert!((0.0..=1.0).contains(&p.confidence));
    }
}

#[test]
fn training_is_deterministic_given_seed() {
    let data = gaussian_blobs(60, 4, 3.0, 0.6, 3);
    let a = train(&data, &small_arch(4), &quick_config(11)).unwrap();
    let b = train(&data, &small_arch(4), &quick_config(11)).unwrap();
    assert_eq!(a, b);
    let probe = fv(&[0.1, -0.2, 0.3, 1.0]);
    assert_eq!(
        a.predict(&probe).unwrap().confidence.to_bits(),
        b.predict(&probe).unwrap().confidence.to_bits()
    );
}

#[test]
fn single_class_data_is_rejected() {
    let data: Vec<(FeatureVector, Class)> = (0..10)
        .map(|i| (fv(&[i as f64, 1.0]), Class::Event))
        .collect();
    let err = train(&data, &small_arch(2), &quick_config(0)).unwrap_err();
    assert!(matches!(err, Error::SingleClassTrainingData));
}

#[test]
fn dimension_mismatch_is_rejected() {
    let data = gaussian_blobs(10, 3, 3.0, 0.5, 0);
    let model = train(&data, &small_arch(3), &quick_config(0)).unwrap();
    assert!(model.predict(&fv(&[1.0, 2.0])).is_err());

    let mut bad = gaussian_blobs(10, 3, 3.0, 0.5, 0);
    bad.push((fv(&[1.0]), Class::Event));
    assert!(train(&bad, &small_arch(3), &quick_config(0)).is_err());
}

#[test]
fn separable_blobs_reach_high_validation_accuracy() {
    let data = gaussian_blobs(100, 2, 4.0, 0.5, 42);
    assert!(
        centroid_accuracy(&data) >= 0.99,
        "blob dataset is not separable enough for the oracle"
    );
    let model = train(&data, &small_arch(2), &quick_config(42)).unwrap();
    assert!(
        model.summary.final_validation_accuracy >= 0.95,
        "validation accuracy {}",
        model.summary.final_validation_accuracy
    );
}

#[test]
fn deep_blob_interior_point_is_confidently_event() {
    let data = gaussian_blobs(100, 2, 4.0, 0.5, 13);
    // Oracle: the blob centers sit at +-separation/2; a point at the Event
    // center is far inside by construction.
    assert!(centroid_accuracy(&data) >= 0.99);
    let model = train(&data, &small_arch(2), &quick_config(13)).unwrap();
    let p = model.predict(&fv(&[2.0, 2.0])).unwrap();
    assert_eq!(p.label, Class::Event);
    assert!(p.confidence > 0.9, "confidence {}", p.confidence);
}

#[test]
fn evaluate_perfect_and_degenerate_predictors() {
    let arch = small_arch(2);
    // Strongly negative output bias: everything predicted NotEvent.
    let mut negative_net = zero_network(&arch);
    let last = negative_net.layers.len() - 1;
    negative_net.layers[last].b[0] = -10.0;
    let all_negative = ClassifierModel::from_network(arch.clone(), negative_net);

    let balanced: Vec<(FeatureVector, Class)> = (0..10)
        .map(|i| {
            let class = if i % 2 == 0 { Class::Event } else { Class::NotEvent };
            (fv(&[i as f64, 1.0]), class)
        })
        .collect();
    let eval = evaluate_classifier(&all_negative, &balanced).unwrap();
    assert!((eval.accuracy - 0.5).abs() < 1e-12);
    assert_eq!(eval.recall, 0.0);
    assert_eq!(eval.precision, 0.0);

    // A separable problem the trained model nails: all metrics 1.
    let data = gaussian_blobs(80, 2, 5.0, 0.4, 5);
    let model = train(&data, &arch, &quick_config(5)).unwrap();
    let clean: Vec<(FeatureVector, Class)> = vec![
        (fv(&[2.5, 2.5]), Class::Event),
        (fv(&[2.4, 2.6]), Class::Event),
        (fv(&[-2.5, -2.5]), Class::NotEvent),
        (fv(&[-2.6, -2.4]), Class::NotEvent),
    ];
    let eval = evaluate_classifier(&model, &clean).unwrap();
    assert_eq!(eval.accuracy, 1.0);
    assert_eq!(eval.precision, 1.0);
    assert_eq!(eval.recall, 1.0);

    assert!(evaluate_classifier(&model, &[]).is_err());
}

#[test]
fn gradient_check_small_network() {
    let arch = NetworkArchitecture {
        input_dim: 4,
        hidden_layers: vec![8],
        dropout_rate: 0.0,
    };
    let samples = vec![
        (fv(&[0.5, -0.25, 1.0, 0.75]), Class::Event),
        (fv(&[-0.5, 0.3, -1.2, 0.1]), Class::NotEvent),
        (fv(&[0.9, 0.9, -0.4, -0.8]), Class::Event),
    ];
    let error = gradient_check(&arch, &samples, 17).unwrap();
    assert!(error < 1e-4, "max relative error {error}");

    let again = gradient_check(&arch, &samples, 17).unwrap();
    assert_eq!(error.to_bits(), again.to_bits());
}

#[test]
fn gradient_check_zero_degenerate_is_finite() {
    let arch = NetworkArchitecture {
        input_dim: 3,
        hidden_layers: vec![4],
        dropout_rate: 0.0,
    };
    let samples = vec![(fv(&[0.0, 0.0, 0.0]), Class::NotEvent)];
    // A zero input parks every hidden unit exactly on the rectifier kink,
    // where central differences straddle the corner; the contract here is
    // only that the check stays finite.
    let error = gradient_check(&arch, &samples, 0).unwrap();
    assert!(error.is_finite());
}

#[test]
fn inverted_dropout_preserves_expected_activation() {
    use rand::SeedableRng;
    let arch = NetworkArchitecture {
        input_dim: 6,
        hidden_layers: vec![32],
        dropout_rate: 0.5,
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let network = Network::init(&arch, &mut rng);
    let x = Array2::from_shape_vec((1, 6), vec![0.8, -0.3, 1.2, 0.5, -0.9, 0.4]).unwrap();

    let reference = network.forward(&x, None).logits[(0, 0)];
    let rounds = 20_000;
    let mut mean = 0.0;
    for _ in 0..rounds {
        mean += network.forward(&x, Some((0.5, &mut rng))).logits[(0, 0)];
    }
    mean /= rounds as f64;
    assert!(
        (mean - reference).abs() <= 0.02 * reference.abs().max(0.05),
        "dropout mean {mean} vs reference {reference}"
    );
}

#[test]
fn convex_problem_loss_is_non_increasing() {
    // No hidden layers: a single sigmoid unit, which makes the loss convex.
    let arch = NetworkArchitecture {
        input_dim: 2,
        hidden_layers: vec![],
        dropout_rate: 0.0,
    };
    let data = gaussian_blobs(90, 2, 3.0, 0.7, 23);
    let cfg = TrainingConfig {
        learning_rate: 0.05,
        momentum: 0.0,
        batch_size: 512, // full batch
        max_epochs: 40,
        patience: 40,
        validation_fraction: 0.1,
        seed: 23,
    };
    let model = train(&data, &arch, &cfg).unwrap();
    let losses = &model.summary.train_losses;
    assert!(losses.len() >= 10);
    for pair in losses.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "loss increased: {} -> {}",
            pair[0],
            pair[1]
        );
    }
}

#[test]
fn model_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    let data = gaussian_blobs(50, 3, 3.0, 0.6, 31);
    let model = train(&data, &small_arch(3), &quick_config(31)).unwrap();
    save_model(&path, &model).unwrap();
    let loaded = load_model(&path).unwrap();

    assert_eq!(loaded.architecture(), model.architecture());
    assert_eq!(loaded.summary.epochs_run, model.summary.epochs_run);
    assert_eq!(loaded.summary.seed, model.summary.seed);
    for (feature, _) in data.iter().take(10) {
        let a = model.predict(feature).unwrap();
        let b = loaded.predict(feature).unwrap();
        assert_eq!(a.confidence.to_bits(), b.confidence.to_bits());
        assert_eq!(a.label, b.label);
    }
}

#[test]
fn load_rejects_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.bin");
    std::fs::write(&path, b"definitely not a model").unwrap();
    assert!(load_model(&path).is_err());
}
