//! Model persistence.
//!
//! Binary container: magic, format version, architecture descriptor,
//! training metadata, then per-layer row-major weights and biases as
//! little-endian f64. The round trip is bit-exact, so a reloaded model
//! produces identical confidences.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

use super::net::{Layer, Network};
use super::{ClassifierModel, NetworkArchitecture, TrainingSummary};

const MAGIC: &[u8; 4] = b"NTC1";
const VERSION: u32 = 1;

pub fn save_model(path: &Path, model: &ClassifierModel) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let w = |out: &mut BufWriter<File>, bytes: &[u8]| -> Result<()> {
        out.write_all(bytes).map_err(|e| Error::io(path, e))
    };

    w(&mut out, MAGIC)?;
    w(&mut out, &VERSION.to_le_bytes())?;
    w(&mut out, &(model.arch.input_dim as u64).to_le_bytes())?;
    w(&mut out, &(model.arch.hidden_layers.len() as u64).to_le_bytes())?;
    for &width in &model.arch.hidden_layers {
        w(&mut out, &(width as u64).to_le_bytes())?;
    }
    w(&mut out, &model.arch.dropout_rate.to_le_bytes())?;
    w(&mut out, &model.decision_threshold.to_le_bytes())?;
    w(&mut out, &model.summary.seed.to_le_bytes())?;
    w(&mut out, &(model.summary.epochs_run as u64).to_le_bytes())?;
    w(&mut out, &model.summary.final_validation_accuracy.to_le_bytes())?;

    w(&mut out, &(model.network.layers.len() as u64).to_le_bytes())?;
    for layer in &model.network.layers {
        let (rows, cols) = layer.w.dim();
        w(&mut out, &(rows as u64).to_le_bytes())?;
        w(&mut out, &(cols as u64).to_le_bytes())?;
        for value in layer.w.iter() {
            w(&mut out, &value.to_le_bytes())?;
        }
        for value in layer.b.iter() {
            w(&mut out, &value.to_le_bytes())?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    inner: BufReader<File>,
    path: &'a Path,
}

impl Reader<'_> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buffer = [0u8; N];
        self.inner
            .read_exact(&mut buffer)
            .map_err(|e| Error::io(self.path, e))?;
        Ok(buffer)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Format("value exceeds platform usize".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn load_model(path: &Path) -> Result<ClassifierModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        inner: BufReader::new(file),
        path,
    };

    let magic: [u8; 4] = r.bytes()?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "{}: not a classifier model file",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(r.bytes()?);
    if version != VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported model format version {version}",
            path.display()
        )));
    }

    let input_dim = r.usize()?;
    let hidden_count = r.usize()?;
    let mut hidden_layers = Vec::with_capacity(hidden_count);
    for _ in 0..hidden_count {
        hidden_layers.push(r.usize()?);
    }
    let dropout_rate = r.f64()?;
    let decision_threshold = r.f64()?;
    let seed = r.u64()?;
    let epochs_run = r.usize()?;
    let final_validation_accuracy = r.f64()?;

    let arch = NetworkArchitecture {
        input_dim,
        hidden_layers,
        dropout_rate,
    };
    arch.validate()?;

    let layer_count = r.usize()?;
    if layer_count != arch.hidden_layers.len() + 1 {
        return Err(Error::Format(format!(
            "{}: layer count {} does not match architecture",
            path.display(),
            layer_count
        )));
    }
    let mut expected_in = arch.input_dim;
    let mut layers = Vec::with_capacity(layer_count);
    for (k, expected_out) in arch
        .hidden_layers
        .iter()
        .copied()
        .chain(std::iter::once(1usize))
        .enumerate()
    {
        let rows = r.usize()?;
        let cols = r.usize()?;
        if rows != expected_out || cols != expected_in {
            return Err(Error::Format(format!(
                "{}: layer {k} has shape {rows}x{cols}, expected {expected_out}x{expected_in}",
                path.display()
            )));
        }
        let mut weights = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            weights.push(r.f64()?);
        }
        let mut bias = Vec::with_capacity(rows);
        for _ in 0..rows {
            bias.push(r.f64()?);
        }
        layers.push(Layer {
            w: Array2::from_shape_vec((rows, cols), weights).expect("shape checked"),
            b: Array1::from_vec(bias),
        });
        expected_in = expected_out;
    }

    Ok(ClassifierModel {
        arch,
        network: Network { layers },
        summary: TrainingSummary {
            epochs_run,
            final_validation_accuracy,
            seed,
            train_losses: Vec::new(),
        },
        decision_threshold,
    })
}
