//! Model checkpoints: one JSON document holding the configuration, the
//! training seed and every parameter tensor (shape plus row-major values).
//! Floats are written in shortest round-trip form, so save → load is exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Model;
use crate::error::{Error, Result};

const FORMAT: &str = "tsuq-checkpoint/1";

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    seed: u64,
    model: Model,
}

pub fn save_checkpoint(path: impl AsRef<Path>, model: &Model, seed: u64) -> Result<()> {
    let path = path.as_ref();
    let doc = CheckpointFile {
        format: FORMAT.to_string(),
        seed,
        model: model.clone(),
    };
    let text = serde_json::to_string(&doc).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    crate::fsutil::write_atomic(path, text.as_bytes())
}

/// Loads a checkpoint and returns the model with its training seed.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Model, u64)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: CheckpointFile = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    if doc.format != FORMAT {
        return Err(Error::Format(format!(
            "{}: unsupported checkpoint format `{}`",
            path.display(),
            doc.format
        )));
    }
    doc.model.validate()?;
    Ok((doc.model, doc.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::{sample_gaussian, RngStream};
    use crate::neural::model::{build_model, Architecture, ModelConfig, UqMethod};

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for (arch, method) in [
            (Architecture::Mlp, UqMethod::Flipout),
            (Architecture::Lstm, UqMethod::Dropout),
            (Architecture::Mlp, UqMethod::Baseline),
        ] {
            let cfg = ModelConfig::new(arch, method, 2, 3);
            let model = build_model(&cfg, &mut RngStream::new(42)).unwrap();
            let p = dir
                .path()
                .join(format!("{}_{}.json", arch.key(), method.key()));
            save_checkpoint(&p, &model, 42).unwrap();
            let (back, seed) = load_checkpoint(&p).unwrap();
            assert_eq!(seed, 42);
            assert_eq!(back, model);
            let x = sample_gaussian(&[5, 12, 2], 0.0, 1.0, &mut RngStream::new(1)).unwrap();
            let a = model
                .forward_stochastic(&x, &mut RngStream::new(2))
                .unwrap();
            let b = back.forward_stochastic(&x, &mut RngStream::new(2)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tampered_shapes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ModelConfig::new(Architecture::Mlp, UqMethod::Ensemble, 2, 1);
        let model = build_model(&cfg, &mut RngStream::new(0)).unwrap();
        let p = dir.path().join("m.json");
        save_checkpoint(&p, &model, 0).unwrap();
        let text = std::fs::read_to_string(&p)
            .unwrap()
            .replace("\"features\":2", "\"features\":3");
        std::fs::write(&p, text).unwrap();
        assert!(load_checkpoint(&p).is_err());
    }
}
