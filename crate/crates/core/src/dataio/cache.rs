//! Binary window cache.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `TSUQWIN1` |
//! | 5×8   | `u64` n, past, features, horizon, offset |
//! | 2×8   | `f64` target mean, target std |
//! | n·past·features·8 | `x`, row-major |
//! | n·horizon·8       | `y`, row-major |
//!
//! Normalization statistics are stored separately as JSON.

use std::path::Path;

use super::{NormStats, TargetScale, WindowSet};
use crate::error::{Error, Result};
use crate::ndcore::Tensor;

const MAGIC: &[u8; 8] = b"TSUQWIN1";

pub fn write_window_cache(path: impl AsRef<Path>, windows: &WindowSet) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(64 + 8 * (windows.x.len() + windows.y.len()));
    buf.extend_from_slice(MAGIC);
    for v in [
        windows.len(),
        windows.past,
        windows.features(),
        windows.horizon,
        windows.offset,
    ] {
        buf.extend_from_slice(&(v as u64).to_le_bytes());
    }
    buf.extend_from_slice(&windows.target_scale.mean.to_le_bytes());
    buf.extend_from_slice(&windows.target_scale.std.to_le_bytes());
    for v in windows.x.data().iter().chain(windows.y.data()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a cache written by [`write_window_cache`]; `norm` is attached as given.
pub fn read_window_cache(path: impl AsRef<Path>, norm: Option<NormStats>) -> Result<WindowSet> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    if bytes.len() < 64 || &bytes[..8] != MAGIC {
        return Err(bad("not a window cache"));
    }
    let word = |k: usize| -> [u8; 8] { bytes[8 + 8 * k..16 + 8 * k].try_into().expect("8 bytes") };
    let [n, past, f, h, offset] = [0, 1, 2, 3, 4].map(|k| u64::from_le_bytes(word(k)) as usize);
    let target_scale = TargetScale {
        mean: f64::from_le_bytes(word(5)),
        std: f64::from_le_bytes(word(6)),
    };
    let nx = n * past * f;
    let ny = n * h;
    if bytes.len() != 64 + 8 * (nx + ny) {
        return Err(bad("payload length does not match header"));
    }
    let floats: Vec<f64> = bytes[64..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(WindowSet {
        x: Tensor::new(vec![n, past, f], floats[..nx].to_vec())?,
        y: Tensor::new(vec![n, h], floats[nx..].to_vec())?,
        past,
        horizon: h,
        norm,
        target_scale,
        offset,
    })
}

pub fn write_norm_stats(path: impl AsRef<Path>, stats: &NormStats) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(stats).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_norm_stats(path: impl AsRef<Path>) -> Result<NormStats> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{synth_series, train_test_windows, SynthKind};

    #[test]
    fn cache_round_trip_is_exact() {
        let frame = synth_series(SynthKind::Sine, 120, 0.1, 3).unwrap();
        let (train, _) = train_test_windows(&frame, 0.8, 12, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("train.bin");
        write_window_cache(&p, &train).unwrap();
        let s = dir.path().join("norm.json");
        write_norm_stats(&s, train.norm.as_ref().unwrap()).unwrap();
        let back = read_window_cache(&p, Some(read_norm_stats(&s).unwrap())).unwrap();
        assert_eq!(back, train);
    }

    #[test]
    fn truncated_cache_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.bin");
        std::fs::write(&p, b"TSUQWIN1").unwrap();
        assert!(matches!(read_window_cache(&p, None), Err(Error::Format(_))));
    }
}
