//! Dataset ingestion and the supervised windowing pipeline.
//!
//! Raw series are held in a [`FrameTable`]. The pipeline is
//! split (chronological) → standardize (training statistics) → window, see
//! [`train_test_windows`].

mod cache;
mod loaders;
mod synth;

pub use cache::{read_norm_stats, read_window_cache, write_norm_stats, write_window_cache};
pub use loaders::{load_jena, load_pm25, JENA_COLUMNS, PM25_COLUMNS};
pub use synth::{synth_series, SynthKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndcore::Tensor;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Per-feature z-score statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Affine map from standardized target values back to original units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScale {
    pub mean: f64,
    pub std: f64,
}

impl TargetScale {
    pub const IDENTITY: TargetScale = TargetScale {
        mean: 0.0,
        std: 1.0,
    };

    pub fn descale(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }
}

impl Default for TargetScale {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// A multivariate time series: `T` rows of `F` features.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTable {
    /// Seconds since the Unix epoch, strictly increasing.
    pub timestamps: Vec<i64>,
    /// `T × F`
    pub features: Tensor,
    pub names: Vec<String>,
    pub target: usize,
    /// Position of row 0 within the series this table was cut from.
    pub offset: usize,
    /// Statistics this table was standardized with, if any.
    pub norm: Option<NormStats>,
}

impl FrameTable {
    pub fn new(
        timestamps: Vec<i64>,
        features: Tensor,
        names: Vec<String>,
        target: usize,
    ) -> Result<Self> {
        if features.rank() != 2
            || features.rows() != timestamps.len()
            || features.cols() != names.len()
        {
            return Err(Error::invalid(format!(
                "frame of shape {:?} with {} timestamps and {} names",
                features.shape(),
                timestamps.len(),
                names.len()
            )));
        }
        if target >= names.len() {
            return Err(Error::invalid(format!(
                "target column {target} out of range"
            )));
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "timestamps not increasing at row {}",
                w + 1
            )));
        }
        if !features.is_finite() {
            return Err(Error::invalid("frame contains non-finite values"));
        }
        Ok(Self {
            timestamps,
            features,
            names,
            target,
            offset: 0,
            norm: None,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.names.len()
    }

    pub fn target_values(&self) -> Vec<f64> {
        self.features.column(self.target)
    }

    /// Target scale implied by this table's normalization.
    pub fn target_scale(&self) -> TargetScale {
        self.norm
            .as_ref()
            .map_or(TargetScale::IDENTITY, |n| TargetScale {
                mean: n.mean[self.target],
                std: n.std[self.target],
            })
    }

    fn slice(&self, start: usize, end: usize) -> Result<FrameTable> {
        let idx: Vec<usize> = (start..end).collect();
        Ok(FrameTable {
            timestamps: self.timestamps[start..end].to_vec(),
            features: self.features.gather_rows(&idx)?,
            names: self.names.clone(),
            target: self.target,
            offset: self.offset + start,
            norm: self.norm.clone(),
        })
    }
}

/// Supervised pairs: `x` is `n × past × F`, `y` is `n × H` (standardized target).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub x: Tensor,
    pub y: Tensor,
    pub past: usize,
    pub horizon: usize,
    pub norm: Option<NormStats>,
    pub target_scale: TargetScale,
    /// Series position of window 0's first input step.
    pub offset: usize,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn features(&self) -> usize {
        self.x.shape()[2]
    }

    /// Series positions of window `i`'s inputs.
    pub fn input_steps(&self, i: usize) -> std::ops::Range<usize> {
        let s = self.offset + i;
        s..s + self.past
    }

    /// Series positions of window `i`'s targets.
    pub fn target_steps(&self, i: usize) -> std::ops::Range<usize> {
        let s = self.offset + i + self.past;
        s..s + self.horizon
    }

    /// Rows `idx` as a new window set.
    pub fn select(&self, idx: &[usize]) -> Result<WindowSet> {
        Ok(WindowSet {
            x: self.x.gather_rows(idx)?,
            y: self.y.gather_rows(idx)?,
            ..self.clone()
        })
    }
}

/// Z-scores every feature. With `stats == None` the statistics are computed
/// from `frames` (population standard deviation) and returned.
pub fn standardize(
    frames: &FrameTable,
    stats: Option<&NormStats>,
) -> Result<(FrameTable, NormStats)> {
    let f = frames.feature_count();
    let stats = match stats {
        Some(s) => {
            if s.mean.len() != f || s.std.len() != f {
                return Err(Error::Config(format!(
                    "normalization statistics cover {} features, frame has {f}",
                    s.mean.len()
                )));
            }
            if let Some(j) = s.std.iter().position(|v| !(*v > 0.0)) {
                return Err(Error::Config(format!(
                    "feature `{}` has zero variance",
                    s.names[j]
                )));
            }
            s.clone()
        }
        None => {
            if frames.is_empty() {
                return Err(Error::invalid(
                    "cannot compute statistics of an empty frame",
                ));
            }
            let n = frames.len() as f64;
            let mut mean = Vec::with_capacity(f);
            let mut std = Vec::with_capacity(f);
            for j in 0..f {
                let col = frames.features.column(j);
                let m = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
                if !(var.sqrt() > 1e-12 * m.abs().max(1.0)) {
                    return Err(Error::Config(format!(
                        "feature `{}` has zero variance",
                        frames.names[j]
                    )));
                }
                mean.push(m);
                std.push(var.sqrt());
            }
            NormStats {
                names: frames.names.clone(),
                mean,
                std,
            }
        }
    };
    let cols = f;
    let mut data = frames.features.data().to_vec();
    for (k, v) in data.iter_mut().enumerate() {
        let j = k % cols;
        *v = (*v - stats.mean[j]) / stats.std[j];
    }
    let mut out = frames.clone();
    out.features = Tensor::new(frames.features.shape().to_vec(), data)?;
    out.norm = Some(stats.clone());
    Ok((out, stats))
}

/// Inverse of [`standardize`].
pub fn destandardize(frames: &FrameTable, stats: &NormStats) -> Result<FrameTable> {
    let cols = frames.feature_count();
    if stats.mean.len() != cols {
        return Err(Error::Config("statistics do not match frame".into()));
    }
    let mut data = frames.features.data().to_vec();
    for (k, v) in data.iter_mut().enumerate() {
        let j = k % cols;
        *v = *v * stats.std[j] + stats.mean[j];
    }
    let mut out = frames.clone();
    out.features = Tensor::new(frames.features.shape().to_vec(), data)?;
    out.norm = None;
    Ok(out)
}

/// Stride-1 sliding windows of `past` inputs and the next `horizon` targets.
pub fn make_windows(frames: &FrameTable, past: usize, horizon: usize) -> Result<WindowSet> {
    if past == 0 || horizon == 0 {
        return Err(Error::invalid(
            "window and horizon lengths must be positive",
        ));
    }
    let t = frames.len();
    if t < past + horizon {
        return Err(Error::invalid(format!(
            "series of length {t} is too short for {past} inputs and {horizon} targets"
        )));
    }
    let n = t - past - horizon + 1;
    let f = frames.feature_count();
    let data = frames.features.data();
    let mut x = Vec::with_capacity(n * past * f);
    let mut y = Vec::with_capacity(n * horizon);
    for i in 0..n {
        x.extend_from_slice(&data[i * f..(i + past) * f]);
        for h in 0..horizon {
            y.push(data[(i + past + h) * f + frames.target]);
        }
    }
    Ok(WindowSet {
        x: Tensor::new(vec![n, past, f], x)?,
        y: Tensor::new(vec![n, horizon], y)?,
        past,
        horizon,
        norm: frames.norm.clone(),
        target_scale: frames.target_scale(),
        offset: frames.offset,
    })
}

/// Chronological split at `floor(T · train_fraction)`; no shuffling.
pub fn split(frames: &FrameTable, train_fraction: f64) -> Result<(FrameTable, FrameTable)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let boundary = (frames.len() as f64 * train_fraction).floor() as usize;
    Ok((
        frames.slice(0, boundary)?,
        frames.slice(boundary, frames.len())?,
    ))
}

/// Split, standardize both sides with the training statistics, then window
/// each side separately so no test input precedes the split boundary.
pub fn train_test_windows(
    frames: &FrameTable,
    train_fraction: f64,
    past: usize,
    horizon: usize,
) -> Result<(WindowSet, WindowSet)> {
    let (train, test) = split(frames, train_fraction)?;
    let (train, stats) = standardize(&train, None)?;
    let (test, _) = standardize(&test, Some(&stats))?;
    let side = |f: &FrameTable, name: &str| {
        make_windows(f, past, horizon).map_err(|_| {
            Error::invalid(format!(
                "{name} split has {} steps, too few for a single window of {past}+{horizon}",
                f.len()
            ))
        })
    };
    Ok((side(&train, "training")?, side(&test, "test")?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(t: usize) -> FrameTable {
        let data: Vec<f64> = (0..t).map(|v| v as f64).collect();
        FrameTable::new(
            (0..t as i64).map(|v| v * 3600).collect(),
            Tensor::new(vec![t, 1], data).unwrap(),
            vec!["value".into()],
            0,
        )
        .unwrap()
    }

    #[test]
    fn window_counts() {
        assert_eq!(make_windows(&ramp(14), 12, 1).unwrap().len(), 2);
        let w = make_windows(&ramp(24), 12, 12).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(
            w.y.data(),
            (12..24).map(|v| v as f64).collect::<Vec<_>>().as_slice()
        );
        assert!(make_windows(&ramp(12), 12, 1).is_err());
    }

    #[test]
    fn ramp_targets() {
        let w = make_windows(&ramp(24), 12, 3).unwrap();
        assert_eq!(&w.y.data()[0..3], &[12.0, 13.0, 14.0]);
        assert_eq!(w.len(), 24 - 12 - 3 + 1);
    }

    #[test]
    fn windows_reconstruct_series() {
        let frame = ramp(40);
        let w = make_windows(&frame, 12, 2).unwrap();
        let mut rebuilt: Vec<f64> = w.x.data()[0..12].to_vec();
        for i in 1..w.len() {
            rebuilt.push(w.x.data()[i * 12 + 11]);
        }
        rebuilt.extend_from_slice(&w.y.data()[(w.len() - 1) * 2..]);
        assert_eq!(rebuilt, frame.target_values());
    }

    #[test]
    fn split_boundaries() {
        let (a, b) = split(&ramp(100), 0.8).unwrap();
        assert_eq!(a.len(), 80);
        assert_eq!(b.len(), 20);
        assert_eq!(b.offset, 80);
        assert_eq!(b.target_values()[0], 80.0);
        assert!(split(&ramp(100), 1.0).is_err());
        assert!(split(&ramp(100), 0.0).is_err());
        assert_eq!(
            split(&ramp(100), 0.8).unwrap(),
            split(&ramp(100), 0.8).unwrap()
        );
    }

    #[test]
    fn no_leakage_across_split() {
        let (train, test) = train_test_windows(&ramp(100), 0.8, 4, 2).unwrap();
        let boundary = 80;
        for i in 0..test.len() {
            assert!(test.input_steps(i).start >= boundary);
        }
        let train_targets: std::collections::BTreeSet<usize> = (0..train.len())
            .flat_map(|i| train.target_steps(i))
            .collect();
        let test_targets: std::collections::BTreeSet<usize> =
            (0..test.len()).flat_map(|i| test.target_steps(i)).collect();
        assert!(train_targets.is_disjoint(&test_targets));
        assert!(train_targets.iter().all(|&s| s < boundary));
    }

    #[test]
    fn short_test_side_rejected() {
        assert!(train_test_windows(&ramp(40), 0.8, 12, 1).is_err());
    }

    #[test]
    fn standardize_moments_and_round_trip() {
        let frame = ramp(50);
        let (z, stats) = standardize(&frame, None).unwrap();
        let col = z.target_values();
        let m = col.iter().sum::<f64>() / 50.0;
        let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 50.0).sqrt();
        assert!(m.abs() < 1e-9);
        assert!((s - 1.0).abs() < 1e-9);

        let (_, test) = split(&frame, 0.5).unwrap();
        let (zt, _) = standardize(&test, Some(&stats)).unwrap();
        let back = destandardize(&zt, &stats).unwrap();
        for (a, b) in back.features.data().iter().zip(test.features.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_feature_rejected() {
        let frame = FrameTable::new(
            vec![0, 1, 2],
            Tensor::new(vec![3, 2], vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0]).unwrap(),
            vec!["a".into(), "flat".into()],
            0,
        )
        .unwrap();
        match standardize(&frame, None) {
            Err(Error::Config(msg)) => assert!(msg.contains("flat")),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
