//! CSV prediction dumps: `example_id,step,y_true,mean,std`, one row per
//! example and horizon step (1-based).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PredictiveDistribution;
use crate::error::{Error, Result};
use crate::ndcore::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub example_id: usize,
    pub step: usize,
    pub y_true: f64,
    pub mean: f64,
    pub std: f64,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_predictions(
    path: impl AsRef<Path>,
    y_true: &Tensor,
    pd: &PredictiveDistribution,
) -> Result<()> {
    let path = path.as_ref();
    if y_true.shape() != pd.mean.shape() {
        return Err(Error::invalid(format!(
            "targets {:?} do not match predictions {:?}",
            y_true.shape(),
            pd.mean.shape()
        )));
    }
    let mut out = String::from("example_id,step,y_true,mean,std\n");
    for i in 0..pd.len() {
        for h in 0..pd.horizon() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i,
                h + 1,
                fmt_f64(y_true.at(i, h)),
                fmt_f64(pd.mean.at(i, h)),
                fmt_f64(pd.std.at(i, h))
            ));
        }
    }
    crate::fsutil::write_atomic(path, out.as_bytes())
}

/// Reads a dump back as `(y_true, mean, std)`, each `n × H`.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<(Tensor, Tensor, Tensor)> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (k, rec) in reader.deserialize::<PredictionRow>().enumerate() {
        let row = rec.map_err(|e| Error::Row {
            line: k + 2,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    let n = rows.iter().map(|r| r.example_id + 1).max().unwrap_or(0);
    let h = rows.iter().map(|r| r.step).max().unwrap_or(0);
    if n * h != rows.len() || rows.iter().any(|r| r.step == 0) {
        return Err(Error::Format(format!(
            "{}: prediction rows do not form a full grid",
            path.display()
        )));
    }
    let mut y = vec![f64::NAN; n * h];
    let mut mu = vec![f64::NAN; n * h];
    let mut sd = vec![f64::NAN; n * h];
    for r in &rows {
        let k = r.example_id * h + r.step - 1;
        y[k] = r.y_true;
        mu[k] = r.mean;
        sd[k] = r.std;
    }
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::Format(format!(
            "{}: duplicate prediction rows",
            path.display()
        )));
    }
    Ok((
        Tensor::new(vec![n, h], y)?,
        Tensor::new(vec![n, h], mu)?,
        Tensor::new(vec![n, h], sd)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::UqMethod;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pred.csv");
        let y = Tensor::from_rows(&[vec![0.1, 0.2], vec![1.0 / 3.0, -4.5]]).unwrap();
        let pd = PredictiveDistribution {
            mean: Tensor::from_rows(&[vec![0.0, 0.25], vec![0.3, -4.0]]).unwrap(),
            std: Tensor::from_rows(&[vec![1.0, 0.5], vec![0.1, 2.0]]).unwrap(),
            samples: 50,
            method: UqMethod::Bbb,
        };
        write_predictions(&p, &y, &pd).unwrap();
        let (y2, m2, s2) = read_predictions(&p).unwrap();
        assert_eq!(y2, y);
        assert_eq!(m2, pd.mean);
        assert_eq!(s2, pd.std);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("example_id,step,y_true,mean,std\n0,1,"));
    }
}
