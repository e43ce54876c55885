use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `f64` array.
///
/// `shape.iter().product() == data.len()` always holds; constructors reject
/// anything else. Tensors are plain values: operations allocate new ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.shape, raw.data)
    }
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::invalid(format!(
                "shape {shape:?} needs {expected} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    /// Builds a 2-D tensor from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Tensor::new(vec![rows.len(), cols], rows.concat())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(Error::invalid(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    fn dims2(&self, what: &str) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::invalid(format!(
                "{what}: expected a matrix, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(1)
    }

    pub fn cols(&self) -> usize {
        self.shape.last().copied().unwrap_or(1)
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::invalid(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, k: f64) -> Tensor {
        self.map(|v| v * k)
    }

    /// In-place `self += k * other`.
    pub fn axpy(&mut self, k: f64, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::invalid(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
        Ok(())
    }

    /// `(a×b)·(b×c) → (a×c)`.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (a, b) = self.dims2("matmul")?;
        let (b2, c) = other.dims2("matmul")?;
        if b != b2 {
            return Err(Error::invalid(format!(
                "matmul inner dimensions differ: {:?}·{:?}",
                self.shape, other.shape
            )));
        }
        let mut out = vec![0.0; a * c];
        for i in 0..a {
            let row = &mut out[i * c..(i + 1) * c];
            for k in 0..b {
                let lhs = self.data[i * b + k];
                if lhs == 0.0 {
                    continue;
                }
                let rhs = &other.data[k * c..(k + 1) * c];
                for (o, &r) in row.iter_mut().zip(rhs) {
                    *o += lhs * r;
                }
            }
        }
        Tensor::new(vec![a, c], out)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn matmul_tn(&self, other: &Tensor) -> Result<Tensor> {
        let (b, a) = self.dims2("matmul_tn")?;
        let (b2, c) = other.dims2("matmul_tn")?;
        if b != b2 {
            return Err(Error::invalid(format!(
                "matmul_tn leading dimensions differ: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let mut out = vec![0.0; a * c];
        for k in 0..b {
            let rhs = &other.data[k * c..(k + 1) * c];
            for i in 0..a {
                let lhs = self.data[k * a + i];
                if lhs == 0.0 {
                    continue;
                }
                let row = &mut out[i * c..(i + 1) * c];
                for (o, &r) in row.iter_mut().zip(rhs) {
                    *o += lhs * r;
                }
            }
        }
        Tensor::new(vec![a, c], out)
    }

    /// `self · otherᵀ`.
    pub fn matmul_nt(&self, other: &Tensor) -> Result<Tensor> {
        let (a, b) = self.dims2("matmul_nt")?;
        let (c, b2) = other.dims2("matmul_nt")?;
        if b != b2 {
            return Err(Error::invalid(format!(
                "matmul_nt trailing dimensions differ: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let mut out = vec![0.0; a * c];
        for i in 0..a {
            let lhs = &self.data[i * b..(i + 1) * b];
            for j in 0..c {
                let rhs = &other.data[j * b..(j + 1) * b];
                out[i * c + j] = lhs.iter().zip(rhs).map(|(x, y)| x * y).sum();
            }
        }
        Tensor::new(vec![a, c], out)
    }

    pub fn transpose(&self) -> Result<Tensor> {
        let (r, c) = self.dims2("transpose")?;
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Tensor::new(vec![c, r], out)
    }

    /// Adds a length-`cols` vector to every row of a matrix.
    pub fn add_row(&self, row: &Tensor) -> Result<Tensor> {
        let (_, c) = self.dims2("add_row")?;
        if row.len() != c {
            return Err(Error::invalid(format!(
                "row of length {} cannot broadcast over {:?}",
                row.len(),
                self.shape
            )));
        }
        let mut out = self.clone();
        for chunk in out.data.chunks_mut(c) {
            for (o, &b) in chunk.iter_mut().zip(&row.data) {
                *o += b;
            }
        }
        Ok(out)
    }

    /// Column sums of a matrix, as a vector.
    pub fn sum_rows(&self) -> Result<Tensor> {
        let (_, c) = self.dims2("sum_rows")?;
        let mut out = vec![0.0; c];
        for chunk in self.data.chunks(c) {
            for (o, &v) in out.iter_mut().zip(chunk) {
                *o += v;
            }
        }
        Ok(Tensor::vector(out))
    }

    /// Selects entries along the first axis, in the given order.
    pub fn gather_rows(&self, idx: &[usize]) -> Result<Tensor> {
        let n = self.rows();
        let stride = self.data.len().checked_div(n).unwrap_or(0);
        let mut data = Vec::with_capacity(idx.len() * stride);
        for &i in idx {
            if i >= n {
                return Err(Error::invalid(format!("row {i} out of range {n}")));
            }
            data.extend_from_slice(&self.data[i * stride..(i + 1) * stride]);
        }
        let mut shape = self.shape.clone();
        shape[0] = idx.len();
        Tensor::new(shape, data)
    }

    /// Column `j` of a matrix.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let c = self.cols();
        self.data.iter().skip(j).step_by(c).copied().collect()
    }

    /// Matrix made of columns `[start, end)`.
    pub fn column_range(&self, start: usize, end: usize) -> Result<Tensor> {
        let (r, c) = self.dims2("column_range")?;
        if start > end || end > c {
            return Err(Error::invalid(format!(
                "columns {start}..{end} out of range for {:?}",
                self.shape
            )));
        }
        let w = end - start;
        let mut data = Vec::with_capacity(r * w);
        for chunk in self.data.chunks(c) {
            data.extend_from_slice(&chunk[start..end]);
        }
        Tensor::new(vec![r, w], data)
    }

    /// Places two equally tall matrices side by side.
    pub fn hcat(&self, other: &Tensor) -> Result<Tensor> {
        let (r, c1) = self.dims2("hcat")?;
        let (r2, c2) = other.dims2("hcat")?;
        if r != r2 {
            return Err(Error::invalid("hcat row counts differ"));
        }
        let mut data = Vec::with_capacity(r * (c1 + c2));
        for i in 0..r {
            data.extend_from_slice(&self.data[i * c1..(i + 1) * c1]);
            data.extend_from_slice(&other.data[i * c2..(i + 1) * c2]);
        }
        Tensor::new(vec![r, c1 + c2], data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_shape() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn matmul_shapes() {
        let a = Tensor::new(vec![2, 3], (0..6).map(f64::from).collect()).unwrap();
        let b = Tensor::new(vec![3, 4], (0..12).map(f64::from).collect()).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.shape(), &[2, 4]);
        assert_eq!(c.at(1, 2), 3.0 * 2.0 + 4.0 * 6.0 + 5.0 * 10.0);
        assert!(b.matmul(&a).is_err());
    }

    #[test]
    fn transposed_products_agree_with_explicit_transpose() {
        let a = Tensor::new(vec![3, 2], vec![1.0, -2.0, 0.5, 4.0, 3.0, -1.0]).unwrap();
        let b = Tensor::new(vec![3, 4], (0..12).map(|v| v as f64 * 0.3).collect()).unwrap();
        let tn = a.matmul_tn(&b).unwrap();
        assert_eq!(tn, a.transpose().unwrap().matmul(&b).unwrap());
        let c = Tensor::new(vec![4, 2], (0..8).map(|v| v as f64 - 3.0).collect()).unwrap();
        let nt = a.matmul_nt(&c).unwrap();
        assert_eq!(nt, a.matmul(&c.transpose().unwrap()).unwrap());
    }

    #[test]
    fn gather_rows_on_rank3() {
        let t = Tensor::new(vec![3, 2, 2], (0..12).map(f64::from).collect()).unwrap();
        let g = t.gather_rows(&[2, 0]).unwrap();
        assert_eq!(g.shape(), &[2, 2, 2]);
        assert_eq!(g.data(), &[8.0, 9.0, 10.0, 11.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn serde_validates_shape() {
        let bad = r#"{"shape":[2],"data":[1.0]}"#;
        assert!(serde_json::from_str::<Tensor>(bad).is_err());
    }
}
