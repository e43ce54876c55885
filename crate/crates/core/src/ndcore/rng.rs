use rand_core::RngCore;
use rand_distr::{Bernoulli, Distribution, Normal};

use super::Tensor;
use crate::error::{Error, Result};

/// Counter-based random stream.
///
/// Output `k` is a pure function of `(key, k)`, so a stream is reproduced
/// exactly by its seed and the number of draws taken. Children made with
/// [`RngStream::split`] get a fresh key and never advance the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed ^ GOLDEN),
            counter: 0,
        }
    }

    /// Independent child stream named by `label`.
    pub fn split(&self, label: &str) -> RngStream {
        Self {
            key: mix64(self.key ^ mix64(fnv1a(label.as_bytes()))),
            counter: 0,
        }
    }

    /// Independent child stream named by an index.
    pub fn split_index(&self, index: u64) -> RngStream {
        Self {
            key: mix64(self.key.rotate_left(17) ^ mix64(index.wrapping_add(GOLDEN))),
            counter: 0,
        }
    }

    /// Number of 64-bit draws taken so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        // Lemire's multiply-shift; bias is below 2^-64 * n and irrelevant here.
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            idx.swap(i, j);
        }
        idx
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let c = self.counter;
        self.counter = self.counter.wrapping_add(1);
        mix64(mix64(c.wrapping_mul(GOLDEN) ^ self.key).wrapping_add(self.key))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dst)
    }
}

pub fn sample_gaussian(
    shape: &[usize],
    mean: f64,
    std: f64,
    rng: &mut RngStream,
) -> Result<Tensor> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::invalid(format!(
            "standard deviation must be >= 0, got {std}"
        )));
    }
    let n: usize = shape.iter().product();
    if std == 0.0 {
        return Ok(Tensor::full(shape, mean));
    }
    let dist = Normal::new(mean, std).map_err(|e| Error::invalid(e.to_string()))?;
    let data = (0..n).map(|_| dist.sample(rng)).collect();
    Tensor::new(shape.to_vec(), data)
}

/// 0/1 mask whose entries are 1 with probability `keep_prob`.
pub fn sample_bernoulli_mask(
    shape: &[usize],
    keep_prob: f64,
    rng: &mut RngStream,
) -> Result<Tensor> {
    let dist = Bernoulli::new(keep_prob).map_err(|_| {
        Error::invalid(format!(
            "keep probability must lie in [0, 1], got {keep_prob}"
        ))
    })?;
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| if dist.sample(rng) { 1.0 } else { 0.0 })
        .collect();
    Tensor::new(shape.to_vec(), data)
}

/// Independent ±1 signs with equal probability.
pub fn sample_rademacher(shape: &[usize], rng: &mut RngStream) -> Tensor {
    let n: usize = shape.iter().product();
    let mut data = Vec::with_capacity(n);
    while data.len() < n {
        let mut bits = rng.next_u64();
        for _ in 0..64.min(n - data.len()) {
            data.push(if bits & 1 == 1 { 1.0 } else { -1.0 });
            bits >>= 1;
        }
    }
    Tensor::new(shape.to_vec(), data).expect("length matches shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_std(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var.sqrt())
    }

    #[test]
    fn zero_std_gaussian_is_constant() {
        let mut rng = RngStream::new(1);
        let t = sample_gaussian(&[2, 2], 0.0, 0.0, &mut rng).unwrap();
        assert_eq!(t.data(), &[0.0; 4]);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngStream::new(7);
        let t = sample_gaussian(&[100_000], 1.0, 2.0, &mut rng).unwrap();
        let (m, s) = mean_std(t.data());
        assert!((m - 1.0).abs() < 0.02, "mean {m}");
        assert!((s - 2.0).abs() < 0.02, "std {s}");
    }

    #[test]
    fn negative_std_rejected() {
        let mut rng = RngStream::new(1);
        assert!(matches!(
            sample_gaussian(&[1], 0.0, -1.0, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn samplers_are_deterministic() {
        let a = sample_gaussian(&[50], 0.0, 1.0, &mut RngStream::new(3)).unwrap();
        let b = sample_gaussian(&[50], 0.0, 1.0, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
        let a = sample_rademacher(&[70], &mut RngStream::new(3));
        let b = sample_rademacher(&[70], &mut RngStream::new(3));
        assert_eq!(a, b);
    }

    #[test]
    fn bernoulli_edges_and_rate() {
        let mut rng = RngStream::new(11);
        assert!(sample_bernoulli_mask(&[100], 1.0, &mut rng)
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 1.0));
        assert!(sample_bernoulli_mask(&[100], 0.0, &mut rng)
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
        let m = sample_bernoulli_mask(&[100_000], 0.8, &mut rng).unwrap();
        let frac = m.mean();
        assert!((frac - 0.8).abs() < 0.004, "fraction {frac}");
        assert!(sample_bernoulli_mask(&[1], 1.5, &mut rng).is_err());
        assert!(sample_bernoulli_mask(&[1], -0.1, &mut rng).is_err());
    }

    #[test]
    fn rademacher_signs() {
        let mut rng = RngStream::new(5);
        let one = sample_rademacher(&[1], &mut rng);
        assert!(one.data()[0] == 1.0 || one.data()[0] == -1.0);
        let t = sample_rademacher(&[100_000], &mut rng);
        assert!(t.mean().abs() < 0.01);
        assert!(t.data().iter().all(|v| v * v == 1.0));
    }

    #[test]
    fn split_does_not_advance_parent() {
        let mut a = RngStream::new(9);
        let mut b = RngStream::new(9);
        let mut child = a.split("member-0");
        child.next_u64();
        assert_eq!(a.next_u64(), b.next_u64());
        assert_ne!(a.split("x"), a.split("y"));
        assert_ne!(a.split_index(0), a.split_index(1));
    }

    #[test]
    fn split_child_is_uncorrelated_with_parent() {
        let parent = RngStream::new(21);
        let mut p = parent.clone();
        let mut c = parent.split("child");
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| p.uniform() - 0.5).collect();
        let ys: Vec<f64> = (0..n).map(|_| c.uniform() - 0.5).collect();
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / n as f64;
        // var(U - 0.5) = 1/12, so the correlation estimate has s.e. about 1/sqrt(n).
        assert!((cov * 12.0).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut rng = RngStream::new(2);
        let mut p = rng.permutation(100);
        p.sort_unstable();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }
}
