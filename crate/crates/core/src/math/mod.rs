//! Numerical building blocks: random streams, Cholesky factors, order
//! statistics, bisection and the normal distribution function.

mod linalg;
mod rng;
mod scalar;

pub use linalg::{cholesky, CholFactor, CovMatrix};
pub use rng::{inverse_normal_cdf, Phase, RngStream, StreamCursor};
pub use scalar::{
    bisect_root, compensated_sum, normal_cdf, order_statistic, CompensatedSum, BISECT_TOL,
};

/// `n` draws of dimension `d`, stored row-major, together with the stream
/// that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    data: Vec<f64>,
    /// Mixture component each draw came from, when drawn from a mixture.
    labels: Option<Vec<usize>>,
    stream: Option<RngStream>,
}

impl SampleBatch {
    /// Wrap explicit rows (hand-built batches in tests and tools).
    pub fn from_rows(rows: &[Vec<f64>]) -> crate::Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(crate::Error::InvalidParameter("empty sample batch".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            crate::error::check_dim(dim, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self {
            dim,
            data,
            labels: None,
            stream: None,
        })
    }

    pub(crate) fn from_parts(
        dim: usize,
        data: Vec<f64>,
        labels: Option<Vec<usize>>,
        stream: RngStream,
    ) -> Self {
        debug_assert_eq!(data.len() % dim, 0);
        Self {
            dim,
            data,
            labels,
            stream: Some(stream),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// All draws, row-major.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn stream(&self) -> Option<&RngStream> {
        self.stream.as_ref()
    }
}

/// Draws consumed per sample of dimension `d`: one component selector
/// followed by `d` normals. Plain and mixture sampling share the layout so
/// a single-component zero-shift mixture reproduces plain sampling exactly.
pub(crate) fn sample_stride(d: usize) -> usize {
    d + 1
}

/// Read one sample's standard normals (skipping the selector slot).
pub(crate) fn read_std_normals(cursor: &mut StreamCursor, out: &mut [f64]) -> f64 {
    let selector = cursor.uniform();
    for z in out.iter_mut() {
        *z = cursor.std_normal();
    }
    selector
}

/// `n` i.i.d. N(0, I_d) draws.
pub fn sample_std_normal(d: usize, n: usize, stream: RngStream) -> SampleBatch {
    assert!(d >= 1 && n >= 1, "need d >= 1 and n >= 1");
    let rows = stream.map_samples(n, sample_stride(d), |_, cursor| {
        let mut z = vec![0.0; d];
        read_std_normals(cursor, &mut z);
        z
    });
    SampleBatch::from_parts(d, rows.concat(), None, stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_normal_mean_within_clt_bound() {
        let n = 1_000_000;
        let b = sample_std_normal(1, n, RngStream::new(11, Phase::Baseline));
        let mean = compensated_sum(b.rows().map(|r| r[0])) / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn std_normal_is_reproducible() {
        let s = RngStream::new(5, Phase::Pilot).at_iteration(2);
        assert_eq!(sample_std_normal(3, 1, s), sample_std_normal(3, 1, s));
    }

    #[test]
    fn per_coordinate_variance_near_one() {
        let n = 100_000;
        let b = sample_std_normal(2, n, RngStream::new(3, Phase::Pilot));
        for j in 0..2 {
            let mean = compensated_sum(b.rows().map(|r| r[j])) / n as f64;
            let var = compensated_sum(b.rows().map(|r| (r[j] - mean).powi(2))) / (n - 1) as f64;
            assert!((0.98..=1.02).contains(&var), "coordinate {j}: {var}");
        }
    }

    #[test]
    fn prefix_of_larger_batch_is_identical() {
        let s = RngStream::new(8, Phase::Init);
        let small = sample_std_normal(4, 10, s);
        let large = sample_std_normal(4, 5000, s);
        for k in 0..10 {
            assert_eq!(small.row(k), large.row(k));
        }
    }
}
