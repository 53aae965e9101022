use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Symmetric covariance (usually correlation) matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CovMatrix {
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
}

impl CovMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("empty covariance matrix".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            check_dim(dim, row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "non-finite covariance entry".into(),
                ));
            }
            entries.extend_from_slice(row);
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(Error::InvalidParameter(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (self.get(i, i) - 1.0).abs() <= 1e-12)
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

impl TryFrom<Vec<Vec<f64>>> for CovMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<CovMatrix> for Vec<Vec<f64>> {
    fn from(m: CovMatrix) -> Self {
        m.entries.chunks(m.dim).map(<[f64]>::to_vec).collect()
    }
}

/// Lower-triangular `C` with `C Cᵀ = Σ`.
#[derive(Clone, Debug)]
pub struct CholFactor {
    lower: DMatrix<f64>,
    /// Row-major copy for the hot matrix-vector path.
    rows: Vec<f64>,
}

/// Cholesky factorization of a positive-definite covariance matrix.
pub fn cholesky(sigma: &CovMatrix) -> Result<CholFactor> {
    let chol = nalgebra::Cholesky::new(sigma.to_matrix()).ok_or(Error::NotPositiveDefinite)?;
    let lower = chol.unpack();
    let d = lower.nrows();
    let mut rows = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            rows[i * d + j] = lower[(i, j)];
        }
    }
    Ok(CholFactor { lower, rows })
}

impl CholFactor {
    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.dim() + j]
    }

    /// `out = C x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let row = &self.rows[i * d..i * d + i + 1];
            *o = row.iter().zip(x).map(|(c, v)| c * v).sum();
        }
    }

    /// `(C x)_j` alone.
    pub fn apply_row(&self, j: usize, x: &[f64]) -> f64 {
        let d = self.dim();
        self.rows[j * d..j * d + j + 1]
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Solve `C a = eta` by forward substitution.
    pub fn solve(&self, eta: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), eta.len())?;
        let rhs = DVector::from_column_slice(eta);
        let sol = self
            .lower
            .solve_lower_triangular(&rhs)
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(sol.iter().copied().collect())
    }

    /// Max |C Cᵀ − Σ| over all entries.
    pub fn reconstruction_error(&self, sigma: &CovMatrix) -> f64 {
        let prod = &self.lower * self.lower.transpose();
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((prod[(i, j)] - sigma.get(i, j)).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_factor_is_identity() {
        let c = cholesky(&CovMatrix::identity(2)).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(1, 0), 0.0);
        assert_eq!(c.get(1, 1), 1.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let s = CovMatrix::new(vec![vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
        let c = cholesky(&s).unwrap();
        assert!((c.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((c.get(1, 0) - 0.2).abs() < 1e-15);
        assert!((c.get(1, 1) - 0.96f64.sqrt()).abs() < 1e-15);
        assert!((c.get(1, 1) - 0.97980).abs() < 1e-5);
        assert_eq!(c.get(0, 1), 0.0);
    }

    #[test]
    fn indefinite_is_rejected() {
        let s = CovMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(cholesky(&s).unwrap_err(), Error::NotPositiveDefinite);
    }

    #[test]
    fn asymmetric_and_ragged_inputs_are_rejected() {
        assert!(CovMatrix::new(vec![vec![1.0, 0.1], vec![0.2, 1.0]]).is_err());
        assert!(CovMatrix::new(vec![vec![1.0, 0.1], vec![0.1]]).is_err());
    }

    #[test]
    fn solve_inverts_apply() {
        let s = CovMatrix::new(vec![
            vec![1.0, 0.3, -0.2],
            vec![0.3, 1.0, 0.1],
            vec![-0.2, 0.1, 1.0],
        ])
        .unwrap();
        let c = cholesky(&s).unwrap();
        let eta = [0.5, -1.0, 2.0];
        let a = c.solve(&eta).unwrap();
        let mut back = [0.0; 3];
        c.apply(&a, &mut back);
        for (x, y) in back.iter().zip(eta) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((c.apply_row(2, &a) - 2.0).abs() < 1e-12);
    }

    fn spd(d: usize, raw: &[f64]) -> CovMatrix {
        // A Aᵀ + d I is comfortably positive definite.
        let a = DMatrix::from_row_slice(d, d, &raw[..d * d]);
        let m = &a * a.transpose() + DMatrix::identity(d, d) * d as f64;
        let rows = (0..d)
            .map(|i| (0..d).map(|j| 0.5 * (m[(i, j)] + m[(j, i)])).collect())
            .collect();
        CovMatrix::new(rows).unwrap()
    }

    proptest! {
        #[test]
        fn factor_reconstructs_sigma(
            d in 1usize..=16,
            raw in proptest::collection::vec(-1.0f64..1.0, 256),
        ) {
            let s = spd(d, &raw);
            let c = cholesky(&s).unwrap();
            prop_assert!(c.reconstruction_error(&s) <= 1e-10);
            for i in 0..d {
                prop_assert!(c.get(i, i) > 0.0);
            }
        }
    }
}
