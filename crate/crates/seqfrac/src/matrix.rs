//! Small dense square matrices, row-major. The solvers only need products,
//! entrywise inspection and a rough spectral-radius estimate, so this stays
//! deliberately minimal.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Build from a flat row-major slice of length dim².
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                what: "matrix entries",
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Build from nested rows; every row must have length dim.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_mat(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut out = Matrix::zeros(dim);
        for i in 0..dim {
            for k in 0..dim {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    out.data[i * dim + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    /// this + scale · other.
    pub fn add_scaled(&self, other: &Matrix, scale: f64) -> Matrix {
        debug_assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + scale * b)
            .collect();
        Matrix {
            dim: self.dim,
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Deterministic power-iteration estimate of the spectral radius.
    ///
    /// Good enough for a divergence heuristic; it is not a rigorous bound.
    pub fn spectral_radius_estimate(&self) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        let mut v = vec![1.0; self.dim];
        // deterministic perturbation so the start vector is not orthogonal to
        // the dominant eigenvector of common structured matrices
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += 1e-3 * (i as f64 + 1.0);
        }
        let mut rho = 0.0;
        for _ in 0..60 {
            let w = self.mul_vec(&v);
            let norm = w.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if !norm.is_finite() || norm == 0.0 {
                return if norm == 0.0 { 0.0 } else { f64::INFINITY };
            }
            rho = norm;
            v = w.into_iter().map(|x| x / norm).collect();
        }
        rho
    }
}
