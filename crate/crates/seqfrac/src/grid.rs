//! Uniform grids with step h, fractional order pairs and sampled sequences.

use crate::error::{Error, Result};

/// A finite uniform grid t_i = a + i·h, i = 0..=n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGrid {
    h: f64,
    a: f64,
    n: usize,
}

impl StepGrid {
    pub fn new(h: f64, a: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!("step must be positive and finite, got {h}"),
            });
        }
        if !a.is_finite() {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("offset must be finite, got {a}"),
            });
        }
        Ok(Self { h, a, n })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn offset(&self) -> f64 {
        self.a
    }

    /// Index of the last grid point.
    pub fn horizon(&self) -> usize {
        self.n
    }

    /// Number of grid points, horizon + 1.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The i-th grid point a + i·h.
    pub fn t(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }
}

/// The pair of fractional orders (alpha, beta), both in (0, 1], together with
/// the derived grid offsets a = (alpha − 1)·h and b = (beta − 1)·h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrderPair {
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
}

impl FracOrderPair {
    pub fn new(alpha: f64, beta: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!("step must be positive and finite, got {h}"),
            });
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("order must lie in (0, 1], got {alpha}"),
            });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("order must lie in (0, 1], got {beta}"),
            });
        }
        Ok(Self {
            alpha,
            beta,
            a: (alpha - 1.0) * h,
            b: (beta - 1.0) * h,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Offset of the x grid, (alpha − 1)·h ≤ 0.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Offset of the auxiliary y grid, (beta − 1)·h ≤ 0.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// alpha + beta.
    pub fn sum(&self) -> f64 {
        self.alpha + self.beta
    }
}

/// A real-valued function sampled on a [`StepGrid`]; values[i] = x(a + i·h).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSequence {
    grid: StepGrid,
    values: Vec<f64>,
}

impl SampledSequence {
    pub fn new(grid: StepGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                what: "sequence values",
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// The constant sequence x ≡ c.
    pub fn constant(grid: StepGrid, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    /// Sample `f` at every grid point.
    pub fn from_fn(grid: StepGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.t(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &StepGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_step() {
        assert!(StepGrid::new(0.0, 0.0, 4).is_err());
        assert!(StepGrid::new(-1.0, 0.0, 4).is_err());
        assert!(StepGrid::new(f64::NAN, 0.0, 4).is_err());
    }

    #[test]
    fn order_pair_bounds() {
        assert!(FracOrderPair::new(0.0, 0.5, 1.0).is_err());
        assert!(FracOrderPair::new(0.5, 1.5, 1.0).is_err());
        let p = FracOrderPair::new(1.0, 0.25, 0.5).unwrap();
        assert_eq!(p.a(), 0.0);
        assert_eq!(p.b(), (0.25 - 1.0) * 0.5);
        assert!(p.a() <= 0.0 && p.b() <= 0.0);
    }

    #[test]
    fn sequence_length_checked() {
        let grid = StepGrid::new(1.0, 0.0, 3).unwrap();
        assert!(SampledSequence::new(grid, vec![1.0; 3]).is_err());
        assert!(SampledSequence::new(grid, vec![1.0; 4]).is_ok());
    }
}
