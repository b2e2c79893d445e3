//! Difference and summation operators on sampled sequences: the forward
//! h-difference, the order-1 h-sum, the fractional h-sum and the Caputo
//! h-difference.

use crate::error::{Error, Result};
use crate::grid::{SampledSequence, StepGrid};
use crate::kernels::weight_row;

/// Forward h-difference (x(t + h) − x(t)) / h; one sample shorter than the
/// input, same grid offset.
pub fn forward_diff(x: &SampledSequence) -> Result<SampledSequence> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            have: x.len(),
        });
    }
    let g = x.grid();
    let h = g.h();
    let values: Vec<f64> = x.values().windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let grid = StepGrid::new(h, g.offset(), g.horizon() - 1)?;
    SampledSequence::new(grid, values)
}

/// Order-1 h-sum h·Σ_{k=0}^{n−1} x(a + k·h), evaluated at t = a + n·h.
///
/// The value at n = 0 is 0 by convention.
pub fn h_sum(x: &SampledSequence, n: usize) -> Result<f64> {
    if n > x.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            limit: x.len(),
        });
    }
    let mut acc = 0.0;
    for &v in &x.values()[..n] {
        acc += v;
    }
    Ok(x.grid().h() * acc)
}

/// Fractional h-sum of positive order, evaluated at t = a + (order + n)·h:
///
/// h^order · Σ_{k=0}^{n} binom(n−k+order−1, n−k) · x(a + k·h)
///
/// Order 0 is not accepted here; it is the identity by convention and callers
/// use the sequence value directly.
pub fn frac_sum(x: &SampledSequence, order: f64, n: usize) -> Result<f64> {
    if !(order > 0.0) || !order.is_finite() {
        return Err(Error::Domain(format!(
            "fractional sum requires a positive order, got {order}"
        )));
    }
    if n > x.grid().horizon() {
        return Err(Error::IndexOutOfRange {
            index: n,
            limit: x.grid().horizon(),
        });
    }
    let h = x.grid().h();
    let w = weight_row(order, h.powf(order), n + 1);
    let mut acc = 0.0;
    for (k, &v) in x.values()[..=n].iter().enumerate() {
        acc += w[n - k] * v;
    }
    Ok(acc)
}

/// Caputo h-difference of order in (0, 1]: the fractional h-sum of order
/// (1 − order) applied to the forward difference, evaluated at
/// t = a + (1 − order)·h + n·h.
///
/// For order = 1 the zero-order sum is the identity and the operator reduces
/// to the forward difference at index n.
pub fn caputo_diff(x: &SampledSequence, order: f64, n: usize) -> Result<f64> {
    if !(order > 0.0 && order <= 1.0) {
        return Err(Error::Domain(format!(
            "Caputo difference requires an order in (0, 1], got {order}"
        )));
    }
    if x.len() < n + 2 {
        return Err(Error::TooShort {
            needed: n + 2,
            have: x.len(),
        });
    }
    let diff = forward_diff(x)?;
    if order == 1.0 {
        return Ok(diff.values()[n]);
    }
    frac_sum(&diff, 1.0 - order, n)
}
