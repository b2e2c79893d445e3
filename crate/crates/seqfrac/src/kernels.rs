//! The two binomial kernel families driving the solvers, plus their
//! memoization table.
//!
//! With mu = k·alpha + s·beta:
//!
//! * the homogeneous-series kernel is binom(n−k+mu, n−k)·h^mu for n ≥ k and
//!   exactly 0 for n < k — it multiplies the initial data in the series
//!   solutions;
//! * the convolution kernel is binom(m+mu−1, m)·h^mu for m ≥ 0 and 0 for
//!   m < 0 — it weights the forced response.
//!
//! Isolated evaluations go through log-gamma; rows over the grid index use the
//! overflow-safe multiplicative recurrences
//! `homog(n+1) = homog(n)·(n−k+1+mu)/(n−k+1)` and
//! `conv(m+1) = conv(m)·(m+mu)/(m+1)`.

use crate::error::{Error, Result};
use crate::grid::FracOrderPair;
use crate::special::ln_gamma;

/// Total f64 budget for one table (1 GiB).
const TABLE_BUDGET: usize = 1 << 27;

/// Weight row w[m] = binom(m+mu−1, m)·scale via the multiplicative recurrence.
pub(crate) fn weight_row(mu: f64, scale: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    if len == 0 {
        return w;
    }
    w.push(scale);
    for m in 0..len - 1 {
        let m = m as f64;
        let next = w[w.len() - 1] * (m + mu) / (m + 1.0);
        w.push(next);
    }
    w
}

fn mu_of(k: usize, s: usize, orders: &FracOrderPair) -> f64 {
    k as f64 * orders.alpha() + s as f64 * orders.beta()
}

/// Homogeneous-series kernel value at grid index `n` (may be negative).
///
/// Total on its domain: the n < k branch returns 0 without touching the gamma
/// function, and k = s = 0 returns exactly 1 for every n ≥ 0.
pub fn homog_kernel(k: usize, s: usize, n: i64, orders: &FracOrderPair, h: f64) -> f64 {
    if n < k as i64 {
        return 0.0;
    }
    if k == 0 && s == 0 {
        return 1.0;
    }
    let mu = mu_of(k, s, orders);
    let j = (n - k as i64) as f64;
    h.powf(mu) * (ln_gamma(j + mu + 1.0) - ln_gamma(mu + 1.0) - ln_gamma(j + 1.0)).exp()
}

/// Convolution kernel value at grid index `m` (may be negative).
///
/// Requires k + s ≥ 1 so that mu > 0; mu = 0 would put Γ(mu) at a pole.
pub fn conv_kernel(k: usize, s: usize, m: i64, orders: &FracOrderPair, h: f64) -> Result<f64> {
    if k == 0 && s == 0 {
        return Err(Error::Domain(
            "conv_kernel requires k + s >= 1 (mu = 0 puts the gamma function at a pole)".into(),
        ));
    }
    if m < 0 {
        return Ok(0.0);
    }
    let mu = mu_of(k, s, orders);
    let m = m as f64;
    Ok(h.powf(mu) * (ln_gamma(m + mu) - ln_gamma(mu) - ln_gamma(m + 1.0)).exp())
}

/// Row of homogeneous-series kernel values for fixed (k, s), n = 0..=max_n.
pub(crate) fn homog_row(k: usize, s: usize, orders: &FracOrderPair, h: f64, max_n: usize) -> Vec<f64> {
    let len = max_n + 1;
    if k > max_n {
        return vec![0.0; len];
    }
    let mu = mu_of(k, s, orders);
    let mut row = vec![0.0; k];
    row.extend(weight_row(mu + 1.0, h.powf(mu), len - k));
    row
}

/// Row of convolution kernel values for fixed (k, s), m = 0..=max_m.
pub(crate) fn conv_row(k: usize, s: usize, orders: &FracOrderPair, h: f64, max_m: usize) -> Result<Vec<f64>> {
    if k == 0 && s == 0 {
        return Err(Error::Domain(
            "conv_row requires k + s >= 1 (mu = 0 puts the gamma function at a pole)".into(),
        ));
    }
    let mu = mu_of(k, s, orders);
    Ok(weight_row(mu, h.powf(mu), max_m + 1))
}

/// Memoized kernel values on the integer grid up to a horizon.
///
/// The table stores the three families the solvers consume: the diagonal
/// homogeneous kernels (k, k), the superdiagonal ones (k+1, k) and the
/// diagonal convolution kernels (k, k) for k ≥ 1. The general accessors serve
/// stored rows directly and fall back to the closed-form log-gamma evaluation
/// for any other (k, s) pair. Immutable after construction, safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct KernelTable {
    orders: FracOrderPair,
    h: f64,
    max_k: usize,
    max_n: usize,
    homog_diag: Vec<Vec<f64>>,
    homog_super: Vec<Vec<f64>>,
    conv_diag: Vec<Vec<f64>>,
}

impl KernelTable {
    pub fn build(orders: &FracOrderPair, h: f64, max_k: usize, max_n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!("step must be positive and finite, got {h}"),
            });
        }
        let requested = 3 * (max_k + 1) * (max_n + 1);
        if requested > TABLE_BUDGET {
            return Err(Error::TableBudget {
                requested,
                budget: TABLE_BUDGET,
            });
        }
        let mut homog_diag = Vec::with_capacity(max_k + 1);
        let mut homog_super = Vec::with_capacity(max_k + 1);
        let mut conv_diag = Vec::with_capacity(max_k);
        for k in 0..=max_k {
            homog_diag.push(homog_row(k, k, orders, h, max_n));
            homog_super.push(homog_row(k + 1, k, orders, h, max_n));
            if k >= 1 {
                conv_diag.push(conv_row(k, k, orders, h, max_n)?);
            }
        }
        let table = Self {
            orders: *orders,
            h,
            max_k,
            max_n,
            homog_diag,
            homog_super,
            conv_diag,
        };
        for row in table
            .homog_diag
            .iter()
            .chain(&table.homog_super)
            .chain(&table.conv_diag)
        {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Overflow("kernel table entry".into()));
            }
        }
        Ok(table)
    }

    pub fn orders(&self) -> &FracOrderPair {
        &self.orders
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Homogeneous-series kernel, served from the table when (k, s) is a
    /// stored family and n is within the horizon.
    pub fn homog(&self, k: usize, s: usize, n: i64) -> f64 {
        if n >= 0 && (n as usize) <= self.max_n {
            let n = n as usize;
            if s == k && k <= self.max_k {
                return self.homog_diag[k][n];
            }
            if k == s + 1 && s <= self.max_k {
                return self.homog_super[s][n];
            }
        }
        homog_kernel(k, s, n, &self.orders, self.h)
    }

    /// Convolution kernel, served from the table when k = s ≥ 1 and m is
    /// within the horizon.
    pub fn conv(&self, k: usize, s: usize, m: i64) -> Result<f64> {
        if m >= 0 && (m as usize) <= self.max_n && s == k && k >= 1 && k <= self.max_k {
            return Ok(self.conv_diag[k - 1][m as usize]);
        }
        conv_kernel(k, s, m, &self.orders, self.h)
    }

    /// The stored row of diagonal homogeneous kernels (k, k).
    pub fn homog_diag_row(&self, k: usize) -> &[f64] {
        &self.homog_diag[k]
    }

    /// The stored row of superdiagonal homogeneous kernels (k+1, k).
    pub fn homog_super_row(&self, k: usize) -> &[f64] {
        &self.homog_super[k]
    }

    /// The stored row of diagonal convolution kernels (k, k), k ≥ 1.
    pub fn conv_diag_row(&self, k: usize) -> &[f64] {
        &self.conv_diag[k - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gen_binomial;

    fn orders(alpha: f64, beta: f64, h: f64) -> FracOrderPair {
        FracOrderPair::new(alpha, beta, h).unwrap()
    }

    fn assert_rel(got: f64, want: f64, tol: f64) {
        let denom = want.abs().max(1.0);
        assert!(
            ((got - want) / denom).abs() <= tol,
            "got {got}, want {want}"
        );
    }

    #[test]
    fn homog_zero_zero_is_one() {
        let o = orders(0.3, 0.9, 0.25);
        for n in 0..200 {
            assert_eq!(homog_kernel(0, 0, n, &o, 0.25), 1.0);
        }
    }

    #[test]
    fn homog_zero_branch_exact() {
        let o = orders(0.5, 0.5, 1.0);
        for k in 0..=50usize {
            for n in 0..k as i64 {
                assert_eq!(homog_kernel(k, 3, n, &o, 1.0), 0.0);
            }
        }
        assert_eq!(homog_kernel(2, 1, 1, &o, 1.0), 0.0);
    }

    #[test]
    fn homog_first_superdiagonal_value() {
        // binom(1 + alpha, 1) · h^alpha = 1.5 · 0.5 with alpha = 0.5, h = 0.25
        let o = orders(0.5, 0.5, 0.25);
        assert_rel(homog_kernel(1, 0, 2, &o, 0.25), 0.75, 1e-13);
    }

    #[test]
    fn conv_kernel_values() {
        let o = orders(0.5, 0.5, 1.0);
        assert_eq!(conv_kernel(1, 1, -1, &o, 1.0).unwrap(), 0.0);
        assert_rel(conv_kernel(1, 1, 0, &o, 1.0).unwrap(), 1.0, 1e-13);
        // mu = 1: binom(mu, 1)·h^mu = 1
        assert_rel(conv_kernel(1, 1, 1, &o, 1.0).unwrap(), 1.0, 1e-13);
        let o = orders(0.4, 0.3, 0.5);
        let hm = 0.5f64.powf(0.7);
        assert_rel(conv_kernel(1, 1, 0, &o, 0.5).unwrap(), hm, 1e-13);
        assert!(conv_kernel(0, 0, 3, &o, 0.5).is_err());
    }

    #[test]
    fn table_matches_direct_log_gamma_route() {
        let o = orders(0.35, 0.85, 0.7);
        let t = KernelTable::build(&o, 0.7, 8, 300).unwrap();
        for k in 0..=8usize {
            for n in (0..=300).step_by(7) {
                let direct = homog_kernel(k, k, n, &o, 0.7);
                assert_rel(t.homog(k, k, n), direct, 1e-12);
                let direct = homog_kernel(k + 1, k, n, &o, 0.7);
                assert_rel(t.homog(k + 1, k, n), direct, 1e-12);
                if k >= 1 {
                    let direct = conv_kernel(k, k, n, &o, 0.7).unwrap();
                    assert_rel(t.conv(k, k, n).unwrap(), direct, 1e-12);
                }
            }
        }
    }

    #[test]
    fn table_examples() {
        let o = orders(0.5, 0.5, 1.0);
        let t = KernelTable::build(&o, 1.0, 3, 16).unwrap();
        for n in 0..=16 {
            assert_eq!(t.homog(0, 0, n), 1.0);
        }
        assert_eq!(t.conv(1, 1, 0).unwrap(), 1.0f64.powf(1.0));
        // binom(1 + 1, 1) · 1 = 2
        assert_rel(t.homog(1, 1, 2), 2.0, 1e-13);
        // fall-through pair not stored in any family
        assert_rel(
            t.homog(1, 2, 4),
            homog_kernel(1, 2, 4, &o, 1.0),
            1e-13,
        );
    }

    #[test]
    fn table_budget_enforced() {
        let o = orders(0.5, 0.5, 1.0);
        assert!(matches!(
            KernelTable::build(&o, 1.0, 1 << 14, 1 << 14),
            Err(Error::TableBudget { .. })
        ));
    }

    #[test]
    fn binomial_and_gamma_ratio_forms_agree() {
        // Includes n < k, where the binomial route must hit the pole
        // convention and return the same exact zero as the explicit branch.
        let o = orders(0.6, 0.85, 0.5);
        for k in 0..=10usize {
            for s in 0..=10usize {
                let mu = k as f64 * 0.6 + s as f64 * 0.85;
                for n in (0..=200i64).step_by(13) {
                    let binom_form = gen_binomial(n as f64 - k as f64 + mu, (n - k as i64) as f64)
                        .unwrap()
                        * 0.5f64.powf(mu);
                    let gamma_form = homog_kernel(k, s, n, &o, 0.5);
                    assert_rel(gamma_form, binom_form, 1e-12);
                }
            }
        }
    }

    #[test]
    fn kernel_nonnegativity_on_long_rows() {
        let o = orders(0.3, 0.95, 0.5);
        let w10 = homog_row(1, 0, &o, 0.5, 10_000);
        let c11 = conv_row(1, 1, &o, 0.5, 10_000).unwrap();
        assert!(w10.iter().all(|&v| v >= 0.0));
        assert!(c11.iter().all(|&v| v >= 0.0));
    }
}
