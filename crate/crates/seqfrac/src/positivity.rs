//! Positivity analysis: the entrywise one-step criterion on I + A·h^(alpha+beta),
//! trajectory scans, and randomized falsification with nonnegative initial
//! data.
//!
//! The randomized check is falsification, not proof: global positivity
//! quantifies over all nonnegative initial conditions and cannot be decided by
//! sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::FracOrderPair;
use crate::matrix::Matrix;
use crate::solver::{solve_recursive, Rhs, SystemSpec, Trajectory};

/// Outcome of a positivity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositivityVerdict {
    /// Every state coordinate stayed ≥ −tolerance on the scanned horizon.
    PositiveOnHorizon,
    /// First coordinate found below −tolerance.
    ViolatedAt { step: usize, coord: usize, value: f64 },
    /// Every entry of I + A·h^(alpha+beta) passed the entrywise test.
    LocalCriterionHolds,
    /// First entry of I + A·h^(alpha+beta) that failed the entrywise test.
    LocalCriterionFails { row: usize, col: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub verdict: PositivityVerdict,
    pub horizon: usize,
    pub tolerance: f64,
}

impl PositivityReport {
    pub fn is_violation(&self) -> bool {
        matches!(
            self.verdict,
            PositivityVerdict::ViolatedAt { .. } | PositivityVerdict::LocalCriterionFails { .. }
        )
    }
}

impl std::fmt::Display for PositivityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PositivityVerdict::PositiveOnHorizon => write!(f, "positive-on-horizon"),
            PositivityVerdict::ViolatedAt { step, coord, value } => {
                write!(f, "violated at step {step}, coordinate {coord}, value {value:e}")
            }
            PositivityVerdict::LocalCriterionHolds => write!(f, "local criterion holds"),
            PositivityVerdict::LocalCriterionFails { row, col, value } => {
                write!(f, "local criterion fails at entry ({row}, {col}), value {value:e}")
            }
        }
    }
}

fn entrywise_criterion(a: &Matrix, orders: &FracOrderPair, h: f64, strict: bool) -> PositivityReport {
    let scale = h.powf(orders.sum());
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let entry = if i == j { 1.0 } else { 0.0 } + scale * a.get(i, j);
            let bad = if strict { entry <= 0.0 } else { entry < 0.0 };
            if bad {
                return PositivityReport {
                    verdict: PositivityVerdict::LocalCriterionFails {
                        row: i,
                        col: j,
                        value: entry,
                    },
                    horizon: 1,
                    tolerance: 0.0,
                };
            }
        }
    }
    PositivityReport {
        verdict: PositivityVerdict::LocalCriterionHolds,
        horizon: 1,
        tolerance: 0.0,
    }
}

/// Entrywise nonnegativity of I + A·h^(alpha+beta): holds iff the state at
/// n = 1 is nonnegative for every nonnegative (x_a, x_0) and gamma(0) ≥ 0.
pub fn local_positivity_criterion(a: &Matrix, orders: &FracOrderPair, h: f64) -> PositivityReport {
    entrywise_criterion(a, orders, h, false)
}

/// Stricter variant requiring every entry of I + A·h^(alpha+beta) to be > 0.
pub fn local_positivity_criterion_strict(
    a: &Matrix,
    orders: &FracOrderPair,
    h: f64,
) -> PositivityReport {
    entrywise_criterion(a, orders, h, true)
}

/// Scan a trajectory in step order; report the first coordinate below
/// −tolerance. Default tolerance is 0 (exact sign test on doubles).
pub fn check_trajectory_positivity(traj: &Trajectory, tolerance: f64) -> PositivityReport {
    for (n, state) in traj.states.iter().enumerate() {
        for (coord, &value) in state.iter().enumerate() {
            if value < -tolerance {
                return PositivityReport {
                    verdict: PositivityVerdict::ViolatedAt { step: n, coord, value },
                    horizon: traj.horizon(),
                    tolerance,
                };
            }
        }
    }
    PositivityReport {
        verdict: PositivityVerdict::PositiveOnHorizon,
        horizon: traj.horizon(),
        tolerance,
    }
}

/// Detailed outcome of [`nonneg_rhs_positivity_check`].
#[derive(Debug, Clone)]
pub struct NonnegRhsCheck {
    pub report: PositivityReport,
    /// True when a violation occurred while every right-hand-side value
    /// feeding the violating state was still ≥ 0 — i.e. the nonnegativity
    /// hypothesis held, so the violation is a genuine counterexample to the
    /// invariance of the nonnegative orthant (and would indicate a kernel
    /// bug for orders in (0, 1]).
    pub genuine: bool,
    /// First step (per the reported sample) at which an f value went
    /// negative, excluding later states from the assertion.
    pub hypothesis_failed_at: Option<usize>,
}

/// Randomized invariance check of the nonnegative orthant.
///
/// Sample 0 reuses the spec's own (x_a, x_0); `samples` further draws come
/// from U[0,1]^dim with the given seed. Each trajectory is solved by the
/// exact recursion and scanned in step order. States are asserted nonnegative
/// only while every f value they depend on was ≥ 0; a violation inside that
/// prefix is genuine. The first genuine violation is preferred in the report,
/// otherwise the first violation of any kind, otherwise positive-on-horizon.
pub fn nonneg_rhs_positivity_check_detailed(
    spec: &SystemSpec,
    samples: usize,
    horizon: usize,
    seed: u64,
) -> Result<NonnegRhsCheck> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first_violation: Option<NonnegRhsCheck> = None;

    for sample in 0..=samples {
        let (x_a, x_0) = if sample == 0 {
            (spec.x_a.clone(), spec.x_0.clone())
        } else {
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..spec.dim).map(|_| rng.random_range(0.0..1.0)).collect()
            };
            (draw(&mut rng), draw(&mut rng))
        };
        let mut sub = spec.clone();
        sub.x_a = x_a;
        sub.x_0 = x_0;
        sub.horizon = horizon;
        if let Rhs::Semilinear { gamma, .. } = &sub.rhs {
            if gamma.len() < horizon + 1 {
                let mut extended = gamma.clone();
                extended.resize(horizon + 1, vec![0.0; sub.dim]);
                if let Rhs::Semilinear { gamma, .. } = &mut sub.rhs {
                    *gamma = extended;
                }
            }
        }
        let traj = solve_recursive(&sub)?;

        // f values along the trajectory; state n depends on f(0..n-1)
        let mut hypothesis_failed_at: Option<usize> = None;
        for n in 0..=horizon {
            if n >= 1 {
                let r = n - 1;
                let f_r = match &sub.rhs {
                    Rhs::Linear { a } => a.mul_vec(&traj.states[r]),
                    Rhs::Semilinear { a, gamma } => {
                        let mut v = a.mul_vec(&traj.states[r]);
                        for (vi, gi) in v.iter_mut().zip(&gamma[r]) {
                            *vi += gi;
                        }
                        v
                    }
                    Rhs::General(f) => f(r as f64 * sub.h, &traj.states[r]),
                };
                if hypothesis_failed_at.is_none() && f_r.iter().any(|&v| v < 0.0) {
                    hypothesis_failed_at = Some(r);
                }
            }
            if let Some((coord, &value)) = traj.states[n]
                .iter()
                .enumerate()
                .find(|(_, &v)| v < 0.0)
            {
                let genuine = hypothesis_failed_at.map_or(true, |rf| n <= rf);
                let found = NonnegRhsCheck {
                    report: PositivityReport {
                        verdict: PositivityVerdict::ViolatedAt { step: n, coord, value },
                        horizon,
                        tolerance: 0.0,
                    },
                    genuine,
                    hypothesis_failed_at,
                };
                if genuine {
                    return Ok(found);
                }
                first_violation.get_or_insert(found);
                break;
            }
        }
    }

    Ok(first_violation.unwrap_or(NonnegRhsCheck {
        report: PositivityReport {
            verdict: PositivityVerdict::PositiveOnHorizon,
            horizon,
            tolerance: 0.0,
        },
        genuine: false,
        hypothesis_failed_at: None,
    }))
}

/// As [`nonneg_rhs_positivity_check_detailed`], reporting only the verdict.
pub fn nonneg_rhs_positivity_check(
    spec: &SystemSpec,
    samples: usize,
    horizon: usize,
    seed: u64,
) -> Result<PositivityReport> {
    Ok(nonneg_rhs_positivity_check_detailed(spec, samples, horizon, seed)?.report)
}
