//! Budget constraints and the mapping between the budget β and ϖ.
//!
//! Along the tilted family `β(ϖ) = Σ pᵢ U*ᵢ(ϖ)` and
//! `dβ/dϖ = −Var_{U*}(P) < 0` whenever `P` has two distinct positive
//! probabilities, so the map is a strictly decreasing bijection from ℝ onto
//! the open interval `(p_min, p_max)`. [`solve_omega`] inverts it by bracketed
//! bisection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::tilt::{
    limit_distribution, tilt, ImportanceCoefficient, Limit, MimTotal, TiltResult, TiltWeights,
};

/// Distance from p_min / p_max below which a budget counts as the endpoint.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Required accuracy of the inverted budget.
pub const BETA_TOL: f64 = 1e-12;

const MAX_ITERATIONS: usize = 200;
const MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintMode {
    /// Σ P(a)U(a) = β; traces the whole tilted family including ϖ < 0.
    Equality,
    /// Σ P(a)U(a) ≤ β; the relative-entropy minimization proper.
    Inequality,
}

impl std::str::FromStr for ConstraintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equality" => Ok(Self::Equality),
            "inequality" => Ok(Self::Inequality),
            other => Err(Error::Parse(format!("unknown constraint mode `{other}`"))),
        }
    }
}

/// Usage budget, given either as β or as its slack α = 1 − β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintSpec {
    beta: f64,
    mode: ConstraintMode,
}

impl ConstraintSpec {
    pub fn budget(beta: f64, mode: ConstraintMode) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::NonFinite {
                index: 0,
                value: beta,
            });
        }
        Ok(Self { beta, mode })
    }

    pub fn slack(alpha: f64, mode: ConstraintMode) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite {
                index: 0,
                value: alpha,
            });
        }
        Ok(Self {
            beta: 1.0 - alpha,
            mode,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }
}

/// Budgets reachable by some utility distribution of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibleRange {
    /// p_min, reached only in the limit ϖ → +∞.
    pub beta_min: f64,
    /// p_max, reached only in the limit ϖ → −∞.
    pub beta_max: f64,
    /// Σ pᵢ², reached at ϖ = 0.
    pub beta_neutral: f64,
}

impl FeasibleRange {
    /// True when `beta` is reachable at a finite ϖ.
    pub fn contains_open(&self, beta: f64) -> bool {
        beta > self.beta_min + ENDPOINT_TOL && beta < self.beta_max - ENDPOINT_TOL
    }
}

pub fn feasible_range(p: &Pmf) -> Result<FeasibleRange> {
    let (beta_min, beta_max) = (p.p_min(), p.p_max());
    if beta_min >= beta_max {
        return Err(Error::DegeneratePmf("all positive atoms share one probability"));
    }
    Ok(FeasibleRange {
        beta_min,
        beta_max,
        beta_neutral: p.collision(),
    })
}

fn ensure_nondegenerate(p: &Pmf) -> Result<()> {
    if p.distinct_positive() < 2 {
        Err(Error::DegeneratePmf(
            "fewer than two distinct positive probabilities",
        ))
    } else {
        Ok(())
    }
}

/// β(ϖ) = Σ pᵢ U*ᵢ(ϖ).
pub fn beta_of_omega(p: &Pmf, omega: ImportanceCoefficient) -> Result<f64> {
    ensure_nondegenerate(p)?;
    Ok(TiltWeights::new(p, omega.value())?.beta(p))
}

/// The unique ϖ with β(ϖ) = `beta`, for `beta` strictly inside (p_min, p_max).
pub fn solve_omega(p: &Pmf, beta: f64) -> Result<ImportanceCoefficient> {
    let range = feasible_range(p)?;
    if !range.contains_open(beta) {
        return Err(Error::BetaOutOfRange {
            beta,
            beta_min: range.beta_min,
            beta_max: range.beta_max,
        });
    }
    // Decreasing in ϖ: positive left of the root, negative right of it.
    let residual = |w: f64| -> Result<f64> { Ok(TiltWeights::new(p, w)?.beta(p) - beta) };

    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let mut f_lo = residual(lo)?;
    let mut f_hi = residual(hi)?;
    let mut doublings = 0;
    while f_lo < 0.0 {
        hi = lo;
        f_hi = f_lo;
        lo *= 2.0;
        f_lo = residual(lo)?;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::NoConvergence {
                iterations: doublings,
                residual: f_lo,
            });
        }
    }
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = residual(hi)?;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::NoConvergence {
                iterations: doublings,
                residual: f_hi,
            });
        }
    }

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        if f_lo == 0.0 || f_hi == 0.0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = residual(mid)?;
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        iterations += 1;
    }

    let (omega, res) = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    if res.abs() > BETA_TOL {
        return Err(Error::NoConvergence {
            iterations,
            residual: res,
        });
    }
    ImportanceCoefficient::new(omega)
}

/// Minimizes D(U‖P) subject to Σ P(a)U(a) ≤ `beta`.
///
/// When Σ pᵢ² ≤ β (within [`ENDPOINT_TOL`]) the constraint is inactive and the answer is `P` itself at
/// ϖ = 0. Otherwise the constraint binds and the answer is the tilt hitting
/// β exactly, with ϖ > 0. A budget within [`ENDPOINT_TOL`] of p_min returns
/// the limit distribution with `omega = +∞`.
pub fn solve_budget_problem(p: &Pmf, beta: f64) -> Result<TiltResult> {
    let beta_min = p.p_min();
    if beta < beta_min {
        return Err(Error::InfeasibleBudget { beta, beta_min });
    }
    if beta >= p.collision() - ENDPOINT_TOL {
        let total = TiltWeights::new(p, 0.0)?.total();
        return TiltResult::assemble(p, p.clone(), 0.0, total);
    }
    if beta <= beta_min + ENDPOINT_TOL {
        let u = limit_distribution(p, Limit::PosInfinity);
        let total = MimTotal {
            ln_value: f64::INFINITY,
            value: None,
        };
        return TiltResult::assemble(p, u, f64::INFINITY, total);
    }
    tilt(p, solve_omega(p, beta)?)
}

/// Dispatches on the constraint mode.
pub fn solve(p: &Pmf, spec: &ConstraintSpec) -> Result<TiltResult> {
    match spec.mode() {
        ConstraintMode::Equality => tilt(p, solve_omega(p, spec.beta())?),
        ConstraintMode::Inequality => solve_budget_problem(p, spec.beta()),
    }
}
