//! Relative entropy and the method-of-types upper bound.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::solver::solve_budget_problem;

/// D(U‖P) = Σ U(a) ln(U(a)/P(a)) in nats, with 0·ln 0 = 0.
///
/// Mass of `u` where `p` vanishes is an error rather than `+∞`.
pub fn kl(u: &Pmf, p: &Pmf) -> Result<f64> {
    u.ensure_same_labels(p)?;
    let mut total = 0.0;
    for ((label, ua), pa) in u.iter().zip(p.probs().iter().copied()) {
        if ua == 0.0 {
            continue;
        }
        if pa == 0.0 {
            return Err(Error::SupportViolation(label.to_string()));
        }
        total += ua * (ua / pa).ln();
    }
    // rounding can leave tiny negatives next to U = P
    Ok(total.max(0.0))
}

/// Upper bound `(n+1)^|𝒳| · 2^{−n·D(U*‖P)}` on the probability that the type
/// of an i.i.d. length-`n` sequence lands in {T : Σ P(a)T(a) ≤ β}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SanovBound {
    pub n: usize,
    pub alphabet_size: usize,
    /// n·D(U*‖P), in bits.
    pub exponent: f64,
    /// Natural log of `bound`.
    pub ln_bound: f64,
    /// May exceed 1; `+∞` only if it overflows.
    pub bound: f64,
}

pub fn sanov_bound(p: &Pmf, beta: f64, n: usize) -> Result<SanovBound> {
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    let optimum = solve_budget_problem(p, beta)?;
    let exponent = n as f64 * optimum.kl_to_source / LN_2;
    let alphabet_size = p.len();
    let ln_bound = alphabet_size as f64 * ((n + 1) as f64).ln() - exponent * LN_2;
    Ok(SanovBound {
        n,
        alphabet_size,
        exponent,
        ln_bound,
        bound: ln_bound.exp(),
    })
}
