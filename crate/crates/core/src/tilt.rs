//! Exponential tilting of a source distribution by the importance coefficient.
//!
//! For a source `P = (p_1, .., p_k)` and coefficient `ϖ` the utility
//! distribution is
//!
//! ```text
//! U*(j) = p_j e^{ϖ(1 - p_j)} / Z,    Z = Σ_i p_i e^{ϖ(1 - p_i)}
//! ```
//!
//! where `Z` is the message importance total. Positive `ϖ` shifts mass toward
//! rare symbols, negative `ϖ` toward frequent ones, and `ϖ = 0` returns `P`.
//!
//! Exponents are shifted by their maximum before exponentiation, so any finite
//! `ϖ` is safe; only the unshifted total `Z` can overflow, in which case it is
//! reported through its logarithm.

use std::fmt;

use serde::Serialize;

use crate::divergence::kl;
use crate::error::{Error, Result};
use crate::pmf::Pmf;

/// The importance coefficient ϖ. The Lagrange multiplier of the budget
/// constraint is its negation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ImportanceCoefficient(f64);

impl ImportanceCoefficient {
    pub const ZERO: Self = Self(0.0);

    pub fn new(omega: f64) -> Result<Self> {
        if omega.is_finite() {
            Ok(Self(omega))
        } else {
            Err(Error::NonFiniteOmega(omega))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Multiplier λ = −ϖ of the budget constraint.
    pub fn lambda(self) -> f64 {
        -self.0
    }
}

impl TryFrom<f64> for ImportanceCoefficient {
    type Error = Error;

    fn try_from(omega: f64) -> Result<Self> {
        Self::new(omega)
    }
}

impl fmt::Display for ImportanceCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Message importance total Z = Σ pᵢ e^{ϖ(1−pᵢ)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MimTotal {
    /// `ln Z`, always available.
    pub ln_value: f64,
    /// `Z` itself, or `None` when it does not fit in an `f64`.
    pub value: Option<f64>,
}

impl MimTotal {
    pub fn overflowed(&self) -> bool {
        self.value.is_none()
    }
}

/// Shifted tilting weights shared by [`tilt`], [`mim_total`] and the solver.
pub(crate) struct TiltWeights {
    /// max over positive atoms of ϖ(1−pᵢ).
    shift: f64,
    /// pᵢ e^{ϖ(1−pᵢ) − shift}
    scaled: Vec<f64>,
    sum: f64,
}

impl TiltWeights {
    pub(crate) fn new(p: &Pmf, omega: f64) -> Result<Self> {
        let shift = p
            .probs()
            .iter()
            .filter(|&&pi| pi > 0.0)
            .map(|&pi| omega * (1.0 - pi))
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Err(Error::DegeneratePmf("no positive atoms"));
        }
        let scaled: Vec<f64> = p
            .probs()
            .iter()
            .map(|&pi| {
                if pi > 0.0 {
                    pi * (omega * (1.0 - pi) - shift).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let sum = scaled.iter().sum();
        Ok(Self { shift, scaled, sum })
    }

    pub(crate) fn total(&self) -> MimTotal {
        let ln_value = self.shift + self.sum.ln();
        let value = self.shift.exp() * self.sum;
        MimTotal {
            ln_value,
            value: value.is_finite().then_some(value),
        }
    }

    pub(crate) fn utility(&self) -> Vec<f64> {
        self.scaled.iter().map(|w| w / self.sum).collect()
    }

    /// Σ pᵢ U*ᵢ, computed without materializing U*.
    pub(crate) fn beta(&self, p: &Pmf) -> f64 {
        p.probs()
            .iter()
            .zip(&self.scaled)
            .map(|(pi, w)| pi * w)
            .sum::<f64>()
            / self.sum
    }
}

/// Utility distribution together with the quantities that characterize it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltResult {
    pub utility: Pmf,
    /// ϖ; `+∞` only for the boundary solution at β = p_min.
    pub omega: f64,
    /// Σ P(a)·U*(a)
    pub beta: f64,
    /// 1 − beta
    pub alpha: f64,
    pub mim_total: MimTotal,
    /// D(U*‖P) in nats.
    pub kl_to_source: f64,
}

impl TiltResult {
    /// Assembles a result for an arbitrary utility distribution `u` of `p`.
    pub(crate) fn assemble(p: &Pmf, u: Pmf, omega: f64, mim_total: MimTotal) -> Result<Self> {
        let beta = p.expect(u.probs());
        let kl_to_source = kl(&u, p)?;
        Ok(Self {
            utility: u,
            omega,
            beta,
            alpha: 1.0 - beta,
            mim_total,
            kl_to_source,
        })
    }
}

/// Tilts `p` by `omega`.
pub fn tilt(p: &Pmf, omega: ImportanceCoefficient) -> Result<TiltResult> {
    let weights = TiltWeights::new(p, omega.value())?;
    let utility = Pmf::from_normalized(p.labels().to_vec(), weights.utility());
    TiltResult::assemble(p, utility, omega.value(), weights.total())
}

/// Message importance total of `p` at `omega`; the denominator of [`tilt`].
pub fn mim_total(p: &Pmf, omega: ImportanceCoefficient) -> Result<MimTotal> {
    Ok(TiltWeights::new(p, omega.value())?.total())
}

/// Collision probability and second-order Rényi entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionEntropy {
    /// Σ pᵢ², the budget reached at ϖ = 0.
    pub beta0: f64,
    /// H₂ = −ln beta0, in nats.
    pub h2: f64,
}

pub fn renyi2_identity(p: &Pmf) -> CollisionEntropy {
    let beta0 = p.collision();
    debug_assert!(
        TiltWeights::new(p, 0.0).map_or(true, |w| (w.beta(p) - beta0).abs() <= 1e-12),
        "untilted budget must equal the collision probability"
    );
    CollisionEntropy {
        beta0,
        h2: -beta0.ln(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    /// ϖ → +∞: all mass on the least likely atoms.
    PosInfinity,
    /// ϖ → −∞: all mass on the most likely atoms.
    NegInfinity,
}

/// Limit of the tilted family, uniform over the atoms tied at the extremum.
pub fn limit_distribution(p: &Pmf, side: Limit) -> Pmf {
    let target = match side {
        Limit::PosInfinity => p.p_min(),
        Limit::NegInfinity => p.p_max(),
    };
    let hits = p.probs().iter().filter(|&&pi| pi == target).count() as f64;
    let probs = p
        .probs()
        .iter()
        .map(|&pi| if pi == target { 1.0 / hits } else { 0.0 })
        .collect();
    Pmf::from_normalized(p.labels().to_vec(), probs)
}
