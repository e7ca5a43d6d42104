//! Importance-tilted utility distributions.
//!
//! Given a source distribution `P` and a budget `β` on the P-weighted average
//! usage Σ P(a)U(a), the usage distribution closest to `P` in relative entropy
//! is an exponential tilt of `P` by the importance coefficient `ϖ`. This crate
//! computes the tilt and its message importance total ([`tilt`]), maps budgets
//! to coefficients and back ([`solver`]), bounds the probability of the budget
//! event ([`divergence`]) and checks all of it against brute force
//! ([`oracle`]).
//!
//! ```
//! use mimtilt::{tilt, ImportanceCoefficient, Pmf};
//!
//! let p = Pmf::unlabeled(&[0.1, 0.2, 0.3, 0.4]).unwrap();
//! let r = tilt(&p, ImportanceCoefficient::ZERO).unwrap();
//! assert!((r.beta - 0.3).abs() < 1e-12);
//! ```

pub mod divergence;
pub mod error;
pub mod io;
pub mod oracle;
pub mod pmf;
pub mod solver;
pub mod tilt;

pub use divergence::{kl, sanov_bound, SanovBound};
pub use error::{Error, Result};
pub use pmf::{
    beta_from_raw, fairness, fairness_with_tol, FairnessReport, Pmf, RawUsage, UsageBudget, UsageClass,
};
pub use solver::{
    beta_of_omega, feasible_range, solve, solve_budget_problem, solve_omega, ConstraintMode, ConstraintSpec,
    FeasibleRange,
};
pub use tilt::{
    limit_distribution, mim_total, renyi2_identity, tilt, CollisionEntropy, ImportanceCoefficient, Limit,
    MimTotal, TiltResult,
};
