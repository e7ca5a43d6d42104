//! Self-checks run by `mimtilt verify`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mimtilt::oracle::{
    enumerate_types, enumerate_types_complement, grid_minimize_kl, refine_minimize_kl, ENUM_ALPHABET_CAP,
    ENUM_LENGTH_CAP, GRID_ALPHABET_CAP,
};
use mimtilt::{
    kl, sanov_bound, solve_budget_problem, tilt, ConstraintMode, ConstraintSpec, Error,
    ImportanceCoefficient, Pmf,
};

use crate::CliError;

pub const REFINED_LINF_TOL: f64 = 1e-4;
pub const REFINED_KL_TOL: f64 = 1e-8;
pub const KL_PAIRS: usize = 1000;
const RNG_SEED: u64 = 0x6d69_6d74;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn verify(p: &Pmf, beta: f64, grid_step: f64, n: usize) -> Result<Report, CliError> {
    let k = p.len();
    if k > GRID_ALPHABET_CAP {
        return Err(Error::AlphabetTooLarge {
            size: k,
            cap: GRID_ALPHABET_CAP,
        }
        .into());
    }
    let run_types = k <= ENUM_ALPHABET_CAP;
    if run_types && n > ENUM_LENGTH_CAP {
        return Err(Error::TooLarge {
            alphabet: k,
            alphabet_cap: ENUM_ALPHABET_CAP,
            n,
            n_cap: ENUM_LENGTH_CAP,
        }
        .into());
    }

    let spec = ConstraintSpec::budget(beta, ConstraintMode::Inequality)?;
    let closed = solve_budget_problem(p, beta)?;
    let mut report = Report::default();

    let grid = grid_minimize_kl(p, &spec, grid_step)?;
    let gap = grid.argmin.linf_distance(&closed.utility);
    report.checks.push(Check::new(
        "grid-vs-closed-form",
        gap <= 2.0 * grid.grid_step && grid.kl_value >= closed.kl_to_source - 1e-12,
        format!(
            "L∞ gap {gap:.3e} (limit {:.3e}), grid KL {:.12e} vs closed {:.12e}, {} feasible points",
            2.0 * grid.grid_step,
            grid.kl_value,
            closed.kl_to_source,
            grid.feasible_points_checked
        ),
    ));

    let refined = refine_minimize_kl(p, &spec, &grid.argmin)?;
    let gap = refined.argmin.linf_distance(&closed.utility);
    let kl_gap = (refined.kl_value - closed.kl_to_source).abs();
    report.checks.push(Check::new(
        "refined-vs-closed-form",
        gap <= REFINED_LINF_TOL && kl_gap <= REFINED_KL_TOL,
        format!(
            "L∞ gap {gap:.3e} (limit {REFINED_LINF_TOL:.0e}), KL gap {kl_gap:.3e} (limit {REFINED_KL_TOL:.0e}), {} iterations",
            refined.iterations
        ),
    ));

    if run_types {
        let exact = enumerate_types(p, beta, n)?;
        let rest = enumerate_types_complement(p, beta, n)?;
        let bound = sanov_bound(p, beta, n)?;
        report.checks.push(Check::new(
            "types-below-sanov-bound",
            exact.exact_probability <= bound.bound,
            format!(
                "n={n}: exact {:.6e} over {} types, bound {:.6e}",
                exact.exact_probability, exact.num_types_in_e, bound.bound
            ),
        ));
        let total = exact.exact_probability + rest.exact_probability;
        report.checks.push(Check::new(
            "types-complement-sums-to-one",
            (total - 1.0).abs() <= 1e-12,
            format!("total {total:.17}"),
        ));
    } else {
        report.checks.push(Check::new(
            "types-below-sanov-bound",
            true,
            format!("skipped: alphabet {k} above enumeration cap {ENUM_ALPHABET_CAP}"),
        ));
    }

    report.checks.extend(property_checks(p)?);
    Ok(report)
}

/// Invariants that hold for every distribution, checked on `p`.
pub fn property_checks(p: &Pmf) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let omegas: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.5).collect();

    let mut worst = 0.0f64;
    for &w in &omegas {
        let r = tilt(p, ImportanceCoefficient::new(w)?)?;
        worst = worst.max((r.utility.probs().iter().sum::<f64>() - 1.0).abs());
    }
    checks.push(Check::new(
        "tilt-normalization",
        worst <= 1e-12,
        format!("max |Σu − 1| = {worst:.3e} over {} coefficients", omegas.len()),
    ));

    let mut violations = 0;
    for &w in omegas.iter().filter(|&&w| w > 0.0) {
        let u = tilt(p, ImportanceCoefficient::new(w)?)?.utility;
        let mut pairs: Vec<(f64, f64)> = p
            .probs()
            .iter()
            .zip(u.probs())
            .filter(|(pa, _)| **pa > 0.0)
            .map(|(pa, ua)| (*pa, ua / pa))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        violations += pairs
            .windows(2)
            .filter(|win| win[1].0 > win[0].0 && win[1].1 >= win[0].1)
            .count();
    }
    checks.push(Check::new(
        "ratio-monotonicity",
        violations == 0,
        format!("{violations} violations of U/P strictly decreasing in P for ϖ > 0"),
    ));

    let mut rng = StdRng::seed_from_u64(RNG_SEED);
    let labels = p.labels().to_vec();
    let mut min_kl = f64::INFINITY;
    for _ in 0..KL_PAIRS {
        let draw = |rng: &mut StdRng| -> Result<Pmf, Error> {
            let w: Vec<f64> = (0..labels.len()).map(|_| rng.random::<f64>() + 1e-12).collect();
            Pmf::from_probs_renormalized(labels.clone(), w)
        };
        let (a, b) = (draw(&mut rng)?, draw(&mut rng)?);
        min_kl = min_kl.min(kl(&a, &b)?);
    }
    checks.push(Check::new(
        "kl-nonnegative",
        min_kl >= 0.0 && kl(p, p)? == 0.0,
        format!("min KL {min_kl:.3e} over {KL_PAIRS} random pairs; KL(P‖P) = 0"),
    ));
    Ok(checks)
}
