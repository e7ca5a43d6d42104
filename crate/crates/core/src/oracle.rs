//! Brute-force verifiers that never call into the closed form.
//!
//! * [`grid_minimize_kl`] scans every point of a simplex lattice.
//! * [`refine_minimize_kl`] polishes a feasible seed with damped Newton
//!   steps on the constraint face.
//! * [`enumerate_types`] sums multinomial probabilities over all types of a
//!   length-`n` sequence.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::divergence::kl;
use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::solver::{ConstraintMode, ConstraintSpec};

pub const GRID_ALPHABET_CAP: usize = 4;
pub const GRID_STEP_MIN: f64 = 1e-4;
pub const GRID_STEP_MAX: f64 = 1e-1;
/// Largest lattice scanned; step 1e-3 on four atoms is ~1.7e8 points.
pub const GRID_POINTS_CAP: u128 = 400_000_000;

pub const ENUM_ALPHABET_CAP: usize = 3;
pub const ENUM_LENGTH_CAP: usize = 12;

const REFINE_MAX_ITERATIONS: usize = 1_000;
/// Relative KL improvement below which refinement stops.
const REFINE_MIN_IMPROVEMENT: f64 = 1e-15;
const FEASIBILITY_TOL: f64 = 1e-12;
const LIFT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMinimizerResult {
    pub argmin: Pmf,
    pub kl_value: f64,
    /// Actual lattice spacing 1/N.
    pub grid_step: f64,
    pub feasible_points_checked: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedResult {
    pub argmin: Pmf,
    pub kl_value: f64,
    /// KL of the (repaired) seed.
    pub seed_kl: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeEnumeration {
    pub n: usize,
    pub exact_probability: f64,
    pub num_types_in_e: u64,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Best feasible lattice point seen so far; ordered by KL then lexicographically.
#[derive(Debug, Clone)]
struct Candidate {
    kl: f64,
    counts: Vec<u32>,
    feasible: u64,
}

impl Candidate {
    fn empty() -> Self {
        Self {
            kl: f64::INFINITY,
            counts: Vec::new(),
            feasible: 0,
        }
    }

    fn better_than(&self, other: &Candidate) -> bool {
        match self.kl.total_cmp(&other.kl) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                !self.counts.is_empty() && (other.counts.is_empty() || self.counts < other.counts)
            }
        }
    }

    fn merge(mut self, other: Candidate) -> Candidate {
        let feasible = self.feasible + other.feasible;
        if other.better_than(&self) {
            self = other;
        }
        self.feasible = feasible;
        self
    }
}

struct Lattice<'a> {
    n: u32,
    p: &'a [f64],
    ln_p: Vec<f64>,
    /// ln(i/N) for i = 0..=N
    ln_frac: Vec<f64>,
    inv_n: f64,
    beta: f64,
    mode: ConstraintMode,
    slack: f64,
}

impl Lattice<'_> {
    fn term(&self, atom: usize, i: u32) -> Option<f64> {
        if i == 0 {
            return Some(0.0);
        }
        if self.p[atom] == 0.0 {
            return None;
        }
        let u = i as f64 * self.inv_n;
        Some(u * (self.ln_frac[i as usize] - self.ln_p[atom]))
    }

    fn feasible(&self, g: f64) -> bool {
        let value = g * self.inv_n;
        match self.mode {
            ConstraintMode::Inequality => value <= self.beta + FEASIBILITY_TOL,
            ConstraintMode::Equality => (value - self.beta).abs() <= self.slack,
        }
    }

    /// Scans atoms `level..` with `rest` lattice units left to distribute.
    fn scan(&self, level: usize, rest: u32, counts: &mut Vec<u32>, kl: f64, g: f64, best: &mut Candidate) {
        let last = self.p.len() - 1;
        if level == last {
            let Some(t) = self.term(level, rest) else { return };
            let g = g + self.p[level] * rest as f64;
            if !self.feasible(g) {
                return;
            }
            counts.push(rest);
            best.feasible += 1;
            let value = kl + t;
            let cand_better = match value.total_cmp(&best.kl) {
                Ordering::Less => true,
                Ordering::Equal => best.counts.is_empty() || *counts < best.counts,
                Ordering::Greater => false,
            };
            if cand_better {
                best.kl = value;
                best.counts.clone_from(counts);
            }
            counts.pop();
            return;
        }
        for i in 0..=rest {
            let Some(t) = self.term(level, i) else { continue };
            counts.push(i);
            self.scan(
                level + 1,
                rest - i,
                counts,
                kl + t,
                g + self.p[level] * i as f64,
                best,
            );
            counts.pop();
        }
    }
}

/// Exhaustive scan of the simplex lattice with spacing `grid_step`.
///
/// Inequality mode keeps points with Σ P(a)U(a) ≤ β; equality mode keeps
/// points within `grid_step` of β. Ties go to the lexicographically smallest
/// probability vector.
pub fn grid_minimize_kl(p: &Pmf, spec: &ConstraintSpec, grid_step: f64) -> Result<GridMinimizerResult> {
    let k = p.len();
    if k > GRID_ALPHABET_CAP {
        return Err(Error::AlphabetTooLarge {
            size: k,
            cap: GRID_ALPHABET_CAP,
        });
    }
    if !(GRID_STEP_MIN..=GRID_STEP_MAX).contains(&grid_step) {
        return Err(Error::InvalidGridStep(grid_step));
    }
    let n = (1.0 / grid_step).round() as u32;
    let points = binomial(n as u128 + k as u128 - 1, k as u128 - 1);
    if points > GRID_POINTS_CAP {
        return Err(Error::GridTooFine {
            points,
            cap: GRID_POINTS_CAP,
        });
    }

    let inv_n = 1.0 / n as f64;
    let lattice = Lattice {
        n,
        p: p.probs(),
        ln_p: p.probs().iter().map(|x| x.ln()).collect(),
        ln_frac: (0..=n).map(|i| (i as f64 * inv_n).ln()).collect(),
        inv_n,
        beta: spec.beta(),
        mode: spec.mode(),
        slack: grid_step,
    };

    let best = (0..=lattice.n)
        .into_par_iter()
        .map(|first| {
            let mut best = Candidate::empty();
            if let Some(t) = lattice.term(0, first) {
                let mut counts = Vec::with_capacity(k);
                counts.push(first);
                lattice.scan(
                    1,
                    lattice.n - first,
                    &mut counts,
                    t,
                    p.probs()[0] * first as f64,
                    &mut best,
                );
            }
            best
        })
        .reduce(Candidate::empty, Candidate::merge);

    if best.counts.is_empty() {
        return Err(Error::NoFeasiblePoint);
    }
    let probs: Vec<f64> = best.counts.iter().map(|&c| c as f64 * inv_n).collect();
    let sum: f64 = probs.iter().sum();
    let probs = probs.into_iter().map(|x| x / sum).collect();
    let argmin = Pmf::from_normalized(p.labels().to_vec(), probs);
    Ok(GridMinimizerResult {
        kl_value: kl(&argmin, p)?,
        argmin,
        grid_step: inv_n,
        feasible_points_checked: best.feasible,
    })
}

/// Feasibility repair by mixing toward the extreme atoms.
struct Repair<'a> {
    p: &'a [f64],
    beta: f64,
    mode: ConstraintMode,
    low: Vec<f64>,
    high: Vec<f64>,
    p_min: f64,
    p_max: f64,
}

impl<'a> Repair<'a> {
    fn new(p: &'a Pmf, spec: &ConstraintSpec) -> Self {
        let extreme = |target: f64| -> Vec<f64> {
            let hits = p.probs().iter().filter(|&&x| x == target).count() as f64;
            p.probs()
                .iter()
                .map(|&x| if x == target { 1.0 / hits } else { 0.0 })
                .collect()
        };
        Self {
            p: p.probs(),
            beta: spec.beta(),
            mode: spec.mode(),
            low: extreme(p.p_min()),
            high: extreme(p.p_max()),
            p_min: p.p_min(),
            p_max: p.p_max(),
        }
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.p.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    fn apply(&self, u: &mut [f64]) {
        let g = self.value(u);
        let (target, edge) = if g > self.beta {
            (&self.low, self.p_min)
        } else if self.mode == ConstraintMode::Equality && g < self.beta {
            (&self.high, self.p_max)
        } else {
            return;
        };
        let t = ((g - self.beta) / (g - edge)).clamp(0.0, 1.0);
        for (ui, ti) in u.iter_mut().zip(target) {
            *ui = (1.0 - t) * *ui + t * ti;
        }
    }
}

fn kl_raw(u: &[f64], p: &[f64]) -> f64 {
    u.iter()
        .zip(p)
        .filter(|(ui, _)| **ui > 0.0)
        .map(|(ui, pi)| ui * (ui / pi).ln())
        .sum()
}

/// Local refinement of a feasible seed.
///
/// The seed is first made feasible by mixing toward the atoms of smallest
/// (or largest) probability. Each iteration then takes a damped Newton step
/// `u − t·u∘r`, where `r` is the KL gradient `ln(u/p)` with its u-weighted
/// fit in `(1, p)` removed when the budget binds (only the mean removed
/// otherwise), so both linear constraints hold exactly along the step. A
/// step is kept only if the KL decreases, so the result is never worse than
/// the seed.
pub fn refine_minimize_kl(p: &Pmf, spec: &ConstraintSpec, seed: &Pmf) -> Result<RefinedResult> {
    seed.ensure_same_labels(p)?;
    let (p_min, p_max) = (p.p_min(), p.p_max());
    let seed_value = p.expect(seed.probs());
    let beta = spec.beta();
    let infeasible = match spec.mode() {
        ConstraintMode::Inequality => seed_value > beta + FEASIBILITY_TOL,
        ConstraintMode::Equality => beta < p_min || beta > p_max,
    };
    if infeasible {
        return Err(Error::InfeasibleSeed {
            value: seed_value,
            beta,
        });
    }
    kl(seed, p)?;

    let pv = p.probs();
    let repair = Repair::new(p, spec);
    let mut start = seed.probs().to_vec();
    repair.apply(&mut start);
    let seed_kl = kl_raw(&start, pv);

    // The gradient needs ln u, so move off zero coordinates first.
    let mut u = start.clone();
    if u.iter().zip(pv).any(|(ui, pi)| *ui == 0.0 && *pi > 0.0) {
        for (ui, pi) in u.iter_mut().zip(pv) {
            *ui = (1.0 - LIFT) * *ui + LIFT * pi;
        }
        repair.apply(&mut u);
    }

    let equality = spec.mode() == ConstraintMode::Equality;
    let mut iterations = 0;
    let mut r = vec![0.0; u.len()];
    let mut d = vec![0.0; u.len()];
    let mut trial = vec![0.0; u.len()];
    while iterations < REFINE_MAX_ITERATIONS {
        iterations += 1;
        // The weighted means below assume Σu = 1 exactly.
        let total: f64 = u.iter().sum();
        u.iter_mut().for_each(|x| *x /= total);
        let current = kl_raw(&u, pv);
        for ((ri, ui), pi) in r.iter_mut().zip(&u).zip(pv) {
            *ri = if *ui > 0.0 { (ui / pi).ln() } else { 0.0 };
        }
        let mean_r: f64 = u.iter().zip(&r).map(|(a, b)| a * b).sum();
        let mean_p = repair.value(&u);
        let var_p: f64 = u.iter().zip(pv).map(|(a, b)| a * (b - mean_p).powi(2)).sum();
        let cov: f64 = u
            .iter()
            .zip(pv)
            .zip(&r)
            .map(|((a, b), c)| a * (b - mean_p) * (c - mean_r))
            .sum();

        // Newton direction with only Σu = 1 enforced; keep it if it does
        // not push Σpu past the budget.
        for ((di, ui), ri) in d.iter_mut().zip(&u).zip(&r) {
            *di = -ui * (ri - mean_r);
        }
        let drift: f64 = d.iter().zip(pv).map(|(a, b)| a * b).sum();
        let on_boundary = mean_p >= beta - FEASIBILITY_TOL;
        let constrained = equality || (on_boundary && drift > 0.0);
        if constrained {
            let slope = if var_p > 1e-300 { cov / var_p } else { 0.0 };
            for (((di, ui), ri), pi) in d.iter_mut().zip(&u).zip(&r).zip(pv) {
                *di = -ui * (ri - mean_r - slope * (pi - mean_p));
            }
        }
        let mut t = 1.0f64;
        if !constrained && drift > 0.0 {
            t = t.min((beta - mean_p).max(0.0) / drift);
        }
        for (ui, di) in u.iter().zip(&d) {
            if *di < 0.0 {
                t = t.min(-0.99 * ui / di);
            }
        }

        let mut accepted = None;
        while t > 1e-16 {
            for ((ti, ui), di) in trial.iter_mut().zip(&u).zip(&d) {
                *ti = ui + t * di;
            }
            let candidate = kl_raw(&trial, pv);
            if candidate < current {
                accepted = Some(candidate);
                break;
            }
            t *= 0.5;
        }
        let Some(candidate) = accepted else { break };
        std::mem::swap(&mut u, &mut trial);
        if current - candidate < REFINE_MIN_IMPROVEMENT * candidate.max(1e-300) {
            break;
        }
    }

    let total: f64 = u.iter().sum();
    u.iter_mut().for_each(|x| *x /= total);
    if kl_raw(&u, pv) > seed_kl {
        u = start;
    }
    let argmin = Pmf::from_normalized(p.labels().to_vec(), u);
    Ok(RefinedResult {
        kl_value: kl(&argmin, p)?,
        argmin,
        seed_kl,
        iterations,
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

fn enumerate_where(p: &Pmf, n: usize, inside: impl Fn(f64) -> bool) -> Result<TypeEnumeration> {
    let k = p.len();
    if k > ENUM_ALPHABET_CAP || n > ENUM_LENGTH_CAP {
        return Err(Error::TooLarge {
            alphabet: k,
            alphabet_cap: ENUM_ALPHABET_CAP,
            n,
            n_cap: ENUM_LENGTH_CAP,
        });
    }
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    let probs = p.probs();
    let n_fact = factorial(n);
    let mut exact_probability = 0.0;
    let mut num_types_in_e = 0;
    let mut counts = vec![0usize; k];
    // odometer over compositions of n into k parts
    loop {
        let used: usize = counts[..k - 1].iter().sum();
        if used <= n {
            counts[k - 1] = n - used;
            let mean = counts
                .iter()
                .zip(probs)
                .map(|(&c, &pa)| c as f64 * pa)
                .sum::<f64>()
                / n as f64;
            if inside(mean) {
                let coeff = n_fact / counts.iter().map(|&c| factorial(c)).product::<f64>();
                let mass: f64 = counts
                    .iter()
                    .zip(probs)
                    .map(|(&c, &pa)| pa.powi(c as i32))
                    .product();
                exact_probability += coeff * mass;
                num_types_in_e += 1;
            }
        }
        let mut i = 0;
        loop {
            if i == k - 1 {
                return Ok(TypeEnumeration {
                    n,
                    exact_probability: exact_probability.min(1.0),
                    num_types_in_e,
                });
            }
            counts[i] += 1;
            if counts[..k - 1].iter().sum::<usize>() <= n {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// Exact probability that the type T of an i.i.d. length-`n` sequence from
/// `p` satisfies Σ P(a)T(a) ≤ `beta`.
pub fn enumerate_types(p: &Pmf, beta: f64, n: usize) -> Result<TypeEnumeration> {
    enumerate_where(p, n, |mean| mean <= beta + FEASIBILITY_TOL)
}

/// Same as [`enumerate_types`] for the complementary event Σ P(a)T(a) > β.
pub fn enumerate_types_complement(p: &Pmf, beta: f64, n: usize) -> Result<TypeEnumeration> {
    enumerate_where(p, n, |mean| mean > beta + FEASIBILITY_TOL)
}
