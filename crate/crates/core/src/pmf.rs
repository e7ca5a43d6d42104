//! Validated finite distributions, raw usage counts and fairness diagnostics.
//!
//! The label order of a [`Pmf`] is significant: every operation that combines
//! two distributions requires identical label vectors and aligns by position.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest accepted deviation of a probability sum from 1 when the caller has
/// not asked for renormalization.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Default relative tolerance used to classify a usage ratio as fair.
pub const DEFAULT_FAIRNESS_TOL: f64 = 1e-9;

/// A probability mass function over an ordered, labelled alphabet.
///
/// Zero-probability atoms are allowed. They are ignored by [`Pmf::p_min`] and
/// receive no mass under tilting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl Pmf {
    /// Builds a distribution from explicit probabilities without touching them.
    pub fn from_probs<I, S>(labels: I, probs: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::build(collect_labels(labels), probs, false)
    }

    /// Like [`Pmf::from_probs`] but divides by the sum first.
    pub fn from_probs_renormalized<I, S>(labels: I, probs: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::build(collect_labels(labels), probs, true)
    }

    /// Labels `a1..ak` in order. Mostly handy in tests and examples.
    pub fn unlabeled(probs: &[f64]) -> Result<Self> {
        Self::from_probs(default_labels(probs.len()), probs.to_vec())
    }

    /// Normalizes nonnegative counts into a distribution and keeps the raw
    /// counts alongside.
    pub fn from_counts<I, S>(labels: I, counts: Vec<f64>) -> Result<(Self, RawUsage)>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let raw = RawUsage::new(labels, counts)?;
        let pmf = raw.normalized()?;
        Ok((pmf, raw))
    }

    fn build(labels: Vec<String>, mut probs: Vec<f64>, renormalize: bool) -> Result<Self> {
        check_labels(&labels, probs.len())?;
        check_finite(&probs)?;
        for (label, &p) in labels.iter().zip(&probs) {
            if p < 0.0 {
                return Err(Error::NegativeProb {
                    label: label.clone(),
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if renormalize {
            if sum <= 0.0 {
                return Err(Error::NotNormalized { sum });
            }
            probs.iter_mut().for_each(|p| *p /= sum);
        } else if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { labels, probs })
    }

    /// Internal constructor for vectors that are normalized by construction.
    pub(crate) fn from_normalized(labels: Vec<String>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len(), probs.len());
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        Self { labels, probs }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.probs.iter().copied())
    }

    /// Smallest strictly positive probability.
    pub fn p_min(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn p_max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// Collision probability Σ pᵢ², the P-weighted average of P itself.
    pub fn collision(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    /// Number of distinct strictly positive probability values.
    pub fn distinct_positive(&self) -> usize {
        let mut positive: Vec<f64> = self.probs.iter().copied().filter(|&p| p > 0.0).collect();
        positive.sort_by(f64::total_cmp);
        positive.dedup();
        positive.len()
    }

    /// Expectation of `values` under this distribution.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Largest absolute componentwise difference. Panics on length mismatch.
    pub fn linf_distance(&self, other: &Pmf) -> f64 {
        assert_eq!(self.len(), other.len(), "distributions differ in length");
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Index of the largest probability (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub(crate) fn ensure_same_labels(&self, other: &Pmf) -> Result<()> {
        if self.labels == other.labels {
            Ok(())
        } else {
            Err(Error::LabelMismatch)
        }
    }
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (label, p)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{label}: {p}")?;
        }
        write!(f, ")")
    }
}

/// Raw (unnormalized) usage counts U′(a) with a raw budget β′.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawUsage {
    labels: Vec<String>,
    counts: Vec<f64>,
    budget_raw: f64,
}

impl RawUsage {
    /// Counts with the vacuous budget β′ = Σ U′ (scaled budget 1).
    pub fn new<I, S>(labels: I, counts: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = collect_labels(labels);
        check_labels(&labels, counts.len())?;
        check_finite(&counts)?;
        for (label, &c) in labels.iter().zip(&counts) {
            if c < 0.0 {
                return Err(Error::NegativeCount {
                    label: label.clone(),
                    value: c,
                });
            }
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(Error::AllZeroCounts);
        }
        Ok(Self {
            labels,
            counts,
            budget_raw: total,
        })
    }

    /// Replaces the raw budget β′.
    pub fn with_budget(mut self, budget_raw: f64) -> Result<Self> {
        if !budget_raw.is_finite() {
            return Err(Error::NonFinite {
                index: 0,
                value: budget_raw,
            });
        }
        if budget_raw < 0.0 {
            return Err(Error::NegativeCount {
                label: "budget".into(),
                value: budget_raw,
            });
        }
        self.budget_raw = budget_raw;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn budget_raw(&self) -> f64 {
        self.budget_raw
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// β = β′ / Σ U′, the budget expressed on normalized usage.
    pub fn scaled_budget(&self) -> f64 {
        self.budget_raw / self.total()
    }

    /// Normalized usage U(a) = U′(a) / Σ U′.
    pub fn normalized(&self) -> Result<Pmf> {
        let total = self.total();
        let probs = self.counts.iter().map(|c| c / total).collect();
        Pmf::build(self.labels.clone(), probs, false)
    }
}

/// β together with its complementary slack α = 1 − β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UsageBudget {
    pub beta: f64,
    pub alpha: f64,
}

/// Realized budget β = Σ P(a)·U(a) of the normalized usage counts.
///
/// Lies in `[p_min, p_max]` whenever the usage is supported on the support of `p`.
pub fn beta_from_raw(p: &Pmf, raw: &RawUsage) -> Result<UsageBudget> {
    if p.labels() != raw.labels() {
        return Err(Error::LabelMismatch);
    }
    let usage = raw.normalized()?;
    let beta = p.expect(usage.probs());
    Ok(UsageBudget {
        beta,
        alpha: 1.0 - beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UsageClass {
    Overused,
    Fair,
    Underused,
}

impl fmt::Display for UsageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UsageClass::Overused => "overused",
            UsageClass::Fair => "fair",
            UsageClass::Underused => "underused",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    pub labels: Vec<String>,
    /// U(a) / P(a); 1 where both vanish.
    pub ratios: Vec<f64>,
    pub classes: Vec<UsageClass>,
}

impl FairnessReport {
    pub fn all_fair(&self) -> bool {
        self.classes.iter().all(|c| *c == UsageClass::Fair)
    }
}

pub fn fairness(p: &Pmf, u: &Pmf) -> Result<FairnessReport> {
    fairness_with_tol(p, u, DEFAULT_FAIRNESS_TOL)
}

/// Per-label usage ratio U(a)/P(a), classified against `1 ± tol`.
pub fn fairness_with_tol(p: &Pmf, u: &Pmf, tol: f64) -> Result<FairnessReport> {
    p.ensure_same_labels(u)?;
    let mut ratios = Vec::with_capacity(p.len());
    let mut classes = Vec::with_capacity(p.len());
    for ((label, pa), ua) in p.iter().zip(u.probs().iter().copied()) {
        let ratio = if pa > 0.0 {
            ua / pa
        } else if ua == 0.0 {
            1.0
        } else {
            return Err(Error::SupportMismatch(label.to_string()));
        };
        let class = if ratio > 1.0 + tol {
            UsageClass::Overused
        } else if ratio < 1.0 - tol {
            UsageClass::Underused
        } else {
            UsageClass::Fair
        };
        ratios.push(ratio);
        classes.push(class);
    }
    Ok(FairnessReport {
        labels: p.labels().to_vec(),
        ratios,
        classes,
    })
}

pub(crate) fn default_labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("a{i}")).collect()
}

fn collect_labels<I, S>(labels: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    labels.into_iter().map(Into::into).collect()
}

fn check_labels(labels: &[String], values: usize) -> Result<()> {
    if labels.len() != values {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            values,
        });
    }
    if labels.len() < 2 {
        return Err(Error::TooFewAtoms(labels.len()));
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel(label.clone()));
        }
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P1: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

    fn p1() -> Pmf {
        Pmf::from_probs(["a", "b", "c", "d"], P1.to_vec()).unwrap()
    }

    #[test]
    fn accepts_valid_distributions() {
        let p = p1();
        assert_eq!(p.len(), 4);
        assert_eq!(p.p_min(), 0.1);
        assert_eq!(p.p_max(), 0.4);
        assert!(Pmf::from_probs(["a", "b"], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn rejects_bad_sums_and_labels() {
        assert!(matches!(
            Pmf::from_probs(["a", "b"], vec![0.6, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            Pmf::from_probs(["a", "a"], vec![0.5, 0.5]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            Pmf::from_probs(["a"], vec![1.0]),
            Err(Error::TooFewAtoms(1))
        ));
        assert!(matches!(
            Pmf::from_probs(["a", "b"], vec![1.5, -0.5]),
            Err(Error::NegativeProb { .. })
        ));
        assert!(matches!(
            Pmf::from_probs(["a", "b", "c"], vec![0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Pmf::from_probs(["a", "b"], vec![f64::NAN, 0.5]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn renormalization_is_opt_in() {
        let p = Pmf::from_probs_renormalized(["a", "b"], vec![0.6, 0.6]).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn counts_normalize() {
        let (p, raw) = Pmf::from_counts(["a", "b", "c", "d"], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(p.linf_distance(&p1()) < 1e-15);
        assert_eq!(raw.counts(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(raw.total(), 10.0);
        assert_eq!(raw.scaled_budget(), 1.0);

        let (p, _) = Pmf::from_counts(["x", "y"], vec![5.0, 5.0]).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);

        assert_eq!(
            Pmf::from_counts(["x", "y"], vec![0.0, 0.0]).unwrap_err(),
            Error::AllZeroCounts
        );
    }

    #[test]
    fn raw_budget_scales_by_total() {
        let raw = RawUsage::new(["a", "b"], vec![3.0, 1.0])
            .unwrap()
            .with_budget(2.0)
            .unwrap();
        assert_eq!(raw.scaled_budget(), 0.5);
    }

    #[test]
    fn zero_atoms_are_skipped_by_p_min() {
        let p = Pmf::unlabeled(&[0.0, 0.25, 0.75]).unwrap();
        assert_eq!(p.p_min(), 0.25);
        assert_eq!(p.distinct_positive(), 2);
    }

    #[test]
    fn fairness_identity() {
        let p = p1();
        let report = fairness(&p, &p).unwrap();
        assert!(report.all_fair());
        assert!(report.ratios.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn fairness_point_mass() {
        let p = p1();
        let u = Pmf::from_probs(["a", "b", "c", "d"], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let report = fairness(&p, &u).unwrap();
        assert!((report.ratios[0] - 10.0).abs() < 1e-12);
        assert_eq!(report.classes[0], UsageClass::Overused);
        assert!(report.classes[1..].iter().all(|c| *c == UsageClass::Underused));
    }

    #[test]
    fn fairness_zero_atoms() {
        let p = Pmf::unlabeled(&[0.0, 0.5, 0.5]).unwrap();
        let u = Pmf::unlabeled(&[0.0, 0.25, 0.75]).unwrap();
        let report = fairness(&p, &u).unwrap();
        assert_eq!(report.ratios[0], 1.0);
        assert_eq!(report.classes[0], UsageClass::Fair);

        let bad = Pmf::unlabeled(&[0.1, 0.4, 0.5]).unwrap();
        assert!(matches!(fairness(&p, &bad), Err(Error::SupportMismatch(_))));

        let other = Pmf::from_probs(["x", "y", "z"], vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(fairness(&p, &other).unwrap_err(), Error::LabelMismatch);
    }

    #[test]
    fn beta_from_counts() {
        let p = p1();
        let labels = ["a", "b", "c", "d"];
        let prop = RawUsage::new(labels, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((beta_from_raw(&p, &prop).unwrap().beta - 0.3).abs() < 1e-15);

        let point = RawUsage::new(labels, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let budget = beta_from_raw(&p, &point).unwrap();
        assert_eq!(budget.beta, 0.1);
        assert_eq!(budget.alpha, 0.9);

        let half = Pmf::from_probs(["x", "y"], vec![0.5, 0.5]).unwrap();
        let raw = RawUsage::new(["x", "y"], vec![1.0, 1.0]).unwrap();
        assert_eq!(beta_from_raw(&half, &raw).unwrap().beta, 0.5);

        assert_eq!(beta_from_raw(&half, &prop).unwrap_err(), Error::LabelMismatch);
    }
}
