//! Parameter sweeps over the tilted family, written as CSV.

use std::io::Write;

use rayon::prelude::*;

use mimtilt::{feasible_range, solve_omega, tilt, ImportanceCoefficient, Pmf};

use crate::CliError;

/// Parses `start:stop:step` into the inclusive list of points
/// `start + k·step`, keeping the last point when it lies within half a step
/// of `stop`.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(CliError::input(format!("range `{spec}` is not start:stop:step")));
    };
    let num = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::input(format!("range `{spec}`: `{s}` is not a finite number")))
    };
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if step <= 0.0 {
        return Err(CliError::input(format!("range `{spec}`: step must be positive")));
    }
    if stop < start {
        return Err(CliError::input(format!("range `{spec}`: stop is below start")));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub beta: f64,
    pub utility: Vec<f64>,
}

/// Rows of a sweep, ordered by strictly increasing ϖ.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub labels: Vec<String>,
    /// SHA-256 of the distribution file the sweep was computed from.
    pub source_hash: String,
    pub rows: Vec<SweepRow>,
}

fn row(p: &Pmf, omega: ImportanceCoefficient) -> Result<SweepRow, CliError> {
    let r = tilt(p, omega)?;
    Ok(SweepRow {
        omega: r.omega,
        beta: r.beta,
        utility: r.utility.probs().to_vec(),
    })
}

pub fn sweep_omega(p: &Pmf, points: &[f64], source_hash: String) -> Result<SweepTable, CliError> {
    let rows = points
        .par_iter()
        .map(|&w| row(p, ImportanceCoefficient::new(w)?))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepTable {
        labels: p.labels().to_vec(),
        source_hash,
        rows,
    })
}

pub fn sweep_beta(p: &Pmf, points: &[f64], source_hash: String) -> Result<SweepTable, CliError> {
    let range = feasible_range(p)?;
    if let Some(&bad) = points.iter().find(|&&b| !range.contains_open(b)) {
        return Err(CliError::domain(format!(
            "beta {bad} leaves the open feasible interval ({}, {})",
            range.beta_min, range.beta_max
        )));
    }
    let mut rows = points
        .par_iter()
        .map(|&b| row(p, solve_omega(p, b)?))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    rows.dedup_by(|a, b| a.omega == b.omega);
    Ok(SweepTable {
        labels: p.labels().to_vec(),
        source_hash,
        rows,
    })
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "omega,beta")?;
        for label in &self.labels {
            write!(w, ",{label}")?;
        }
        writeln!(w)?;
        for row in &self.rows {
            write!(w, "{},{}", fmt_float(row.omega), fmt_float(row.beta))?;
            for u in &row.utility {
                write!(w, ",{}", fmt_float(*u))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
