//! Command-line front end.
//!
//! Exit codes: 0 success, 2 malformed or invalid input, 3 request outside the
//! mathematical domain (infeasible budget, oracle caps), 4 a verification
//! check failed.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use sha2::{Digest, Sha256};

use mimtilt::io::{distribution_to_json, parse_distribution_json, read_counts_csv};
use mimtilt::{
    beta_from_raw, fairness, feasible_range, solve, tilt, ConstraintMode, ConstraintSpec,
    ImportanceCoefficient, Pmf, TiltResult,
};

pub mod args;
pub mod sweep;
pub mod verify;

use args::{Axis, Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<mimtilt::Error> for CliError {
    fn from(e: mimtilt::Error) -> Self {
        let code = if e.is_input() { EXIT_INPUT } else { EXIT_DOMAIN };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_distribution(path: &Path) -> Result<(Pmf, String), CliError> {
    let text = read_text(path)?;
    let dist =
        parse_distribution_json(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let hash = Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok((dist.pmf, hash))
}

fn range_note(p: &Pmf) -> String {
    match feasible_range(p) {
        Ok(r) => format!("feasible range: [{}, {}]", r.beta_min, r.beta_max),
        Err(_) => format!("feasible range: [{}, {}] (degenerate)", p.p_min(), p.p_max()),
    }
}

fn print_result(out: &mut dyn Write, p: &Pmf, r: &TiltResult, json: bool) -> Result<(), CliError> {
    if json {
        let text = serde_json::to_string_pretty(r).map_err(|e| CliError::input(e.to_string()))?;
        writeln!(out, "{text}")?;
        return Ok(());
    }
    let report = fairness(p, &r.utility)?;
    writeln!(out, "omega: {}", r.omega)?;
    writeln!(out, "lambda: {}", 0.0 - r.omega)?;
    writeln!(out, "utility:")?;
    writeln!(
        out,
        "  {:<12} {:>24} {:>24} {:>24}  usage",
        "label", "p", "u*", "u*/p"
    )?;
    for (i, label) in p.labels().iter().enumerate() {
        writeln!(
            out,
            "  {:<12} {:>24} {:>24} {:>24}  {}",
            label,
            p.probs()[i],
            r.utility.probs()[i],
            report.ratios[i],
            report.classes[i]
        )?;
    }
    writeln!(out, "argmax: {}", p.labels()[r.utility.argmax()])?;
    writeln!(out, "beta: {}", r.beta)?;
    writeln!(out, "alpha: {}", r.alpha)?;
    match r.mim_total.value {
        Some(z) => writeln!(out, "mim_total: {z}")?,
        None => writeln!(out, "mim_total: overflow (ln = {})", r.mim_total.ln_value)?,
    }
    writeln!(out, "kl_to_source: {}", r.kl_to_source)?;
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Compute { dist, omega, json } => {
            let (p, _) = load_distribution(&dist)?;
            let r = tilt(&p, ImportanceCoefficient::new(omega)?)?;
            print_result(out, &p, &r, json)?;
        }
        Command::Solve {
            dist,
            beta,
            mode,
            json,
        } => {
            let (p, _) = load_distribution(&dist)?;
            let spec = ConstraintSpec::budget(beta, mode.into())?;
            let r = solve(&p, &spec).map_err(|e| {
                let mut e = CliError::from(e);
                if e.code == EXIT_DOMAIN {
                    e.message = format!("{}; {}", e.message, range_note(&p));
                }
                e
            })?;
            if spec.mode() == ConstraintMode::Inequality && !json {
                if r.omega == 0.0 {
                    writeln!(
                        out,
                        "note: constraint inactive (sum p_i^2 = {} <= beta)",
                        p.collision()
                    )?;
                } else {
                    writeln!(out, "note: constraint active")?;
                }
            }
            print_result(out, &p, &r, json)?;
        }
        Command::Sweep {
            dist,
            axis,
            range,
            out: path,
        } => {
            let (p, hash) = load_distribution(&dist)?;
            let points = sweep::parse_range(&range)?;
            let table = match axis {
                Axis::Omega => sweep::sweep_omega(&p, &points, hash)?,
                Axis::Beta => sweep::sweep_beta(&p, &points, hash)?,
            };
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            fs::write(&path, buf)?;
            writeln!(
                out,
                "wrote {} rows to {} (labels {}; source sha256 {})",
                table.rows.len(),
                path.display(),
                table.labels.join(","),
                table.source_hash
            )?;
        }
        Command::Verify {
            dist,
            beta,
            grid_step,
            n,
        } => {
            let (p, _) = load_distribution(&dist)?;
            let report = verify::verify(&p, beta, grid_step, n)?;
            for check in &report.checks {
                let tag = if check.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} {}: {}", check.name, check.detail)?;
            }
            if !report.passed() {
                return Ok(EXIT_VERIFY);
            }
        }
        Command::Ingest { counts, usage } => {
            let read = |path: &Path| -> Result<_, CliError> {
                let file =
                    fs::File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                read_counts_csv(file).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
            };
            let source = read(&counts)?;
            let p = source.normalized()?;
            writeln!(out, "{}", distribution_to_json(&p))?;
            if let Some(path) = usage {
                let budget = beta_from_raw(&p, &read(&path)?)?;
                writeln!(err, "beta = {}", budget.beta)?;
                writeln!(err, "alpha = {}", budget.alpha)?;
            }
        }
    }
    Ok(EXIT_OK)
}
