//! Command-line front end. Every command returns its exit code and output
//! instead of printing, so the binary stays a thin shell and the commands are
//! testable in-process.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{
    boundary_positivity, default_grid, grid_avoiding, is_even, negative_squares, quat_boundary_positivity, quat_is_even,
    Evaluable, KernelKind,
};
use crate::error::{Error, Result};
use crate::factorization::{factor_regularized, pseudo_spectral_factor, Side, BOUNDARY_TOL};
use crate::interp::InterpolationSpec;
use crate::io::{parse_complex, parse_quaternion, read_realization, realization_to_json};
use crate::linalg::{CMatrix, C64};
use crate::quat::{QuatMatrix, Quaternion};
use crate::realization::{minimality_report, AnyRealization};
use crate::slicefun::quat_gpe_factor;

#[derive(Debug, Parser)]
#[command(name = "gpe", version, about = "Generalized positive even rational functions: evaluation, factorization, kernels, interpolation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a realization at a point ("a+bi", or "a+bi+cj+dk" for quaternionic files).
    Eval {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Pseudo-spectral factorization Phi = L^# L.
    Factor {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, default_value = "right")]
        side: Side,
        /// Factor through D + eps I and pass to the limit (for singular D).
        #[arg(long)]
        regularize: bool,
        /// Where to write the factor realization.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the negative squares of the kernel on a right-half-plane grid.
    Negsq {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, default_value_t = 30)]
        grid: usize,
        /// Defaults to carat for complex files and quat-carat for quaternionic ones.
        #[arg(long, value_enum)]
        kernel: Option<KernelArg>,
    },
    /// Solve an interpolation problem described by a JSON file.
    Interp {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test a structural property; exits 0 when it holds and 1 otherwise.
    Check {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, value_enum)]
        property: Property,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Carat,
    Schur,
    QuatCarat,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Carat => KernelKind::Carat,
            KernelArg::Schur => KernelKind::Schur,
            KernelArg::QuatCarat => KernelKind::QuatCarat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Even,
    Gpe,
    Minimal,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn from_error(e: &Error) -> Self {
        Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

pub fn run(cli: Cli) -> Outcome {
    let result = match cli.command {
        Command::Eval { realization, point } => cmd_eval(&realization, &point),
        Command::Factor { realization, side, regularize, out } => cmd_factor(&realization, side, regularize, out.as_deref()),
        Command::Negsq { realization, grid, kernel } => cmd_negsq(&realization, grid, kernel.map(Into::into)),
        Command::Interp { spec, out } => cmd_interp(&spec, out.as_deref()),
        Command::Check { realization, property } => cmd_check(&realization, property),
    };
    result.unwrap_or_else(|e| Outcome::from_error(&e))
}

/// Round to 12 decimals so that printed values do not carry rounding noise.
fn tidy(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn format_terms(parts: &[(f64, &str)]) -> String {
    let mut s = String::new();
    for &(v, unit) in parts {
        let v = tidy(v);
        if v == 0.0 {
            continue;
        }
        let mag = v.abs();
        if !s.is_empty() || v < 0.0 {
            s.push(if v < 0.0 { '-' } else { '+' });
        }
        if unit.is_empty() || mag != 1.0 {
            s.push_str(&mag.to_string());
        }
        s.push_str(unit);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

pub fn format_complex(z: C64) -> String {
    format_terms(&[(z.re, ""), (z.im, "i")])
}

pub fn format_quaternion(q: Quaternion) -> String {
    format_terms(&[(q.w, ""), (q.x, "i"), (q.y, "j"), (q.z, "k")])
}

fn format_rows(rows: Vec<Vec<String>>) -> String {
    if rows.len() == 1 && rows[0].len() == 1 {
        return rows[0][0].clone();
    }
    let inner: Vec<String> = rows.iter().map(|r| format!("[{}]", r.join(", "))).collect();
    format!("[{}]", inner.join(", "))
}

pub fn format_cmatrix(m: &CMatrix) -> String {
    format_rows((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect()).collect())
}

pub fn format_qmatrix(m: &QuatMatrix) -> String {
    format_rows((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| format_quaternion(m[(i, j)])).collect()).collect())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("report types serialize");
    s.push('\n');
    s
}

pub fn cmd_eval(path: &Path, point: &str) -> Result<Outcome> {
    let text = match read_realization(path)? {
        AnyRealization::Complex(r) => format_cmatrix(&r.evaluate(parse_complex(point)?)?),
        AnyRealization::Quaternion(r) => format_qmatrix(&r.evaluate_slice(parse_quaternion(point)?)?),
    };
    Ok(Outcome::ok(text + "\n"))
}

pub fn cmd_factor(path: &Path, side: Side, regularize: bool, out: Option<&Path>) -> Result<Outcome> {
    let (factor, report) = match read_realization(path)? {
        AnyRealization::Complex(r) => {
            let f = if regularize { factor_regularized(&r, side)? } else { pseudo_spectral_factor(&r, side)? };
            let report = json!({
                "field": "complex",
                "side": f.side,
                "residual": f.residual,
                "factor_state_dim": f.factor.state_dim(),
                "subspace_dims": {
                    "m_plus": f.subspaces.m_plus.dim(),
                    "m_minus": f.subspaces.m_minus.dim(),
                    "m_plus_cross": f.subspaces.m_plus_cross.dim(),
                    "m_minus_cross": f.subspaces.m_minus_cross.dim(),
                },
                "epsilon_path": f.epsilon_path,
            });
            (AnyRealization::Complex(f.factor), report)
        }
        AnyRealization::Quaternion(r) => {
            let f = quat_gpe_factor(&r, side, regularize)?;
            let report = json!({
                "field": "quaternion",
                "side": f.side,
                "residual": f.residual,
                "e_symmetry_defect": f.e_symmetry_defect,
                "factor_state_dim": f.factor.state_dim(),
                "lifted_residual": f.lifted.residual,
                "epsilon_path": f.lifted.epsilon_path,
            });
            (AnyRealization::Quaternion(f.factor), report)
        }
    };
    if let Some(out) = out {
        std::fs::write(out, realization_to_json(&factor))?;
    }
    Ok(Outcome::ok(to_json(&report)))
}

pub fn cmd_negsq(path: &Path, grid: usize, kernel: Option<KernelKind>) -> Result<Outcome> {
    if grid == 0 {
        return Err(Error::InvalidInput("grid must have at least one point".into()));
    }
    let r = read_realization(path)?;
    let (poles, kind) = match &r {
        AnyRealization::Complex(c) => (c.poles().to_vec(), kernel.unwrap_or(KernelKind::Carat)),
        AnyRealization::Quaternion(q) => (q.lift().poles().to_vec(), kernel.unwrap_or(KernelKind::QuatCarat)),
    };
    let pts: Vec<Quaternion> = grid_avoiding(&default_grid(grid), &poles, 1e-3).into_iter().map(Quaternion::from_complex).collect();
    let report = match &r {
        AnyRealization::Complex(c) => {
            let f = |z: C64| c.evaluate(z);
            negative_squares(kind, Evaluable::Complex(&f), &pts)?
        }
        AnyRealization::Quaternion(q) => {
            let lifted = q.lift();
            let f = |p: Quaternion| q.evaluate_slice_with(&lifted, p);
            negative_squares(kind, Evaluable::Quaternion(&f), &pts)?
        }
    };
    Ok(Outcome::ok(to_json(&report)))
}

pub fn cmd_interp(path: &Path, out: Option<&Path>) -> Result<Outcome> {
    let spec = InterpolationSpec::from_json(&std::fs::read_to_string(path)?)?;
    let outcome = to_json(&spec.solve()?);
    match out {
        Some(out) => {
            std::fs::write(out, &outcome)?;
            Ok(Outcome::ok(format!("wrote {}\n", out.display())))
        }
        None => Ok(Outcome::ok(outcome)),
    }
}

pub fn cmd_check(path: &Path, property: Property) -> Result<Outcome> {
    let r = read_realization(path)?;
    let verdict = match (property, &r) {
        (Property::Even, AnyRealization::Complex(c)) => json!({ "property": "even", "holds": is_even(c) }),
        (Property::Even, AnyRealization::Quaternion(q)) => json!({ "property": "even", "holds": quat_is_even(q) }),
        (Property::Gpe, _) => {
            let (even, rep) = match &r {
                AnyRealization::Complex(c) => (is_even(c), boundary_positivity(c, 201)?),
                AnyRealization::Quaternion(q) => (quat_is_even(q), quat_boundary_positivity(q, 201)?),
            };
            let positive = rep.min_eig >= -BOUNDARY_TOL;
            json!({
                "property": "gpe",
                "holds": even && positive,
                "even": even,
                "boundary_min_eig": rep.min_eig,
                "worst_point": rep.worst_point,
            })
        }
        (Property::Minimal, _) => {
            let lifted = match &r {
                AnyRealization::Complex(c) => c.clone(),
                AnyRealization::Quaternion(q) => q.lift(),
            };
            let m = minimality_report(&lifted)?;
            json!({
                "property": "minimal",
                "holds": m.is_minimal(),
                "controllable": m.controllable,
                "observable": m.observable,
                "state_dim": lifted.state_dim(),
            })
        }
    };
    let holds = verdict["holds"].as_bool().unwrap_or(false);
    Ok(Outcome { code: if holds { 0 } else { 1 }, stdout: to_json(&verdict), stderr: String::new() })
}
