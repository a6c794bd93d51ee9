//! Command-line driver: `generate`, `compute` and `verify`.
//!
//! Exit codes: 0 when everything passed, 1 when a check failed, 2 for usage
//! and IO errors.

use crate::bott_holonomy::{self as bh, ConnectionLoop, EtaOptions, TransportOptions};
use crate::chern;
use crate::error::{Error, Result};
use crate::fields::{self, PathField, Window};
use crate::form::MixedForm;
use crate::grid::Grid;
use crate::mvf::{MvfFile, MvfKind};
use crate::report::{Check, Report};
use crate::stable_ops::TIME_AXIS;
use crate::suites::{self, Suite, SuiteConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "chern-lab", version, about = "Chern and Chern-Simons forms of matrix-valued maps on sampled tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a canonical field to an .mvf file.
    Generate(GenerateArgs),
    /// Compute a form or map from an .mvf file.
    Compute(ComputeArgs),
    /// Run a verification suite and report residuals.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Winding,
    Bloch,
    PaperExample,
    RandomUnitary,
    RandomProjection,
}

#[derive(clap::Args, Debug)]
pub struct GenerateArgs {
    pub kind: GenKind,
    /// Output .mvf path.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Points per axis.
    #[arg(long, default_value_t = 32)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Degree of the Bloch map.
    #[arg(long, default_value_t = 1)]
    pub degree: i64,
    /// Winding numbers, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
    pub m: Vec<i64>,
    /// Window p,q of random fields.
    #[arg(long, value_delimiter = ',', default_values_t = [0i64, 2], allow_hyphen_values = true)]
    pub window: Vec<i64>,
    /// Active rank of random projections.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    /// Fourier bandwidth of random fields.
    #[arg(long, default_value_t = 1)]
    pub bandwidth: usize,
    /// Number of base axes of random fields (x, y, z).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Add a periodic time axis of this many samples, making a loop.
    #[arg(long)]
    pub loop_samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum What {
    Chern,
    Cs,
    Eta,
    Holonomy,
    Periods,
}

#[derive(clap::Args, Debug)]
pub struct ComputeArgs {
    pub what: What,
    /// Input .mvf path.
    pub input: PathBuf,
    /// Time axis of paths and loops; read from the file header by default.
    #[arg(long)]
    pub axis: Option<String>,
    /// Output .mvf path for the computed form or map.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Degree of the mixed result written to --out; the highest by default.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Chern truncation degree.
    #[arg(long)]
    pub max_deg: Option<usize>,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    /// stokes, cs-vanishing, sums, based-loop, bott-degree0, deta, gluing,
    /// reversal, example, integrality or all.
    pub suite: String,
    #[arg(long, default_value_t = 32)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_deg: Option<usize>,
    /// Replace every default tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also validate the invariants of a field file.
    #[arg(long)]
    pub field: Option<PathBuf>,
}

/// Parses arguments, runs, and maps the outcome onto an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Ok(pass) on completion, Err on usage or IO problems.
pub fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate(a) => generate(&a).map(|_| true),
        Command::Compute(a) => compute(&a),
        Command::Verify(a) => verify(&a),
    }
}

fn base_grid(size: usize, dim: usize) -> Result<Grid> {
    let names = ["x", "y", "z"];
    if dim == 0 || dim > 3 {
        return Err(Error::InvalidInput("--dim must be 1, 2 or 3".into()));
    }
    Grid::torus(&names[..dim], size, 1.0)
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let window = || -> Result<Window> {
        match a.window.as_slice() {
            [p, q] => Window::new(*p, *q),
            _ => Err(Error::InvalidInput("--window takes p,q".into())),
        }
    };
    let with_loop = |g: Grid| -> Result<Grid> {
        match a.loop_samples {
            Some(nt) => g.with_axis(crate::grid::Axis::periodic(TIME_AXIS, nt, 1.0)),
            None => Ok(g),
        }
    };
    let time = a.loop_samples.map(|_| TIME_AXIS.to_string());
    let file = match a.kind {
        GenKind::Winding => {
            let g = Grid::torus(&["t"], a.size, 1.0)?;
            let w = Window::new(0, a.m.len().max(1) as i64)?;
            MvfFile::unitary(&fields::winding_unitary(&g, "t", &a.m, w)?)
        }
        GenKind::Bloch => MvfFile::projection(&fields::bloch_projection(&base_grid(a.size, 2)?, a.degree)?),
        GenKind::PaperExample => {
            let g = fields::example_grid(a.size)?;
            MvfFile::connection(&fields::paper_example_connection(&g)?, Some(TIME_AXIS))
        }
        GenKind::RandomUnitary => {
            let g = with_loop(base_grid(a.size, a.dim)?)?;
            let mut f = MvfFile::unitary(&fields::random_unitary(&g, window()?, a.seed, a.bandwidth)?);
            f.header.time_axis = time;
            f
        }
        GenKind::RandomProjection => {
            let g = with_loop(base_grid(a.size, a.dim)?)?;
            let mut f = MvfFile::projection(&fields::random_projection(&g, window()?, a.seed, a.bandwidth, a.rank)?);
            f.header.time_axis = time;
            f
        }
    };
    file.write(&a.out)
}

fn time_axis(file: &MvfFile, a: &ComputeArgs) -> Result<String> {
    a.axis
        .clone()
        .or_else(|| file.header.time_axis.clone())
        .ok_or_else(|| Error::InvalidInput("no time axis: pass --axis".into()))
}

fn degree_summary(f: &MixedForm) -> Value {
    let dim = f.grid().dim();
    let parts: Vec<Value> = f
        .parts()
        .map(|p| {
            let integral = if p.degree() == dim && p.matdim() == 1 { p.integrate().ok() } else { None };
            json!({
                "degree": p.degree(),
                "norm_inf": p.norm_inf(),
                "max_imag": p.max_imag(),
                "integral": integral.map(|z| [z.re, z.im]),
            })
        })
        .collect();
    json!(parts)
}

fn write_part(f: &MixedForm, a: &ComputeArgs) -> Result<()> {
    if let Some(out) = &a.out {
        let deg = match a.degree {
            Some(d) => d,
            None => *f.degrees().last().ok_or_else(|| Error::InvalidInput("empty result".into()))?,
        };
        MvfFile::new(MvfKind::Form, f.part_or_zero(deg), None, None).write(out)?;
    }
    Ok(())
}

fn projection_loop(file: &MvfFile, a: &ComputeArgs) -> Result<ConnectionLoop> {
    match file.header.kind {
        MvfKind::Projection => {
            ConnectionLoop::from_projections(&PathField::new(file.to_projection()?, &time_axis(file, a)?)?)
        }
        MvfKind::Connection => ConnectionLoop::from_connection(&file.to_connection()?, &time_axis(file, a)?),
        k => Err(Error::InvalidInput(format!("{k:?} files do not describe a loop"))),
    }
}

pub fn compute(a: &ComputeArgs) -> Result<bool> {
    let file = MvfFile::read(&a.input)?;
    let summary = match a.what {
        What::Chern => {
            let ch = match file.header.kind {
                MvfKind::Unitary => chern::odd_chern(&file.to_unitary()?, a.max_deg)?,
                MvfKind::Projection => chern::even_chern(&file.to_projection()?, a.max_deg)?,
                MvfKind::Connection => chern::connection_chern(&file.to_connection()?, a.max_deg)?,
                MvfKind::Form => return Err(Error::InvalidInput("chern needs a field, not a form".into())),
            };
            write_part(&ch, a)?;
            json!({ "what": "chern", "kind": file.header.kind, "parts": degree_summary(&ch) })
        }
        What::Cs => {
            let axis = time_axis(&file, a)?;
            let cs = match file.header.kind {
                MvfKind::Unitary => chern::odd_cs_streamed(&PathField::new(file.to_unitary()?, &axis)?)?,
                MvfKind::Projection => chern::even_cs(&PathField::new(file.to_projection()?, &axis)?)?.fiber,
                k => {
                    return Err(Error::InvalidInput(format!("cs needs a path of unitaries or projections, got {k:?}")))
                }
            };
            write_part(&cs, a)?;
            json!({ "what": "cs", "axis": axis, "parts": degree_summary(&cs) })
        }
        What::Eta => {
            let lp = projection_loop(&file, a)?;
            let r = bh::deta_loop(&lp, EtaOptions { max_deg: a.max_deg, ..Default::default() })?;
            write_part(&r.eta.eta, a)?;
            json!({
                "what": "eta",
                "anchor": "dη = ∫_{S¹}Ch − Ch(h_*)",
                "deta_residual": r.residual,
                "fiber_drift": r.eta.fiber_drift,
                "eta": degree_summary(&r.eta.eta),
            })
        }
        What::Holonomy => {
            let lp = projection_loop(&file, a)?;
            let r = bh::eta_loop(&lp, EtaOptions { max_deg: Some(0), transport: TransportOptions::default() })?;
            if let Some(out) = &a.out {
                MvfFile::unitary(&r.holonomy).write(out)?;
            }
            json!({
                "what": "holonomy",
                "fiber_drift": r.fiber_drift,
                "unitarity": r.holonomy.unitarity_residual(),
            })
        }
        What::Periods => {
            if file.header.kind != MvfKind::Form {
                return Err(Error::InvalidInput("periods need a form file".into()));
            }
            let ex = file.form.is_exact_on_torus(1e-8)?;
            json!({ "what": "periods", "closed_residual": ex.closed_residual, "exact": ex.exact, "periods": ex.periods })
        }
    };
    emit(&summary, a.json.as_deref())?;
    Ok(true)
}

fn emit(v: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Field invariants as report checks named `field/<invariant>`.
fn field_checks(path: &Path) -> Result<Vec<Check>> {
    let file = MvfFile::read(path)?;
    // Reading through the typed constructors would reject a corrupted field
    // before its invariants can be reported, so validate the raw values.
    let report = match file.header.kind {
        MvfKind::Unitary => {
            fields::validate_unitary(&fields::UnitaryField { window: window_of(&file)?, values: file.form.clone() })
        }
        MvfKind::Projection => fields::validate_projection(&fields::ProjectionField {
            window: window_of(&file)?,
            values: file.form.clone(),
        }),
        MvfKind::Connection => fields::validate_connection(&fields::ConnectionField {
            form: file.form.clone(),
            subbundle: None,
            gluing: None,
        }),
        MvfKind::Form => return Ok(Vec::new()),
    };
    Ok(report
        .checks
        .into_iter()
        .map(|c| Check::new(&format!("field/{}", c.name), "plumbing", c.residual, c.tolerance, 0.0))
        .collect())
}

fn window_of(file: &MvfFile) -> Result<Window> {
    match file.header.window {
        Some(w) => Ok(w),
        None => Window::new(0, file.header.matdim as i64),
    }
}

pub fn verify(a: &VerifyArgs) -> Result<bool> {
    let cfg = SuiteConfig { size: a.size, seed: a.seed, max_deg: a.max_deg, tol: a.tol };
    let mut report = if a.suite == "all" {
        suites::run_all(cfg)?
    } else {
        let s = Suite::from_name(&a.suite).ok_or_else(|| Error::InvalidInput(format!("unknown suite {}", a.suite)))?;
        suites::run(s, cfg)?
    };
    if let Some(f) = &a.field {
        let mut checks = report.checks.clone();
        checks.extend(field_checks(f)?);
        report = Report::new(&report.suite, checks, report.environment.clone());
    }
    for line in report.lines() {
        println!("{line}");
    }
    for c in report.failures() {
        eprintln!("failed: {}", c.name);
    }
    if let Some(p) = &a.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(p, text + "\n")?;
    }
    Ok(report.pass)
}
