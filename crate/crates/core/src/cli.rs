//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE.json`: an object whose keys mirror
//! the subcommand's long flags (`x-grid` or `x_grid`), merged underneath the
//! flags actually given, so flags win.  Tables go to CSV with a header row and
//! floats printed with 17 significant digits; reports go to JSON.
//!
//! Exit codes: `0` success, `1` validation or usage error, `2` numerical
//! failure.

use crate::correlations::{green, BoundaryCondition};
use crate::coulomb_gas::{
    coulomb_correlator, drift_lambda, one_leg_partition, Charge, DoubleDivisor, ForceDivisor,
    ForcePoint, SleParams,
};
use crate::error::{Result, SleError};
use crate::loewner::{ensemble_map, run_sle, DriverConfig};
use crate::martingale_mc::{martingale_test_with, McConfig, ObservableKind, ObservableSpec};
use crate::screening::{
    degenerate_ode_residual, null_vector_residual, FdSteps, PartitionEvaluator, PartitionMethod,
    QuadratureControl,
};
use crate::selftest::run_selftest;
use crate::special_fn::{
    loewner_kernel_h, loewner_kernel_hi, loewner_kernel_htilde, theta, theta_deriv, theta_i,
    theta_tilde, weierstrass_zeta, zeta_pi, SeriesControl, ThetaKind,
};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(
    name = "annulus-sle",
    version,
    about = "Annulus SLE(κ,Λ) numerical laboratory"
)]
pub struct RunConfig {
    /// Progress messages on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// JSON file with flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a theta function, Loewner kernel or zeta function.
    Special(SpecialArgs),
    /// Green's function on a grid of second points.
    Green(GreenArgs),
    /// Coulomb gas correlator of a divisor, or one-leg partition function.
    Partition(PartitionArgs),
    /// SLE drift Λ on a grid of driver values.
    Drift(DriftArgs),
    /// Screening partition functions with optional PDE residuals.
    Screen(ScreenArgs),
    /// SLE path simulation.
    Sle {
        #[command(subcommand)]
        command: SleCommand,
    },
    /// Monte Carlo martingale test of a bosonic observable.
    Martingale(MartingaleArgs),
    /// Fast invariant suite with a PASS/FAIL table.
    Selftest,
}

/// `sle` subcommands.
#[derive(Debug, Subcommand)]
pub enum SleCommand {
    /// Simulate paths and write trace samples.
    Run(SleRunArgs),
}

/// Special functions available to `special`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialFunction {
    /// `Θ`
    Theta,
    /// `Θ_I`
    ThetaI,
    /// `Θ̃`
    ThetaTilde,
    /// `k`-th derivative of `Θ` (`--order`, `--kind`)
    ThetaDeriv,
    /// Loewner kernel `H`
    #[value(name = "H", alias = "h")]
    H,
    /// `H_I`
    #[value(name = "HI", alias = "hi")]
    Hi,
    /// `H̃`
    #[value(name = "Htilde", alias = "htilde")]
    Htilde,
    /// `ζ_r(π)` (ignores `--z`)
    ZetaPi,
    /// Weierstrass-type zeta `ζ_r(z)`
    Zeta,
}

/// Theta variants for `--kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// `Θ`
    Plain,
    /// `Θ_I`
    I,
    /// `Θ̃`
    Tilde,
}

/// Arguments of `special`.
#[derive(Debug, Args)]
pub struct SpecialArgs {
    /// Function to evaluate.
    pub function: SpecialFunction,
    /// Modulus.
    #[arg(long)]
    pub r: f64,
    /// Argument, e.g. `1.5`, `0.3+0.2i`, `-1-0.5i`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub z: String,
    /// Derivative order for `theta-deriv`.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Theta variant for `theta-deriv`.
    #[arg(long, value_enum, default_value_t = KindArg::Plain)]
    pub kind: KindArg,
}

/// Arguments of `green`.
#[derive(Debug, Args)]
pub struct GreenArgs {
    /// Boundary condition (`er` or `dirichlet`).
    #[arg(long, default_value = "er")]
    pub bc: BoundaryCondition,
    /// Modulus.
    #[arg(long)]
    pub r: f64,
    /// Fixed first point.
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: String,
    /// Grid of real parts `lo:hi:n`.
    #[arg(
        long,
        default_value = "0:6.283185307179586:32",
        allow_hyphen_values = true
    )]
    pub re_grid: String,
    /// Grid of imaginary parts `lo:hi:n`.
    #[arg(long, allow_hyphen_values = true)]
    pub im_grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Arguments of `partition`.
#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Boundary condition.
    #[arg(long, default_value = "er")]
    pub bc: BoundaryCondition,
    /// Modulus.
    #[arg(long)]
    pub r: f64,
    /// SLE parameter.
    #[arg(long)]
    pub kappa: f64,
    /// Divisor JSON file `{"points":[{"re","im","sigma","sigma_star"}]}`.
    #[arg(long, conflicts_with_all = ["p", "force"])]
    pub divisor: Option<PathBuf>,
    /// Marked point for the one-leg partition function.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Force points `q:beta[:inner][,...]`.
    #[arg(long, allow_hyphen_values = true)]
    pub force: Option<String>,
}

/// Arguments of `drift`.
#[derive(Debug, Args)]
pub struct DriftArgs {
    /// Boundary condition.
    #[arg(long, default_value = "er")]
    pub bc: BoundaryCondition,
    /// Modulus.
    #[arg(long)]
    pub r: f64,
    /// SLE parameter.
    #[arg(long)]
    pub kappa: f64,
    /// Force points `q:beta[:inner][,...]`.
    #[arg(long, allow_hyphen_values = true)]
    pub force: String,
    /// Grid of driver values `lo:hi:n`.
    #[arg(long, default_value = "0:0:1", allow_hyphen_values = true)]
    pub xi_grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Arguments of `screen`.
#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// SLE parameter.
    #[arg(long)]
    pub kappa: f64,
    /// Boundary condition.
    #[arg(long, default_value = "er")]
    pub bc: BoundaryCondition,
    /// Modulus.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Grid of separations `lo:hi:n`.
    #[arg(long, default_value = "0.3:5.9:40")]
    pub x_grid: String,
    /// Evaluation method: euler, residue, closed or hyp.
    #[arg(long, default_value = "closed")]
    pub method: PartitionMethod,
    /// Also compute the null-vector residual (degenerate ODE for `hyp`).
    #[arg(long)]
    pub check_pde: bool,
    /// Finite-difference step in `x`.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Finite-difference step in `r`.
    #[arg(long)]
    pub dr: Option<f64>,
    /// Relative tolerance of the Euler quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Arguments of `sle run`.
#[derive(Debug, Args)]
pub struct SleRunArgs {
    /// SLE parameter.
    #[arg(long)]
    pub kappa: f64,
    /// Initial modulus.
    #[arg(long)]
    pub r0: f64,
    /// Marked point.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p: f64,
    /// Force points `q:beta[:inner][,...]`.
    #[arg(long, allow_hyphen_values = true)]
    pub force: String,
    /// Boundary condition.
    #[arg(long, default_value = "dirichlet")]
    pub bc: BoundaryCondition,
    /// Horizon.
    #[arg(long = "T", alias = "t-end")]
    pub t_end: f64,
    /// Time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Number of paths.
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    /// Seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Steps between trace samples.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Height above the driver at which the reverse flow starts.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Arguments of `martingale`.
#[derive(Debug, Args)]
pub struct MartingaleArgs {
    /// Observable: one or two points.
    #[arg(long, value_enum, default_value_t = KindObs::One)]
    pub kind: KindObs,
    /// Boundary condition.
    #[arg(long, default_value = "dirichlet")]
    pub bc: BoundaryCondition,
    /// Initial modulus.
    #[arg(long, default_value_t = 2.0)]
    pub r0: f64,
    /// Marked point.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p: f64,
    /// Force points `q:beta[:inner][,...]`; default one point at `p + π` with `β = −a`.
    #[arg(long, allow_hyphen_values = true)]
    pub force: Option<String>,
    /// Evaluation points separated by `;` (default `π + i r0/2`).
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Number of paths.
    #[arg(long, default_value_t = 5000)]
    pub paths: usize,
    /// Horizon.
    #[arg(long = "T", alias = "t-end", default_value_t = 0.1)]
    pub t_end: f64,
    /// Time step.
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    /// Seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Constant added to the drift (negative control).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub drift_offset: f64,
    /// Write the JSON report here (default: stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Observable kind flag values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindObs {
    /// One-point observable.
    One,
    /// Two-point observable.
    Two,
}

/// Output destination flags shared by table-producing commands.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// CSV output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a plotting script for the CSV (requires `--out`).
    #[arg(long)]
    pub plot_script: Option<PathBuf>,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i` or `a,b`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || SleError::InvalidInput(format!("cannot parse complex number '{s}'"));
    if let Some((a, b)) = t.split_once(',') {
        return Ok(Complex64::new(
            a.parse().map_err(|_| bad())?,
            b.parse().map_err(|_| bad())?,
        ));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    // Split at the last sign that is not the leading one nor part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(
            body[..k].parse().map_err(|_| bad())?,
            imag(&body[k..])?,
        )),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// Parses an inclusive grid `lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || SleError::InvalidInput(format!("grid '{s}' must be lo:hi:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect())
}

/// Parses force points `q:beta[:inner][,...]`; inner points sit at `Im = r`.
pub fn parse_force(s: &str, seed_charge: f64, r: f64) -> Result<ForceDivisor> {
    let mut points = vec![];
    for item in s.split(',').filter(|x| !x.trim().is_empty()) {
        let f: Vec<&str> = item.trim().split(':').collect();
        let bad = || SleError::InvalidInput(format!("force point '{item}' must be q:beta[:inner]"));
        if f.len() < 2 || f.len() > 3 {
            return Err(bad());
        }
        let q: f64 = f[0].parse().map_err(|_| bad())?;
        let beta: f64 = f[1].parse().map_err(|_| bad())?;
        let im = match f.get(2) {
            None | Some(&"outer") => 0.0,
            Some(&"inner") => r,
            Some(_) => return Err(bad()),
        };
        points.push(ForcePoint {
            q: Complex64::new(q, im),
            beta,
        });
    }
    ForceDivisor::new(seed_charge, points)
}

#[derive(Deserialize)]
struct DivisorFile {
    points: Vec<DivisorEntry>,
}

#[derive(Deserialize)]
struct DivisorEntry {
    re: f64,
    im: f64,
    sigma: f64,
    sigma_star: f64,
}

fn write_csv(
    path: Option<&Path>,
    out: &mut dyn Write,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| SleError::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()?;
    }
    match path {
        Some(p) => std::fs::write(p, &buf)?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}

fn write_plot_script(output: &OutputArgs, x: &str, ys: &[&str], title: &str) -> Result<()> {
    let Some(script) = &output.plot_script else {
        return Ok(());
    };
    let Some(csv_path) = &output.out else {
        return Err(SleError::InvalidInput(
            "--plot-script needs --out so the script can reference the CSV".into(),
        ));
    };
    let ys_list = ys
        .iter()
        .map(|y| format!("{y:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    let text = format!(
        "# Plots the columns of {csv:?}.\n\
         import csv\n\
         import matplotlib.pyplot as plt\n\n\
         with open({csv:?}, newline='') as fh:\n    rows = list(csv.DictReader(fh))\n\
         xs = [float(r[{x:?}]) for r in rows]\n\
         for col in [{ys_list}]:\n    \
         vals = [float(r[col]) if r[col] else float('nan') for r in rows]\n    \
         plt.plot(xs, vals, '.-', label=col)\n\
         plt.xlabel({x:?})\nplt.title({title:?})\nplt.legend()\nplt.show()\n",
        csv = csv_path.display().to_string(),
    );
    std::fs::write(script, text)?;
    Ok(())
}

/// Inserts `--key value` pairs from a JSON config object right after the
/// subcommand name(s), so later (command-line) occurrences override them.
fn merge_config(mut argv: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut k = 1;
    while k < argv.len() {
        if argv[k] == "--config" {
            if k + 1 >= argv.len() {
                return Err(SleError::InvalidInput("--config needs a file".into()));
            }
            config = Some(argv[k + 1].clone());
            argv.drain(k..k + 2);
        } else if let Some(p) = argv[k].strip_prefix("--config=") {
            config = Some(p.to_string());
            argv.remove(k);
        } else {
            k += 1;
        }
    }
    let Some(path) = config else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| SleError::InvalidInput(format!("config {path}: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| SleError::InvalidInput(format!("config {path} must be a JSON object")))?;
    let mut extra = vec![];
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        let flag = if key == "t" || key == "T" {
            "--T".to_string()
        } else {
            flag
        };
        match v {
            serde_json::Value::Bool(true) => extra.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => extra.extend([flag, s.clone()]),
            serde_json::Value::Number(n) => extra.extend([flag, n.to_string()]),
            serde_json::Value::Array(items) => {
                let joined = items
                    .iter()
                    .map(|i| match i {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(",");
                extra.extend([flag, joined]);
            }
            serde_json::Value::Object(_) => {
                return Err(SleError::InvalidInput(format!(
                    "config key '{key}' must not be an object"
                )))
            }
        }
    }
    let mut pos = 1;
    while pos < argv.len() && argv[pos].starts_with('-') {
        pos += 1;
    }
    if pos < argv.len() {
        pos += if argv[pos] == "sle" && pos + 1 < argv.len() {
            2
        } else {
            1
        };
    }
    argv.splice(pos..pos, extra);
    Ok(argv)
}

fn command() -> clap::Command {
    fn relax(c: clap::Command) -> clap::Command {
        c.args_override_self(true).mut_subcommands(relax)
    }
    relax(RunConfig::command())
}

/// Runs the CLI with the given arguments (including the program name),
/// writing results to `out` and diagnostics to `err`; returns the exit code.
pub fn dispatch_with_io<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let matches = match command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let cfg = match RunConfig::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return 1;
        }
    };
    match run(&cfg, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

/// Runs the CLI on the process's stdout and stderr.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let ctl = SeriesControl::default();
    let ctl = &ctl;
    match &cfg.command {
        Command::Special(a) => {
            let z = parse_complex(&a.z)?;
            let kind = match a.kind {
                KindArg::Plain => ThetaKind::Plain,
                KindArg::I => ThetaKind::I,
                KindArg::Tilde => ThetaKind::Tilde,
            };
            let v = match a.function {
                SpecialFunction::Theta => theta(a.r, z, ctl)?,
                SpecialFunction::ThetaI => theta_i(a.r, z, ctl)?,
                SpecialFunction::ThetaTilde => theta_tilde(a.r, z, ctl)?,
                SpecialFunction::ThetaDeriv => theta_deriv(a.r, z, a.order, kind, ctl)?,
                SpecialFunction::H => loewner_kernel_h(a.r, z, ctl)?,
                SpecialFunction::Hi => loewner_kernel_hi(a.r, z, ctl)?,
                SpecialFunction::Htilde => loewner_kernel_htilde(a.r, z, ctl)?,
                SpecialFunction::ZetaPi => Complex64::new(zeta_pi(a.r, ctl)?, 0.0),
                SpecialFunction::Zeta => weierstrass_zeta(a.r, z, ctl)?,
            };
            write_csv(None, out, &["re", "im"], &[vec![fmt_f(v.re), fmt_f(v.im)]])?;
        }
        Command::Green(a) => {
            let zeta = parse_complex(&a.zeta)?;
            let mut rows = vec![];
            for y in parse_grid(&a.im_grid)? {
                for x in parse_grid(&a.re_grid)? {
                    let g = green(a.bc, a.r, zeta, Complex64::new(x, y), ctl);
                    let v = match g {
                        Ok(v) => fmt_f(v),
                        Err(SleError::CoincidentPoints(_)) => String::new(),
                        Err(e) => return Err(e),
                    };
                    rows.push(vec![fmt_f(x), fmt_f(y), v]);
                }
            }
            write_csv(a.output.out.as_deref(), out, &["re", "im", "value"], &rows)?;
            write_plot_script(&a.output, "re", &["value"], "Green's function")?;
        }
        Command::Partition(a) => {
            let params = SleParams::new(a.kappa)?;
            if let Some(path) = &a.divisor {
                let text = std::fs::read_to_string(path)?;
                let file: DivisorFile = serde_json::from_str(&text)
                    .map_err(|e| SleError::InvalidInput(format!("divisor file: {e}")))?;
                let dd = DoubleDivisor::new(
                    file.points
                        .into_iter()
                        .map(|e| Charge {
                            point: Complex64::new(e.re, e.im),
                            sigma: e.sigma,
                            sigma_star: e.sigma_star,
                        })
                        .collect(),
                )?;
                let v = coulomb_correlator(a.bc, a.r, &dd, ctl)?;
                write_csv(None, out, &["re", "im"], &[vec![fmt_f(v.re), fmt_f(v.im)]])?;
            } else {
                let (Some(p), Some(force)) = (a.p, &a.force) else {
                    return Err(SleError::InvalidInput(
                        "partition needs --divisor FILE or both --p and --force".into(),
                    ));
                };
                let force = parse_force(force, params.a, a.r)?;
                let v = one_leg_partition(a.bc, a.r, p, &force, ctl)?;
                write_csv(None, out, &["value"], &[vec![fmt_f(v)]])?;
            }
        }
        Command::Drift(a) => {
            let params = SleParams::new(a.kappa)?;
            let force = parse_force(&a.force, params.a, a.r)?;
            let mut rows = vec![];
            for xi in parse_grid(&a.xi_grid)? {
                let l = drift_lambda(a.bc, a.r, xi, &force, &params, ctl)?;
                rows.push(vec![fmt_f(xi), fmt_f(l)]);
            }
            write_csv(a.output.out.as_deref(), out, &["xi", "lambda"], &rows)?;
            write_plot_script(&a.output, "xi", &["lambda"], "Drift")?;
        }
        Command::Screen(a) => {
            let quad = QuadratureControl {
                rel_tol: a.rel_tol,
                ..Default::default()
            };
            let eval = PartitionEvaluator::new(a.method, a.kappa, a.bc)?.with_quadrature(quad);
            let default_step = if a.method == PartitionMethod::EulerIntegral {
                1e-2
            } else {
                1e-4
            };
            let fd = FdSteps {
                dx: a.dx.unwrap_or(default_step),
                dr: a.dr.unwrap_or(default_step),
            };
            let xs = parse_grid(&a.x_grid)?;
            let mut rows = vec![];
            for (k, &x) in xs.iter().enumerate() {
                if cfg.verbose > 0 {
                    let _ = writeln!(err, "screen: x {} of {}", k + 1, xs.len());
                }
                let z = eval.eval(a.r, x, ctl)?;
                let res = if !a.check_pde {
                    String::new()
                } else if a.method == PartitionMethod::HypergeometricLimit {
                    let dx = a.dx.unwrap_or(1e-3);
                    fmt_f(degenerate_ode_residual(
                        |x| eval.eval(a.r, x, ctl),
                        x,
                        a.kappa,
                        dx,
                    )?)
                } else {
                    fmt_f(null_vector_residual(
                        |r, x| eval.eval(r, x, ctl),
                        a.bc,
                        a.r,
                        x,
                        a.kappa,
                        &fd,
                        ctl,
                    )?)
                };
                rows.push(vec![fmt_f(x), fmt_f(z), res]);
            }
            write_csv(
                a.output.out.as_deref(),
                out,
                &["x", "Z", "pde_residual"],
                &rows,
            )?;
            write_plot_script(&a.output, "x", &["Z"], "Partition function")?;
        }
        Command::Sle {
            command: SleCommand::Run(a),
        } => {
            let params = SleParams::new(a.kappa)?;
            let force = parse_force(&a.force, params.a, a.r0)?;
            let base = DriverConfig {
                kappa: a.kappa,
                dt: a.dt,
                rng_seed: a.seed,
                ..Default::default()
            };
            base.validate()?;
            let runs = ensemble_map(a.paths, |i| {
                let cfg = DriverConfig {
                    stream: i,
                    ..base.clone()
                };
                run_sle(
                    a.bc, a.r0, a.kappa, a.p, &force, a.t_end, &cfg, a.stride, a.eps,
                )
            });
            let mut rows = vec![];
            for (i, run) in runs.into_iter().enumerate() {
                let run = run?;
                if let Some(stop) = &run.stop {
                    let _ = writeln!(err, "path {i} stopped early: {stop}");
                }
                for k in 0..run.trace.times.len() {
                    rows.push(vec![
                        i.to_string(),
                        fmt_f(run.trace.times[k]),
                        fmt_f(run.trace.xi[k]),
                        fmt_f(run.trace.gamma[k].re),
                        fmt_f(run.trace.gamma[k].im),
                    ]);
                }
            }
            write_csv(
                a.output.out.as_deref(),
                out,
                &["path_id", "t", "xi", "re_gamma", "im_gamma"],
                &rows,
            )?;
            write_plot_script(&a.output, "re_gamma", &["im_gamma"], "SLE trace samples")?;
        }
        Command::Martingale(a) => {
            let params = SleParams::new(4.0)?;
            let force = match &a.force {
                Some(s) => parse_force(s, params.a, a.r0)?,
                None => {
                    ForceDivisor::one_leg(&params, Complex64::new(a.p + std::f64::consts::PI, 0.0))
                }
            };
            let eval_points = match &a.z {
                Some(s) => s
                    .split(';')
                    .map(parse_complex)
                    .collect::<Result<Vec<_>>>()?,
                None => {
                    let z0 = Complex64::new(a.p + std::f64::consts::PI, a.r0 / 2.0);
                    match a.kind {
                        KindObs::One => vec![z0],
                        KindObs::Two => vec![z0 - 0.8, z0 + 0.8],
                    }
                }
            };
            let spec = ObservableSpec {
                kind: match a.kind {
                    KindObs::One => ObservableKind::OnePointBoson,
                    KindObs::Two => ObservableKind::TwoPointBoson,
                },
                bc: a.bc,
                eval_points,
                params,
                force,
                p: a.p,
                r0: a.r0,
            };
            let mc = McConfig {
                n_paths: a.paths,
                t_end: a.t_end,
                dt: a.dt,
                seed: a.seed,
                drift_offset: a.drift_offset,
                ..Default::default()
            };
            let report = martingale_test_with(&spec, &mc)?;
            let json =
                serde_json::to_string_pretty(&report).map_err(|e| SleError::Io(e.to_string()))?;
            match &a.json {
                Some(p) => std::fs::write(p, json + "\n")?,
                None => writeln!(out, "{json}")?,
            }
            if let Some(p) = &a.csv {
                let rows: Vec<Vec<String>> = (0..report.times.len())
                    .map(|k| {
                        vec![
                            fmt_f(report.times[k]),
                            fmt_f(report.mean_increment[k]),
                            fmt_f(report.std_error[k]),
                            fmt_f(report.z_scores[k]),
                        ]
                    })
                    .collect();
                write_csv(
                    Some(p),
                    out,
                    &["t", "mean_increment", "std_error", "z_score"],
                    &rows,
                )?;
            }
            let _ = writeln!(
                err,
                "martingale test: {}",
                if report.pass { "PASS" } else { "FAIL" }
            );
        }
        Command::Selftest => {
            let checks = run_selftest();
            let mut all = true;
            for c in &checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                all &= c.passed();
                match &c.failure {
                    None => writeln!(
                        out,
                        "{verdict}  {:<45} error {:.3e} (tol {:.0e})",
                        c.name, c.error, c.tolerance
                    )?,
                    Some(f) => writeln!(out, "{verdict}  {:<45} {f}", c.name)?,
                }
            }
            return Ok(if all { 0 } else { 2 });
        }
    }
    Ok(0)
}
