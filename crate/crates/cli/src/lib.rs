//! `fal` command-line front end: derivative curves, descent runs, rate
//! comparisons and the claims report.

pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fal_core::claims::{run_claims, ClaimResult, ClaimsOptions};
use fal_core::convergence::{compare_rates, rate_table, ConvergenceReport, SteadyStateCriterion};
use fal_core::energy::EnergyNorm;
use fal_core::estimate::RateConfig;
use fal_core::exec::Execution;
use fal_core::fal::{run_fal, FalParams, Guards, Termination, DEFAULT_MAX_ITERS};
use fal_core::fractional::FractionalOrder;
use fal_core::presets::{self, Preset, RatePreset};
use fal_core::ComplexScalar;
use serde::{Deserialize, Serialize};

use output::{emit, json, num, sidecar_path, Csv, Sink};

pub const DERIVATIVE_COLUMNS: [&str; 4] = ["s", "d_re", "d_im", "singular_flag"];
pub const RUN_COLUMNS: [&str; 4] = ["k", "s_re", "s_im", "abs_err"];
pub const COMPARE_COLUMNS: [&str; 5] = ["k", "fal_re", "eq21", "eq21star", "baseline"];
pub const CLAIMS_COLUMNS: [&str; 2] = ["id", "status"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0} claim(s) not reproducible")]
    Regression(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Regression(_) => 4,
        }
    }
}

impl From<fal_core::Error> for CliError {
    fn from(e: fal_core::Error) -> Self {
        use fal_core::Error as E;
        match e {
            E::Bracket(_) | E::SingularInput(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fal",
    version,
    about = "Fractional steepest-descent audit toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the fractional gradient of the energy over a grid.
    #[command(allow_negative_numbers = true)]
    Derivative(Common),
    /// Iterate the fractional descent from one start.
    #[command(allow_negative_numbers = true)]
    Run(Common),
    /// Compare the descent against both closed-form estimates and the integer baseline.
    #[command(allow_negative_numbers = true)]
    Compare(Common),
    /// Re-derive every reference finding and report its status.
    #[command(allow_negative_numbers = true)]
    Claims(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Grid `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("domain `{s}` is not lo:hi:n"));
        };
        let lo: f64 = lo
            .parse()
            .map_err(|_| format!("bad domain lower bound `{lo}`"))?;
        let hi: f64 = hi
            .parse()
            .map_err(|_| format!("bad domain upper bound `{hi}`"))?;
        let n: usize = n.parse().map_err(|_| format!("bad domain size `{n}`"))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("domain needs finite lo < hi, got {lo}:{hi}"));
        }
        if n < 2 {
            return Err(format!("domain needs at least 2 points, got {n}"));
        }
        Ok(Self { lo, hi, n })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Named parameter bundle: fig1a, fig1b, fig2a, fig2b.
    #[arg(long)]
    pub preset: Option<String>,
    /// Fractional order ν.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub e_min: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub s_star: Option<f64>,
    #[arg(long)]
    pub s0: Option<f64>,
    /// Step size.
    #[arg(long, conflicts_with = "chi")]
    pub mu: Option<f64>,
    /// Rate constant; the step size is derived from it.
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// first-passage:<tau> or plateau:<delta>.
    #[arg(long)]
    pub criterion: Option<SteadyStateCriterion>,
    /// Grid lo:hi:n.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<Domain>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fal: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Derivative(c) => cmd_derivative(c),
        Command::Run(c) => cmd_run(c),
        Command::Compare(c) => cmd_compare(c),
        Command::Claims(c) => cmd_claims(c),
    }
}

fn order(nu: f64) -> Result<FractionalOrder, CliError> {
    Ok(FractionalOrder::new(nu)?)
}

fn descent_order(nu: f64) -> Result<FractionalOrder, CliError> {
    let o = order(nu)?;
    if !o.fal_valid() {
        return Err(CliError::Config(format!(
            "--nu {nu}: the descent step excludes integer orders 1, 2, 3"
        )));
    }
    Ok(o)
}

fn preset(c: &Common) -> Result<Option<Preset>, CliError> {
    c.preset
        .as_deref()
        .map(presets::lookup)
        .transpose()
        .map_err(CliError::from)
}

fn rate_preset(c: &Common) -> Result<Option<RatePreset>, CliError> {
    match preset(c)? {
        None => Ok(None),
        Some(Preset::Rate(p)) => Ok(Some(p)),
        Some(Preset::Curve(_)) => Err(CliError::Config(format!(
            "preset `{}` is a derivative-curve preset",
            c.preset.as_deref().unwrap_or_default()
        ))),
    }
}

fn max_iters(c: &Common) -> Result<usize, CliError> {
    match c.max_iters.unwrap_or(DEFAULT_MAX_ITERS) {
        0 => Err(CliError::Config("--max-iters must be at least 1".into())),
        n => Ok(n),
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "--{name} must be finite, got {v}"
        )))
    }
}

/// Where the main document goes and where its JSON sidecar goes, if any.
fn sinks(c: &Common, format: Format, with_sidecar: bool) -> Result<(Sink, Option<Sink>), CliError> {
    match (&c.out, format) {
        (None, _) => Ok((Sink::Stdout, with_sidecar.then_some(Sink::Stderr))),
        (Some(p), Format::Json) => Ok((Sink::File(p.clone()), None)),
        (Some(p), Format::Csv) => {
            let side = if with_sidecar {
                Some(Sink::File(sidecar_path(p)?))
            } else {
                None
            };
            Ok((Sink::File(p.clone()), side))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativePoint {
    pub s: f64,
    pub d_re: Option<f64>,
    pub d_im: Option<f64>,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub nu: f64,
    pub e_min: f64,
    pub eta: f64,
    pub s_star: f64,
    pub points: Vec<DerivativePoint>,
}

pub fn cmd_derivative(c: &Common) -> Result<(), CliError> {
    let curve = match preset(c)? {
        None => None,
        Some(Preset::Curve(p)) => Some(p),
        Some(Preset::Rate(_)) => {
            return Err(CliError::Config(format!(
                "preset `{}` is a rate preset",
                c.preset.as_deref().unwrap_or_default()
            )))
        }
    };
    let base = curve
        .map(|p| p.energy)
        .unwrap_or_else(presets::derivative_energy);
    let nu =
        c.nu.or(curve.map(|p| p.nu.value()))
            .ok_or_else(|| CliError::Config("--nu is required".into()))?;
    let nu = order(nu)?;
    let energy = EnergyNorm::new(
        finite("e-min", c.e_min.unwrap_or(base.e_min))?,
        finite("eta", c.eta.unwrap_or(base.eta))?,
        finite("s-star", c.s_star.unwrap_or(base.s_star))?,
    )?;
    let (lo, hi, n) = presets::DERIVATIVE_DOMAIN;
    let d = c.domain.unwrap_or(Domain { lo, hi, n });
    let format = c.format.unwrap_or(Format::Csv);
    let (main, _) = sinks(c, format, false)?;

    let curve = energy.sample_gradient_curve(nu, d.lo, d.hi, d.n, Execution::default())?;
    let points: Vec<DerivativePoint> = curve
        .iter()
        .map(|p| DerivativePoint {
            s: p.s,
            d_re: p.value.map(|v| v.re),
            d_im: p.value.map(|v| v.im),
            singular: p.is_singular(),
        })
        .collect();
    let body = match format {
        Format::Csv => {
            let mut csv = Csv::new(&DERIVATIVE_COLUMNS);
            for p in &points {
                csv.row(&[
                    num(p.s),
                    num(p.d_re.unwrap_or(f64::NAN)),
                    num(p.d_im.unwrap_or(f64::NAN)),
                    u8::from(p.singular).to_string(),
                ]);
            }
            csv.into_string()
        }
        Format::Json => json(&DerivativeReport {
            nu: nu.value(),
            e_min: energy.e_min,
            eta: energy.eta,
            s_star: energy.s_star,
            points,
        })?,
    };
    emit(vec![(main, body)])
}

/// Summary written next to a descent trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub nu: f64,
    pub mu: f64,
    pub e_min: f64,
    pub eta: f64,
    pub s_star: f64,
    pub s0: f64,
    pub max_iters: usize,
    pub criterion: Option<SteadyStateCriterion>,
    pub termination: Termination,
    pub complexification_index: Option<usize>,
    pub steps: usize,
    pub final_re: f64,
    pub final_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub k: usize,
    pub s_re: f64,
    pub s_im: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub summary: RunSummary,
    pub rows: Vec<RunRow>,
}

/// Step size from `--mu`, or back-solved from `--chi` (falling back to the preset's χ).
fn step_size(
    c: &Common,
    rate: Option<&RatePreset>,
    eta: f64,
    nu: FractionalOrder,
    s_star: f64,
    s0: f64,
) -> Result<f64, CliError> {
    if let Some(mu) = c.mu {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(CliError::Config(format!("--mu must be positive, got {mu}")));
        }
        return Ok(mu);
    }
    let chi = c
        .chi
        .or(rate.map(|p| p.chi))
        .ok_or_else(|| CliError::Config("one of --mu or --chi is required".into()))?;
    Ok(RateConfig::from_chi(chi, eta, nu, s_star, s0)?.mu)
}

pub fn cmd_run(c: &Common) -> Result<(), CliError> {
    let p = preset(c)?;
    let rate = match p {
        Some(Preset::Rate(r)) => Some(r),
        _ => None,
    };
    let curve = match p {
        Some(Preset::Curve(cp)) => Some(cp),
        _ => None,
    };
    let nu =
        c.nu.or(rate.map(|r| r.config.nu.value()))
            .or(curve.map(|cp| cp.nu.value()))
            .ok_or_else(|| CliError::Config("--nu is required".into()))?;
    let nu = descent_order(nu)?;
    let base = presets::derivative_energy();
    let e_min = finite(
        "e-min",
        c.e_min
            .unwrap_or(if rate.is_some() { 0.0 } else { base.e_min }),
    )?;
    let eta = finite(
        "eta",
        c.eta.or(rate.map(|r| r.config.eta)).unwrap_or(base.eta),
    )?;
    let s_star = finite(
        "s-star",
        c.s_star
            .or(rate.map(|r| r.config.s_star))
            .unwrap_or(base.s_star),
    )?;
    let s0 =
        c.s0.or(rate.map(|r| r.config.s0))
            .ok_or_else(|| CliError::Config("--s0 is required".into()))?;
    let s0 = finite("s0", s0)?;
    if s0 == 0.0 {
        return Err(CliError::Config(
            "--s0 must be nonzero: the descent step is singular at 0".into(),
        ));
    }
    let energy = EnergyNorm::new(e_min, eta, s_star)?;
    let mu = step_size(c, rate.as_ref(), eta, nu, s_star, s0)?;
    let params = FalParams::new(mu, energy, nu)?;
    let max_iters = max_iters(c)?;
    let criterion = c.criterion;
    if let Some(cr) = criterion {
        cr.validate()?;
    }
    let format = c.format.unwrap_or(Format::Csv);
    let (main, side) = sinks(c, format, true)?;

    let guards = Guards::default();
    let mut complex_seen = false;
    let traj = run_fal(
        &params,
        ComplexScalar::new(s0, 0.0),
        max_iters,
        guards,
        |xs| {
            let z = xs[xs.len() - 1];
            complex_seen |= z.im.abs() > guards.imag_tol;
            match criterion {
                // Without a rule, stop only at an exact fixed point.
                None => z.im == 0.0 && z.re == s_star,
                Some(_) if complex_seen => false,
                Some(cr) => {
                    let prev = (xs.len() > 1).then(|| xs[xs.len() - 2].re - s_star);
                    cr.fires(prev, z.re - s_star)
                }
            }
        },
    )?;
    let last = traj.last();
    let summary = RunSummary {
        nu: nu.value(),
        mu,
        e_min,
        eta,
        s_star,
        s0,
        max_iters,
        criterion,
        termination: traj.termination,
        complexification_index: traj.complexification_index,
        steps: traj.steps(),
        final_re: last.re,
        final_im: last.im,
    };
    let rows: Vec<RunRow> = traj
        .iterates
        .iter()
        .enumerate()
        .map(|(k, z)| RunRow {
            k,
            s_re: z.re,
            s_im: z.im,
            abs_err: (z - s_star).norm(),
        })
        .collect();
    let mut docs = Vec::new();
    match format {
        Format::Csv => {
            let mut csv = Csv::new(&RUN_COLUMNS);
            for r in &rows {
                csv.row(&[r.k.to_string(), num(r.s_re), num(r.s_im), num(r.abs_err)]);
            }
            docs.push((main, csv.into_string()));
            if let Some(side) = side {
                docs.push((side, json(&summary)?));
            }
        }
        Format::Json => docs.push((
            main,
            json(&RunDocument {
                summary: summary.clone(),
                rows,
            })?,
        )),
    }
    emit(docs)?;
    if summary.termination == Termination::NumericalFailure {
        return Err(CliError::Numerical(format!(
            "descent failed after {} steps",
            summary.steps
        )));
    }
    Ok(())
}

fn rate_config(c: &Common) -> Result<(RateConfig, Option<RatePreset>), CliError> {
    let rate = rate_preset(c)?;
    let nu =
        c.nu.or(rate.map(|r| r.config.nu.value()))
            .ok_or_else(|| CliError::Config("--nu is required".into()))?;
    let nu = descent_order(nu)?;
    let eta = finite(
        "eta",
        c.eta
            .or(rate.map(|r| r.config.eta))
            .unwrap_or(presets::RATE_ETA),
    )?;
    let s_star = finite(
        "s-star",
        c.s_star
            .or(rate.map(|r| r.config.s_star))
            .unwrap_or(presets::RATE_S_STAR),
    )?;
    let s0 = finite(
        "s0",
        c.s0.or(rate.map(|r| r.config.s0))
            .unwrap_or(presets::RATE_S0),
    )?;
    if !(s_star > 0.0 && s0 > s_star) {
        return Err(CliError::Config(format!(
            "compare needs s0 > s_star > 0, got s0 = {s0}, s_star = {s_star}"
        )));
    }
    let mu = step_size(c, rate.as_ref(), eta, nu, s_star, s0)?;
    Ok((
        RateConfig {
            mu,
            eta,
            nu,
            s_star,
            s0,
        },
        rate,
    ))
}

pub fn cmd_compare(c: &Common) -> Result<(), CliError> {
    let (cfg, rate) = rate_config(c)?;
    let criterion =
        c.criterion
            .or(rate.map(|r| r.plateau))
            .unwrap_or(SteadyStateCriterion::FirstPassage {
                tau: presets::FIRST_PASSAGE_TAU,
            });
    criterion.validate()?;
    let max_iters = max_iters(c)?;
    let format = c.format.unwrap_or(Format::Csv);
    let (main, side) = sinks(c, format, true)?;

    let report: ConvergenceReport = compare_rates(&cfg, &criterion, max_iters)?;
    let mut docs = Vec::new();
    match format {
        Format::Csv => {
            let last = [
                report.fal_actual.steady_state_index,
                report.naive.steady_state_index,
                report.corrected.steady_state_index,
                report.baseline.steady_state_index,
            ]
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(max_iters)
            .min(max_iters);
            let t = rate_table(&cfg, last + 1)?;
            let at = |v: &[f64], k: usize| num(v.get(k).copied().unwrap_or(f64::NAN));
            let mut csv = Csv::new(&COMPARE_COLUMNS);
            for k in 0..=last {
                csv.row(&[
                    k.to_string(),
                    at(&t.fal_re, k),
                    at(&t.naive, k),
                    at(&t.corrected, k),
                    at(&t.baseline, k),
                ]);
            }
            docs.push((main, csv.into_string()));
            if let Some(side) = side {
                docs.push((side, json(&report)?));
            }
        }
        Format::Json => docs.push((main, json(&report)?)),
    }
    emit(docs)?;
    if report.fal_actual.termination == Termination::NumericalFailure {
        return Err(CliError::Numerical(
            "descent run ended in a numerical failure".into(),
        ));
    }
    Ok(())
}

pub fn cmd_claims(c: &Common) -> Result<(), CliError> {
    let format = c.format.unwrap_or(Format::Json);
    let max_iters = max_iters(c)?;
    let (main, _) = sinks(c, format, false)?;
    let results: Vec<ClaimResult> = run_claims(ClaimsOptions {
        max_iters,
        exec: Execution::default(),
    })?;
    let body = match format {
        Format::Json => json(&results)?,
        Format::Csv => {
            let mut csv = Csv::new(&CLAIMS_COLUMNS);
            for r in &results {
                let status = serde_json::to_value(r.status)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                csv.row(&[
                    r.id.clone(),
                    status.as_str().unwrap_or_default().to_string(),
                ]);
            }
            csv.into_string()
        }
    };
    emit(vec![(main, body)])?;
    let failed = results.iter().filter(|r| !r.status.is_ok()).count();
    if failed > 0 {
        return Err(CliError::Regression(failed));
    }
    Ok(())
}
