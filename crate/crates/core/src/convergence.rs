//! Steady-state detection and the head-to-head comparison of the descent
//! iteration against its two closed-form estimates and an integer-order
//! baseline.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyNorm;
use crate::error::{Error, Result};
use crate::estimate::{naive_estimate, CorrectedEstimator, RateConfig, DEFAULT_TOL};
use crate::exec::Execution;
use crate::fal::{run_fal, FalParams, Guards, Termination};
use crate::fractional::FractionalOrder;

/// Steps at which the indeterminate-ratio probe is sampled in reports.
pub const PROBE_KS: [usize; 6] = [0, 10, 50, 100, 200, 400];

/// Rule that declares a series to have reached its steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SteadyStateCriterion {
    /// First `k` with `|s_k − s*| ≤ tau`.
    FirstPassage { tau: f64 },
    /// First `k ≥ 1` with `|s_k − s_{k−1}| ≤ delta`.
    Plateau { delta: f64 },
}

impl SteadyStateCriterion {
    pub fn first_passage(tau: f64) -> Result<Self> {
        let c = Self::FirstPassage { tau };
        c.validate()?;
        Ok(c)
    }

    pub fn plateau(delta: f64) -> Result<Self> {
        let c = Self::Plateau { delta };
        c.validate()?;
        Ok(c)
    }

    pub fn threshold(&self) -> f64 {
        match *self {
            Self::FirstPassage { tau } => tau,
            Self::Plateau { delta } => delta,
        }
    }

    pub fn with_threshold(&self, t: f64) -> Self {
        match self {
            Self::FirstPassage { .. } => Self::FirstPassage { tau: t },
            Self::Plateau { .. } => Self::Plateau { delta: t },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.threshold();
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "criterion threshold must be positive, got {t}"
            )));
        }
        Ok(())
    }

    /// Streaming check on gaps `g = s − s*`: does the criterion fire at the
    /// current point, given the previous one?
    pub fn fires(&self, prev_gap: Option<f64>, gap: f64) -> bool {
        match *self {
            Self::FirstPassage { tau } => gap.abs() <= tau,
            Self::Plateau { delta } => prev_gap.is_some_and(|p| (gap - p).abs() <= delta),
        }
    }

    /// Detected index on a materialized series of values.
    pub fn index(&self, series: &[f64], s_star: f64) -> Option<usize> {
        match *self {
            Self::FirstPassage { tau } => first_passage_index(series, s_star, tau),
            Self::Plateau { delta } => plateau_index(series, delta),
        }
    }
}

impl fmt::Display for SteadyStateCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FirstPassage { tau } => write!(f, "first-passage:{tau:e}"),
            Self::Plateau { delta } => write!(f, "plateau:{delta:e}"),
        }
    }
}

impl FromStr for SteadyStateCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s.split_once(':').ok_or_else(|| {
            Error::InvalidConfig(format!("criterion `{s}` is not kind:threshold"))
        })?;
        let t: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad criterion threshold `{value}`")))?;
        match kind.trim() {
            "first-passage" => Self::first_passage(t),
            "plateau" => Self::plateau(t),
            other => Err(Error::InvalidConfig(format!(
                "unknown criterion kind `{other}`"
            ))),
        }
    }
}

/// Smallest `k` with `|series[k] − s_star| ≤ tau`.
pub fn first_passage_index(series: &[f64], s_star: f64, tau: f64) -> Option<usize> {
    series.iter().position(|v| (v - s_star).abs() <= tau)
}

/// Smallest `k ≥ 1` with `|series[k] − series[k−1]| ≤ delta`.
pub fn plateau_index(series: &[f64], delta: f64) -> Option<usize> {
    series
        .windows(2)
        .position(|w| (w[1] - w[0]).abs() <= delta)
        .map(|i| i + 1)
}

/// Integer-order steepest descent `s_{k+1} = s_k − 2μη (s_k − s*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub iterates: Vec<f64>,
    /// `s_k − s*`, propagated directly as `e_{k+1} = (1 − 2μη) e_k`.
    pub errors: Vec<f64>,
    /// Set when `|1 − 2μη| ≥ 1`, i.e. the error does not contract.
    pub diverged: bool,
}

pub fn baseline_descent(energy: &EnergyNorm, mu: f64, s0: f64, max_iters: usize) -> BaselineRun {
    let ratio = 1.0 - 2.0 * mu * energy.eta;
    let mut errors = Vec::with_capacity(max_iters + 1);
    let mut e = s0 - energy.s_star;
    errors.push(e);
    for _ in 0..max_iters {
        e *= ratio;
        if !e.is_finite() {
            break;
        }
        errors.push(e);
    }
    let iterates = errors
        .iter()
        .enumerate()
        .map(|(k, e)| if k == 0 { s0 } else { energy.s_star + e })
        .collect();
    BaselineRun {
        iterates,
        errors,
        diverged: ratio.abs() >= 1.0,
    }
}

/// Probe value `(s_k − s*) / exp(−χk)` along the implicit estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub k: usize,
    /// `None` when the ratio overflows f64.
    pub ratio: Option<f64>,
    pub log_ratio: f64,
}

pub fn indeterminate_ratio_probe(
    chi: f64,
    s_star: f64,
    s0: f64,
    ks: &[usize],
) -> Result<Vec<RatioSample>> {
    let est = CorrectedEstimator::new(chi, s_star, s0, DEFAULT_TOL)?;
    ks.iter()
        .map(|&k| {
            let p = est.at(k)?;
            let log_ratio = p.gap.ln() + chi * k as f64;
            let ratio = p.gap * (chi * k as f64).exp();
            Ok(RatioSample {
                k,
                ratio: ratio.is_finite().then_some(ratio),
                log_ratio,
            })
        })
        .collect()
}

/// Steady-state outcome of one closed-form or baseline series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub steady_state_index: Option<usize>,
    /// Value at the steady-state index, or at the last evaluated step.
    pub final_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
}

/// Outcome of the actual descent run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FalOutcome {
    /// Absent whenever the run complexified.
    pub steady_state_index: Option<usize>,
    pub final_value: f64,
    pub final_imag: f64,
    pub complexification_index: Option<usize>,
    pub termination: Termination,
    pub steps: usize,
}

/// Parameters echoed into a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub chi: f64,
    pub nu: f64,
    pub mu: f64,
    pub eta: f64,
    pub s_star: f64,
    pub s0: f64,
    pub criterion: SteadyStateCriterion,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ReportConfig,
    pub fal_actual: FalOutcome,
    #[serde(rename = "eq21")]
    pub naive: MethodOutcome,
    #[serde(rename = "eq21star")]
    pub corrected: MethodOutcome,
    pub baseline: MethodOutcome,
    pub ratio_probe: Vec<RatioSample>,
}

impl ConvergenceReport {
    /// `k(naive) < k(corrected) < k(actual)`. An actual run that never reaches
    /// a (real) steady state within the budget ranks last.
    pub fn ordering_holds(&self) -> bool {
        match (
            self.naive.steady_state_index,
            self.corrected.steady_state_index,
        ) {
            (Some(a), Some(b)) if a < b => match self.fal_actual.steady_state_index {
                Some(c) => b < c,
                None => true,
            },
            _ => false,
        }
    }
}

/// Feeds gaps `s_k − s*` for `k = 0..=max_iters` through the criterion.
fn detect<F>(
    criterion: &SteadyStateCriterion,
    s_star: f64,
    max_iters: usize,
    mut gap_at: F,
) -> Result<MethodOutcome>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut prev = None;
    let mut last = f64::NAN;
    for k in 0..=max_iters {
        let gap = gap_at(k)?;
        last = gap;
        if criterion.fires(prev, gap) {
            return Ok(MethodOutcome {
                steady_state_index: Some(k),
                final_value: s_star + gap,
                max_residual: None,
            });
        }
        prev = Some(gap);
    }
    Ok(MethodOutcome {
        steady_state_index: None,
        final_value: s_star + last,
        max_residual: None,
    })
}

fn check_rate_branch(cfg: &RateConfig) -> Result<f64> {
    let chi = cfg.chi()?;
    if !(cfg.s_star > 0.0 && cfg.s0 > cfg.s_star) {
        return Err(Error::InvalidConfig(format!(
            "rate comparison needs s0 > s_star > 0, got s0 = {}, s_star = {}",
            cfg.s0, cfg.s_star
        )));
    }
    Ok(chi)
}

/// Runs the descent iteration from `cfg.s0` until the criterion fires on the
/// real trajectory. Once an iterate acquires an imaginary part the criterion
/// is no longer consulted and no index is reported.
pub fn fal_outcome(
    cfg: &RateConfig,
    criterion: &SteadyStateCriterion,
    max_iters: usize,
    guards: Guards,
) -> Result<FalOutcome> {
    criterion.validate()?;
    let energy = EnergyNorm::new(0.0, cfg.eta, cfg.s_star)?;
    let params = FalParams::new(cfg.mu, energy, cfg.nu)?;
    let s_star = cfg.s_star;
    let mut complex_seen = false;
    let traj = run_fal(
        &params,
        Complex64::new(cfg.s0, 0.0),
        max_iters,
        guards,
        |xs| {
            let z = xs[xs.len() - 1];
            if z.im.abs() > guards.imag_tol {
                complex_seen = true;
            }
            if complex_seen {
                return false;
            }
            let prev = (xs.len() > 1).then(|| xs[xs.len() - 2].re - s_star);
            criterion.fires(prev, z.re - s_star)
        },
    )?;
    let last = traj.last();
    let steady =
        traj.termination == Termination::SteadyState && traj.complexification_index.is_none();
    Ok(FalOutcome {
        steady_state_index: steady.then(|| traj.steps()),
        final_value: last.re,
        final_imag: last.im,
        complexification_index: traj.complexification_index,
        termination: traj.termination,
        steps: traj.steps(),
    })
}

/// Applies one criterion to the actual descent, both closed-form estimates
/// and the integer-order baseline, and probes the indeterminate ratio.
pub fn compare_rates(
    cfg: &RateConfig,
    criterion: &SteadyStateCriterion,
    max_iters: usize,
) -> Result<ConvergenceReport> {
    let chi = check_rate_branch(cfg)?;
    criterion.validate()?;
    let s_star = cfg.s_star;

    let fal_actual = fal_outcome(cfg, criterion, max_iters, Guards::default())?;
    let naive = detect(
        criterion,
        s_star,
        max_iters,
        |k| Ok((-chi * k as f64).exp()),
    )?;

    let est = CorrectedEstimator::new(chi, s_star, cfg.s0, DEFAULT_TOL)?;
    let mut max_residual: f64 = 0.0;
    let mut corrected = detect(criterion, s_star, max_iters, |k| {
        let p = est.at(k)?;
        max_residual = max_residual.max(p.residual.abs());
        Ok(p.gap)
    })?;
    corrected.max_residual = Some(max_residual);

    let ratio = 1.0 - 2.0 * cfg.mu * cfg.eta;
    let mut e = cfg.s0 - s_star;
    let baseline = detect(criterion, s_star, max_iters, |k| {
        if k > 0 {
            e *= ratio;
        }
        Ok(e)
    })?;

    let ratio_probe = indeterminate_ratio_probe(chi, s_star, cfg.s0, &PROBE_KS)?;
    Ok(ConvergenceReport {
        config: ReportConfig {
            chi,
            nu: cfg.nu.value(),
            mu: cfg.mu,
            eta: cfg.eta,
            s_star,
            s0: cfg.s0,
            criterion: *criterion,
            max_iters,
        },
        fal_actual,
        naive,
        corrected,
        baseline,
        ratio_probe,
    })
}

/// Per-step values of the four compared series, `k = 0..rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub fal_re: Vec<f64>,
    pub naive: Vec<f64>,
    pub corrected: Vec<f64>,
    pub baseline: Vec<f64>,
}

/// Materializes all four series for plotting. The descent column stops
/// early if the run diverges.
pub fn rate_table(cfg: &RateConfig, rows: usize) -> Result<RateTable> {
    let chi = check_rate_branch(cfg)?;
    let energy = EnergyNorm::new(0.0, cfg.eta, cfg.s_star)?;
    let params = FalParams::new(cfg.mu, energy, cfg.nu)?;
    let steps = rows.saturating_sub(1).max(1);
    let traj = run_fal(
        &params,
        Complex64::new(cfg.s0, 0.0),
        steps,
        Guards::default(),
        |_| false,
    )?;
    let est = CorrectedEstimator::new(chi, cfg.s_star, cfg.s0, DEFAULT_TOL)?;
    let corrected = (0..rows)
        .map(|k| est.at(k).map(|p| p.value))
        .collect::<Result<Vec<_>>>()?;
    let mut fal_re = traj.real_parts();
    fal_re.truncate(rows);
    let mut baseline = baseline_descent(&energy, cfg.mu, cfg.s0, steps).iterates;
    baseline.truncate(rows);
    Ok(RateTable {
        fal_re,
        naive: (0..rows)
            .map(|k| naive_estimate(chi, cfg.s_star, k))
            .collect(),
        corrected,
        baseline,
    })
}

/// Runs [`compare_rates`] for every order in `nus` at a fixed rate constant,
/// back-solving the step size for each order.
#[allow(clippy::too_many_arguments)]
pub fn sweep_orders(
    chi: f64,
    eta: f64,
    s_star: f64,
    s0: f64,
    nus: &[f64],
    criterion: &SteadyStateCriterion,
    max_iters: usize,
    exec: Execution,
) -> Vec<Result<ConvergenceReport>> {
    exec.map(nus, |&nu| {
        let cfg = RateConfig::from_chi(chi, eta, FractionalOrder::new(nu)?, s_star, s0)?;
        compare_rates(&cfg, criterion, max_iters)
    })
}

/// One rate experiment whose descent count is to be matched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountTarget {
    pub chi: f64,
    pub criterion: SteadyStateCriterion,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub nu: f64,
    pub counts: Vec<Option<usize>>,
    /// Largest `|count/target − 1|` over the targets; infinite if any count is missing.
    pub worst_rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub rows: Vec<CalibrationRow>,
    pub best: Option<CalibrationRow>,
    pub rel_tol: f64,
    pub matched: bool,
}

/// Searches `nus` for an order whose descent counts match every target within
/// `rel_tol` simultaneously.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_order(
    targets: &[CountTarget],
    eta: f64,
    s_star: f64,
    s0: f64,
    nus: &[f64],
    rel_tol: f64,
    max_iters: usize,
    exec: Execution,
) -> Result<Calibration> {
    let rows = exec
        .map(nus, |&nu| -> Result<CalibrationRow> {
            let order = FractionalOrder::new(nu)?;
            let mut counts = Vec::with_capacity(targets.len());
            let mut worst: f64 = 0.0;
            for t in targets {
                let cfg = RateConfig::from_chi(t.chi, eta, order, s_star, s0)?;
                let idx = fal_outcome(&cfg, &t.criterion, max_iters, Guards::default())?
                    .steady_state_index;
                worst = worst.max(match idx {
                    Some(c) => (c as f64 / t.count as f64 - 1.0).abs(),
                    None => f64::INFINITY,
                });
                counts.push(idx);
            }
            Ok(CalibrationRow {
                nu,
                counts,
                worst_rel_dev: worst,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .filter(|r| r.worst_rel_dev.is_finite())
        .min_by(|a, b| a.worst_rel_dev.total_cmp(&b.worst_rel_dev))
        .cloned();
    let matched = best.as_ref().is_some_and(|b| b.worst_rel_dev <= rel_tol);
    Ok(Calibration {
        rows,
        best,
        rel_tol,
        matched,
    })
}

/// `lo, lo + step, …` up to `hi` inclusive, skipping integer orders.
pub fn order_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| ((lo + step * i as f64) * 1e9).round() / 1e9)
        .filter(|nu| FractionalOrder::new(*nu).is_ok_and(|o| o.fal_valid() && *nu > 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const S_STAR: f64 = 4.2856;
    const S0: f64 = 15.0;

    #[test]
    fn index_definitions() {
        let series = [S_STAR + 1.0, S_STAR + 0.5, S_STAR + 1e-4];
        assert_eq!(first_passage_index(&series, S_STAR, 1e-3), Some(2));
        assert_eq!(first_passage_index(&series, S_STAR, 1e-6), None);
        assert_eq!(plateau_index(&[3.0; 5], 1e-9), Some(1));
        assert_eq!(plateau_index(&[1.0], 1.0), None);
        assert_eq!(plateau_index(&[1.0, 2.0, 2.5, 2.6], 0.2), Some(3));
    }

    #[test]
    fn criterion_parsing() {
        let c: SteadyStateCriterion = "first-passage:7.2e-4".parse().unwrap();
        assert_eq!(c, SteadyStateCriterion::FirstPassage { tau: 7.2e-4 });
        let c: SteadyStateCriterion = "plateau:1e-4".parse().unwrap();
        assert_eq!(c, SteadyStateCriterion::Plateau { delta: 1e-4 });
        assert_eq!(c.to_string().parse::<SteadyStateCriterion>().unwrap(), c);
        for bad in [
            "plateau",
            "plateau:-1",
            "plateau:x",
            "other:1",
            "first-passage:0",
        ] {
            assert!(bad.parse::<SteadyStateCriterion>().is_err(), "{bad}");
        }
    }

    #[test]
    fn baseline_examples() {
        let e = EnergyNorm::new(10.0, 2.0, 5.0).unwrap();
        let run = baseline_descent(&e, 0.1, 5.0, 10);
        assert!(run.iterates.iter().all(|&s| s == 5.0));

        let run = baseline_descent(&e, 0.25, 15.0, 3);
        assert_eq!(run.iterates[1..], [5.0, 5.0, 5.0]);

        let run = baseline_descent(&e, 0.1, 15.0, 3);
        assert!((run.iterates[3] - 7.16).abs() < 1e-12);
        assert!(!run.diverged);

        assert!(baseline_descent(&e, 0.6, 15.0, 3).diverged);
    }

    #[test]
    fn probe_starts_at_initial_gap() {
        let p = indeterminate_ratio_probe(0.25, S_STAR, S0, &[0]).unwrap();
        assert!((p[0].ratio.unwrap() - (S0 - S_STAR)).abs() < 1e-12);
    }

    #[test]
    fn probe_increases() {
        let p = indeterminate_ratio_probe(0.25, S_STAR, S0, &[10, 100, 400]).unwrap();
        let r: Vec<f64> = p.iter().map(|s| s.ratio.unwrap()).collect();
        assert!(r[0] < r[1] && r[1] < r[2]);
        assert!(r[2] / r[0] > 10.0);
    }

    #[test]
    fn degenerate_start_settles_immediately() {
        let cfg = RateConfig::from_chi(
            0.25,
            2.0,
            FractionalOrder::new(0.3).unwrap(),
            S_STAR,
            S_STAR + 1e-9,
        )
        .unwrap();
        let crit = SteadyStateCriterion::first_passage(1e-3).unwrap();
        let r = compare_rates(&cfg, &crit, 1000).unwrap();
        assert_eq!(r.fal_actual.steady_state_index, Some(0));
        // s* + exp(−χk) ignores s0: it starts at s* + 1 and needs e^{−k/4} ≤ 1e-3
        assert_eq!(r.naive.steady_state_index, Some(28));
        assert_eq!(r.corrected.steady_state_index, Some(0));
        assert_eq!(r.baseline.steady_state_index, Some(0));
    }

    #[test]
    fn compare_rejects_wrong_branch() {
        let cfg = RateConfig::from_chi(0.25, 2.0, FractionalOrder::new(0.3).unwrap(), S_STAR, 2.0)
            .unwrap();
        let crit = SteadyStateCriterion::first_passage(1e-3).unwrap();
        assert!(compare_rates(&cfg, &crit, 100).is_err());
    }

    #[test]
    fn order_grid_skips_integers() {
        let g = order_grid(0.05, 1.95, 0.05);
        assert_eq!(g.len(), 38);
        assert!(!g.contains(&1.0));
        assert_eq!(g[0], 0.05);
        assert_eq!(*g.last().unwrap(), 1.95);
    }

    #[test]
    fn rate_table_shapes() {
        let cfg = RateConfig::from_chi(0.25, 2.0, FractionalOrder::new(0.3).unwrap(), S_STAR, S0)
            .unwrap();
        let t = rate_table(&cfg, 50).unwrap();
        assert_eq!(t.fal_re.len(), 50);
        assert_eq!(t.naive.len(), 50);
        assert_eq!(t.corrected.len(), 50);
        assert_eq!(t.baseline.len(), 50);
        assert_eq!(t.fal_re[0], S0);
        assert_eq!(t.corrected[0], S0);
    }
}
