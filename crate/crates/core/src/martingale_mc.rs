//! Monte Carlo check that the bosonic observables are martingales along
//! annulus SLE(κ, Λ).
//!
//! An observable is evaluated in the chart `w̃_t = g̃_t − ξ_t`: the marked
//! point goes to `0`, force points to `g̃_t(q_j) − ξ_t` and evaluation points
//! to `g̃_t(z) − ξ_t`, at modulus `r0 − t`.  For `κ = 4` (`b = 0`) the
//! observables are scalars, so no chart factor is needed.
//!
//! * one-point: `M_t = M(Z_t)` with `M` the inserted-field mean of
//!   [`insertion_one_point`];
//! * two-point: `N_t = M(Z¹_t)M(Z²_t) + 2G_{r_t}(Z¹_t, Z²_t)`, the two-point
//!   function of a Gaussian field with covariance `2G` and mean `M`.
//!
//! Paths that hit a swallowing event are frozen at their last value.

use crate::correlations::{green, BoundaryCondition};
use crate::coulomb_gas::{drift_lambda_at, insertion_one_point, ForceDivisor, SleParams};
use crate::error::{Result, SleError};
use crate::loewner::{advance, ensemble_map, DriverConfig, LoewnerState};
use crate::special_fn::SeriesControl;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Checkpoints as fractions of the horizon `T`.
pub const CHECKPOINT_FRACTIONS: [f64; 5] = [1.0 / 16.0, 1.0 / 8.0, 0.25, 0.5, 1.0];

/// Which observable to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// `M_t(z)`.
    OnePointBoson,
    /// `N_t(z₁, z₂)`.
    TwoPointBoson,
}

/// An observable together with the SLE it is run along.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    /// Observable type.
    pub kind: ObservableKind,
    /// Boundary condition.
    pub bc: BoundaryCondition,
    /// Interior evaluation points (one or two).
    pub eval_points: Vec<Complex64>,
    /// SLE parameters; `κ = 4` is required.
    pub params: SleParams,
    /// Seed charge and force points; also defines the drift `Λ`.
    pub force: ForceDivisor,
    /// Marked point (starting value of the driver).
    pub p: f64,
    /// Initial modulus.
    pub r0: f64,
}

impl ObservableSpec {
    /// Validates the configuration.
    pub fn validate(&self) -> Result<()> {
        if (self.params.kappa - 4.0).abs() > 1e-12 {
            return Err(SleError::InvalidInput(format!(
                "scalar bosonic observables require κ = 4 (got {})",
                self.params.kappa
            )));
        }
        let need = match self.kind {
            ObservableKind::OnePointBoson => 1,
            ObservableKind::TwoPointBoson => 2,
        };
        if self.eval_points.len() != need {
            return Err(SleError::InvalidInput(format!(
                "{:?} needs {need} evaluation point(s), got {}",
                self.kind,
                self.eval_points.len()
            )));
        }
        for z in &self.eval_points {
            if !(z.im > 0.0 && z.im < self.r0) {
                return Err(SleError::OutOfRange {
                    what: "Im z",
                    value: z.im,
                    reason: "evaluation points must be interior".into(),
                });
            }
            for q in self.force.points() {
                if (z - q.q).norm() < 1e-6 {
                    return Err(SleError::CoincidentPoints(format!(
                        "evaluation point {z} sits on force point {}",
                        q.q
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Value of the observable at the current state. Tracked points of `state`
/// must be the evaluation points, in order.
pub fn evaluate_observable(
    spec: &ObservableSpec,
    state: &LoewnerState,
    ctl: &SeriesControl,
) -> Result<f64> {
    let r = state.modulus();
    let xi = state.xi;
    let mut zs = Vec::with_capacity(spec.eval_points.len());
    for p in state.tracked.iter().take(spec.eval_points.len()) {
        let z = p.image - xi;
        if !(z.im > 0.0 && z.im < r) || (z / 2.0).sin().norm() < 1e-9 {
            return Err(SleError::PointSwallowed(p.label.clone()));
        }
        zs.push(z);
    }
    if zs.len() != spec.eval_points.len() {
        return Err(SleError::InvalidInput(
            "state does not track every evaluation point".into(),
        ));
    }
    let shifted: Vec<Complex64> = state.force_images.iter().map(|q| q - xi).collect();
    let force = spec.force.moved(&shifted)?;
    let m = |z: Complex64| insertion_one_point(spec.bc, r, z, 0.0, &force, ctl);
    match spec.kind {
        ObservableKind::OnePointBoson => m(zs[0]),
        ObservableKind::TwoPointBoson => {
            Ok(m(zs[0])? * m(zs[1])? + 2.0 * green(spec.bc, r, zs[0], zs[1], ctl)?)
        }
    }
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Number of paths.
    pub n_paths: usize,
    /// Horizon `T`.
    pub t_end: f64,
    /// Time step.
    pub dt: f64,
    /// Base seed; path `i` uses stream `i`.
    pub seed: u64,
    /// Constant added to the drift `Λ` (negative controls; 0 otherwise).
    pub drift_offset: f64,
    /// Swallow guard passed to the Loewner integrator.
    pub swallow_guard: f64,
    /// Largest tolerated fraction of early-stopped paths.
    pub max_stopped_fraction: f64,
    /// z-score threshold.
    pub z_threshold: f64,
    /// Fraction of checkpoints that must stay under the threshold.
    pub pass_fraction: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 5000,
            t_end: 0.1,
            dt: 1e-4,
            seed: 1,
            drift_offset: 0.0,
            swallow_guard: 1e-3,
            max_stopped_fraction: 0.1,
            z_threshold: 3.0,
            pass_fraction: 0.95,
        }
    }
}

/// Summary of a martingale test. Index 0 is `t = 0`, where the increment,
/// its standard error and z-score are all exactly 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// Checkpoint times.
    pub times: Vec<f64>,
    /// `E[M_t − M_0]` estimates.
    pub mean_increment: Vec<f64>,
    /// Standard errors of the means.
    pub std_error: Vec<f64>,
    /// `mean / std_error`.
    pub z_scores: Vec<f64>,
    /// Paths simulated.
    pub n_paths: usize,
    /// Paths stopped early by swallowing.
    pub n_stopped: usize,
    /// Verdict.
    pub pass: bool,
}

impl MartingaleReport {
    /// Largest `|z|` over the checkpoints.
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Runs [`martingale_test_with`] with default thresholds.
pub fn martingale_test(
    spec: &ObservableSpec,
    n_paths: usize,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<MartingaleReport> {
    martingale_test_with(
        spec,
        &McConfig {
            n_paths,
            t_end,
            dt,
            seed,
            ..Default::default()
        },
    )
}

/// Simulates `n_paths` SLE paths and reports the mean observable increment,
/// its standard error and z-score at the checkpoints `T/16, …, T`.
pub fn martingale_test_with(spec: &ObservableSpec, mc: &McConfig) -> Result<MartingaleReport> {
    spec.validate()?;
    if mc.n_paths < 2 {
        return Err(SleError::InvalidInput("need at least two paths".into()));
    }
    if !(mc.dt > 0.0 && mc.t_end > 0.0 && mc.t_end < spec.r0) {
        return Err(SleError::OutOfRange {
            what: "T",
            value: mc.t_end,
            reason: "need 0 < T < r0 and dt > 0".into(),
        });
    }
    let mut steps: Vec<usize> = CHECKPOINT_FRACTIONS
        .iter()
        .map(|f| ((mc.t_end * f / mc.dt).round() as usize).max(1))
        .collect();
    steps.dedup();
    let base = DriverConfig {
        kappa: spec.params.kappa,
        dt: mc.dt,
        rng_seed: mc.seed,
        swallow_guard: mc.swallow_guard,
        record_history: false,
        ..Default::default()
    };
    let betas = spec.force.betas();
    let (bc, kappa, offset, ctl) = (spec.bc, spec.params.kappa, mc.drift_offset, base.series);
    let drift: crate::loewner::DriftFn = Arc::new(move |r, xi, q: &[Complex64]| {
        Ok(drift_lambda_at(bc, r, xi, q, &betas, kappa, &ctl)? + offset)
    });
    let tracked: Vec<(String, Complex64)> = spec
        .eval_points
        .iter()
        .enumerate()
        .map(|(j, z)| (format!("z{j}"), *z))
        .collect();

    let paths = ensemble_map(mc.n_paths, |i| -> Result<(Vec<f64>, bool)> {
        let cfg = DriverConfig {
            stream: i,
            drift: Some(drift.clone()),
            ..base.clone()
        };
        let mut state = LoewnerState::new(
            spec.r0,
            spec.p,
            tracked.clone(),
            spec.force.positions(),
            &cfg,
        )?;
        let m0 = evaluate_observable(spec, &state, &ctl)?;
        let mut out = Vec::with_capacity(steps.len());
        let mut done = 0;
        let mut stopped = false;
        let mut last = m0;
        for &n in &steps {
            if !stopped {
                match advance(&mut state, &cfg, n - done) {
                    Ok(()) => last = evaluate_observable(spec, &state, &ctl)?,
                    Err(SleError::Swallowed { .. } | SleError::ForcePointSwallowed { .. }) => {
                        stopped = true;
                        last = evaluate_observable(spec, &state, &ctl)?;
                    }
                    Err(e) => return Err(e),
                }
                done = n;
            }
            out.push(last - m0);
        }
        Ok((out, stopped))
    });

    let mut increments = Vec::with_capacity(paths.len());
    let mut n_stopped = 0;
    for p in paths {
        let (inc, stopped) = p?;
        n_stopped += stopped as usize;
        increments.push(inc);
    }
    if n_stopped as f64 > mc.max_stopped_fraction * mc.n_paths as f64 {
        return Err(SleError::TooManySwallowed {
            stopped: n_stopped,
            total: mc.n_paths,
        });
    }
    let n = mc.n_paths as f64;
    let mut report = MartingaleReport {
        times: vec![0.0],
        mean_increment: vec![0.0],
        std_error: vec![0.0],
        z_scores: vec![0.0],
        n_paths: mc.n_paths,
        n_stopped,
        pass: false,
    };
    let mut passing = 0usize;
    for (k, &s) in steps.iter().enumerate() {
        let mean = increments.iter().map(|v| v[k]).sum::<f64>() / n;
        let var = increments
            .iter()
            .map(|v| (v[k] - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        let se = (var / n).sqrt();
        let z = if se > 0.0 {
            mean / se
        } else if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if z.abs() < mc.z_threshold {
            passing += 1;
        }
        report.times.push(s as f64 * mc.dt);
        report.mean_increment.push(mean);
        report.std_error.push(se);
        report.z_scores.push(z);
    }
    report.pass = passing as f64 >= mc.pass_fraction * steps.len() as f64;
    Ok(report)
}
