//! Annulus Loewner evolution in the covering strip.
//!
//! Tracked points follow `∂_t g̃_t(z) = H(r0 − t, g̃_t(z) − ξ_t)`, integrated
//! by classical RK4. Within a step the driver is linearly interpolated
//! between its values at the ends of the step. The driver follows
//! `dξ = √κ dB + Λ dt`, integrated by Euler–Maruyama.
//!
//! Each state owns a ChaCha8 generator seeded by `(seed, stream)`, so a path
//! is bit-reproducible from its seed, its stream index and `dt`, whatever
//! the thread schedule.

use crate::correlations::BoundaryCondition;
use crate::coulomb_gas::{drift_lambda_at, ForceDivisor};
use crate::error::{Result, SleError};
use crate::special_fn::{kernel_jet, loewner_kernel_h, SeriesControl};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

/// Drift `Λ(r_remaining, ξ, force_images)`.
pub type DriftFn = Arc<dyn Fn(f64, f64, &[Complex64]) -> Result<f64> + Send + Sync>;

/// Largest tolerated imaginary part of an outer-boundary force image.
const OUTER_IM_TOL: f64 = 1e-8;

/// Driver and integration settings.
#[derive(Clone)]
pub struct DriverConfig {
    /// Diffusivity `κ ≥ 0`; `κ = 0` gives a deterministic, drift-driven flow.
    pub kappa: f64,
    /// Drift `Λ`; `None` means `Λ ≡ 0`.
    pub drift: Option<DriftFn>,
    /// Time step.
    pub dt: f64,
    /// Seed of the path's random generator.
    pub rng_seed: u64,
    /// Stream index of the path (one stream per path of an ensemble).
    pub stream: u64,
    /// A point is swallowed when `|sin((z − ξ)/2)|` drops below this.
    pub swallow_guard: f64,
    /// Keep `(t, ξ)` after every step; needed by [`trace_point`].
    pub record_history: bool,
    /// Also integrate `∂_t g̃_t'(z) = H'(r0 − t, g̃_t(z) − ξ_t) g̃_t'(z)`.
    pub track_derivative: bool,
    /// Theta-series controls.
    pub series: SeriesControl,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            kappa: 0.0,
            drift: None,
            dt: 1e-4,
            rng_seed: 0,
            stream: 0,
            swallow_guard: 1e-3,
            record_history: true,
            track_derivative: false,
            series: SeriesControl::default(),
        }
    }
}

impl fmt::Debug for DriverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriverConfig")
            .field("kappa", &self.kappa)
            .field("drift", &self.drift.as_ref().map(|_| "<fn>"))
            .field("dt", &self.dt)
            .field("rng_seed", &self.rng_seed)
            .field("stream", &self.stream)
            .field("swallow_guard", &self.swallow_guard)
            .field("record_history", &self.record_history)
            .field("track_derivative", &self.track_derivative)
            .finish()
    }
}

impl DriverConfig {
    /// Checks `dt > 0`, `κ ≥ 0` and a positive guard.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SleError::OutOfRange {
                what: "dt",
                value: self.dt,
                reason: "time step must be positive".into(),
            });
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(SleError::OutOfRange {
                what: "kappa",
                value: self.kappa,
                reason: "must be non-negative".into(),
            });
        }
        if !(self.swallow_guard > 0.0) {
            return Err(SleError::OutOfRange {
                what: "swallow_guard",
                value: self.swallow_guard,
                reason: "must be positive".into(),
            });
        }
        self.series.validate()
    }

    /// Sets the drift to the Coulomb gas drift `Λ` of the given force divisor.
    pub fn with_coulomb_drift(mut self, bc: BoundaryCondition, force: &ForceDivisor) -> Self {
        let betas = force.betas();
        let kappa = self.kappa;
        let ctl = self.series;
        self.drift = Some(Arc::new(move |r, xi, q: &[Complex64]| {
            drift_lambda_at(bc, r, xi, q, &betas, kappa, &ctl)
        }));
        self
    }
}

/// A labelled point followed by the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedPoint {
    /// Label used in error messages and output.
    pub label: String,
    /// Initial position.
    pub initial: Complex64,
    /// Current image `g̃_t(z)`.
    pub image: Complex64,
    /// Current derivative `g̃_t'(z)` (stays 1 unless derivative tracking is on).
    pub derivative: Complex64,
}

/// State of the covering Loewner flow.
#[derive(Debug, Clone)]
pub struct LoewnerState {
    /// Elapsed capacity time; the current modulus is `r0 − t`.
    pub t: f64,
    /// Driver value `ξ_t`.
    pub xi: f64,
    /// Initial modulus.
    pub r0: f64,
    /// Tracked points.
    pub tracked: Vec<TrackedPoint>,
    /// Images of the force points.
    pub force_images: Vec<Complex64>,
    /// Which force points started on the outer boundary.
    outer: Vec<bool>,
    /// Recorded `(t, ξ_t)`, starting with `(0, ξ_0)`.
    pub history: Vec<(f64, f64)>,
    steps: u64,
    rng: ChaCha8Rng,
}

impl LoewnerState {
    /// Starts the flow at `ξ_0 = p` with the generator seeded from `cfg`.
    pub fn new(
        r0: f64,
        p: f64,
        tracked: Vec<(String, Complex64)>,
        force_points: Vec<Complex64>,
        cfg: &DriverConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(r0.is_finite() && r0 > cfg.series.r_min) {
            return Err(SleError::OutOfRange {
                what: "r0",
                value: r0,
                reason: format!("initial modulus must exceed {}", cfg.series.r_min),
            });
        }
        for (label, z) in &tracked {
            if !(z.im >= 0.0 && z.im <= r0 && z.re.is_finite()) {
                return Err(SleError::OutOfRange {
                    what: "Im z",
                    value: z.im,
                    reason: format!("tracked point '{label}' must lie in the closed strip"),
                });
            }
        }
        let tol = 1e-12 * r0.max(1.0);
        let mut outer = Vec::with_capacity(force_points.len());
        for q in &force_points {
            if q.im.abs() <= tol {
                outer.push(true);
            } else if (q.im - r0).abs() <= tol {
                outer.push(false);
            } else {
                return Err(SleError::UnsupportedForce(format!(
                    "force point {q} is not on a boundary component"
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(cfg.stream);
        Ok(LoewnerState {
            t: 0.0,
            xi: p,
            r0,
            tracked: tracked
                .into_iter()
                .map(|(label, z)| TrackedPoint {
                    label,
                    initial: z,
                    image: z,
                    derivative: Complex64::new(1.0, 0.0),
                })
                .collect(),
            force_images: force_points,
            outer,
            history: vec![(0.0, p)],
            steps: 0,
            rng,
        })
    }

    /// Current modulus `r0 − t`.
    pub fn modulus(&self) -> f64 {
        self.r0 - self.t
    }

    /// Number of completed steps.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Image of the tracked point with the given label.
    pub fn image(&self, label: &str) -> Option<Complex64> {
        self.tracked
            .iter()
            .find(|p| p.label == label)
            .map(|p| p.image)
    }
}

fn near_driver(z: Complex64, xi: f64, guard: f64) -> bool {
    ((z - xi) / 2.0).sin().norm() < guard
}

/// One RK4 step of `ż = H(r, z − ξ)` with `r` decreasing from `r` to
/// `r − h` and `ξ` moving linearly from `xi0` to `xi1`.
fn rk4_step(
    r: f64,
    h: f64,
    z: Complex64,
    xi0: f64,
    xi1: f64,
    sign: f64,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    let xim = 0.5 * (xi0 + xi1);
    // Forward: modulus decreases along the step; reverse: it increases.
    let rm = r - sign * 0.5 * h;
    let re = r - sign * h;
    let f = |rr: f64, w: Complex64, x: f64| -> Result<Complex64> {
        Ok(sign * loewner_kernel_h(rr, w - x, ctl)?)
    };
    let k1 = f(r, z, xi0)?;
    let k2 = f(rm, z + 0.5 * h * k1, xim)?;
    let k3 = f(rm, z + 0.5 * h * k2, xim)?;
    let k4 = f(re, z + h * k3, xi1)?;
    Ok(z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// RK4 step of the coupled system `ż = H(z − ξ)`, `ḋ = H'(z − ξ)·d`.
fn rk4_step_with_derivative(
    r: f64,
    h: f64,
    z: Complex64,
    d: Complex64,
    xi0: f64,
    xi1: f64,
    ctl: &SeriesControl,
) -> Result<(Complex64, Complex64)> {
    let xim = 0.5 * (xi0 + xi1);
    let f = |rr: f64, w: Complex64, dd: Complex64, x: f64| -> Result<(Complex64, Complex64)> {
        let j = kernel_jet(rr, w - x, ctl)?;
        Ok((j.h, j.dh * dd))
    };
    let (k1, l1) = f(r, z, d, xi0)?;
    let (k2, l2) = f(r - 0.5 * h, z + 0.5 * h * k1, d + 0.5 * h * l1, xim)?;
    let (k3, l3) = f(r - 0.5 * h, z + 0.5 * h * k2, d + 0.5 * h * l2, xim)?;
    let (k4, l4) = f(r - h, z + h * k3, d + h * l3, xi1)?;
    Ok((
        z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
        d + h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4),
    ))
}

/// Advances the state by `n_steps` steps of size `cfg.dt`.
///
/// On `Swallowed` or `ForcePointSwallowed` the state is left at the last
/// completed step.
pub fn advance(state: &mut LoewnerState, cfg: &DriverConfig, n_steps: usize) -> Result<()> {
    let dt = cfg.dt;
    let ctl = &cfg.series;
    if state.t + n_steps as f64 * dt >= state.r0 - ctl.r_min * (1.0 - 1e-12) {
        return Err(SleError::OutOfRange {
            what: "t",
            value: state.t + n_steps as f64 * dt,
            reason: format!(
                "evolution must stop while the modulus exceeds {} (r0 = {})",
                ctl.r_min, state.r0
            ),
        });
    }
    let sqrt_k_dt = (cfg.kappa * dt).sqrt();
    let mut new_tracked = vec![Complex64::new(0.0, 0.0); state.tracked.len()];
    let mut new_deriv = vec![Complex64::new(1.0, 0.0); state.tracked.len()];
    let mut new_force = vec![Complex64::new(0.0, 0.0); state.force_images.len()];
    for _ in 0..n_steps {
        let r = state.modulus();
        let lambda = match &cfg.drift {
            Some(d) => d(r, state.xi, &state.force_images)?,
            None => 0.0,
        };
        let noise: f64 = if cfg.kappa > 0.0 {
            state.rng.sample(StandardNormal)
        } else {
            0.0
        };
        let xi1 = state.xi + lambda * dt + sqrt_k_dt * noise;
        for (j, p) in state.tracked.iter().enumerate() {
            if cfg.track_derivative {
                (new_tracked[j], new_deriv[j]) =
                    rk4_step_with_derivative(r, dt, p.image, p.derivative, state.xi, xi1, ctl)?;
            } else {
                new_tracked[j] = rk4_step(r, dt, p.image, state.xi, xi1, 1.0, ctl)?;
            }
        }
        for (j, slot) in new_force.iter_mut().enumerate() {
            let w = rk4_step(r, dt, state.force_images[j], state.xi, xi1, 1.0, ctl)?;
            *slot = if state.outer[j] {
                if w.im.abs() > OUTER_IM_TOL {
                    return Err(SleError::BranchTracking(format!(
                        "outer force image left the real line (Im = {:e})",
                        w.im
                    )));
                }
                Complex64::new(w.re, 0.0)
            } else {
                w
            };
        }
        let t1 = state.t + dt;
        for (p, z) in state.tracked.iter().zip(&new_tracked) {
            if near_driver(*z, xi1, cfg.swallow_guard) {
                return Err(SleError::Swallowed {
                    label: p.label.clone(),
                    t: t1,
                });
            }
        }
        for (index, (q, outer)) in new_force.iter().zip(&state.outer).enumerate() {
            if *outer && near_driver(*q, xi1, cfg.swallow_guard) {
                return Err(SleError::ForcePointSwallowed { index, t: t1 });
            }
        }
        for (j, p) in state.tracked.iter_mut().enumerate() {
            p.image = new_tracked[j];
            if cfg.track_derivative {
                p.derivative = new_deriv[j];
            }
        }
        state.force_images.copy_from_slice(&new_force);
        state.xi = xi1;
        state.steps += 1;
        state.t = state.steps as f64 * dt;
        if cfg.record_history {
            state.history.push((state.t, xi1));
        }
    }
    Ok(())
}

/// Approximates the trace tip `γ_t = lim g̃_t^{−1}(ξ_t + iε)` by running the
/// reverse flow `df/ds = −H(r0 − t + s, f − ξ_{t−s})` from `ξ_t + iε` over
/// `[0, t]`, with RK4 substeps refined near the driver.
pub fn trace_point(state: &LoewnerState, cfg: &DriverConfig, eps: f64) -> Result<Complex64> {
    let ctl = &cfg.series;
    let hist = &state.history;
    let Some(&(t_last, xi_last)) = hist.last() else {
        return Err(SleError::InvalidInput("empty driver history".into()));
    };
    if state.steps > 0 && (hist.len() as u64) != state.steps + 1 {
        return Err(SleError::InvalidInput(
            "driver history was not recorded; enable record_history".into(),
        ));
    }
    if !(eps > 0.0 && eps < state.modulus()) {
        return Err(SleError::OutOfRange {
            what: "eps",
            value: eps,
            reason: "must lie in (0, r0 − t)".into(),
        });
    }
    let mut f = Complex64::new(xi_last, eps);
    let mut r = state.r0 - t_last;
    for k in (1..hist.len()).rev() {
        let (t1, xi_hi) = hist[k];
        let (t0, xi_lo) = hist[k - 1];
        let h = t1 - t0;
        let dist = ((f - xi_hi) / 2.0).sin().norm() * 2.0;
        let speed = loewner_kernel_h(r, f - xi_hi, ctl)?.norm();
        let n_sub = ((20.0 * h * speed / dist.max(1e-300)).ceil() as usize).clamp(1, 1 << 20);
        let hs = h / n_sub as f64;
        for j in 0..n_sub {
            let a = xi_hi + (xi_lo - xi_hi) * (j as f64 / n_sub as f64);
            let b = xi_hi + (xi_lo - xi_hi) * ((j + 1) as f64 / n_sub as f64);
            f = rk4_step(r, hs, f, a, b, -1.0, ctl)?;
            r += hs;
        }
        if !(f.re.is_finite() && f.im.is_finite()) || f.im < -1e-6 || f.im > state.r0 + 1e-6 {
            return Err(SleError::ReverseFlowDiverged(format!(
                "reverse flow left the strip at time {t0}: {f}"
            )));
        }
    }
    Ok(f)
}

/// Trace points at the snapshot times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceSample {
    /// Snapshot times.
    pub times: Vec<f64>,
    /// Driver values at those times.
    pub xi: Vec<f64>,
    /// Approximate trace points.
    pub gamma: Vec<Complex64>,
}

/// Result of [`run_sle`].
#[derive(Debug, Clone)]
pub struct SleRun {
    /// Trace approximation at the snapshot times.
    pub trace: TraceSample,
    /// State snapshots (the initial state first).
    pub snapshots: Vec<LoewnerState>,
    /// Why the run stopped early, if it did.
    pub stop: Option<SleError>,
}

/// Runs annulus SLE(κ, Λ) from `p` with the Coulomb gas drift of `force` up
/// to time `t_end`, taking a snapshot (and a trace point) every `stride`
/// steps. Swallowing ends the run early and is reported in [`SleRun::stop`].
#[allow(clippy::too_many_arguments)]
pub fn run_sle(
    bc: BoundaryCondition,
    r0: f64,
    kappa: f64,
    p: f64,
    force: &ForceDivisor,
    t_end: f64,
    cfg: &DriverConfig,
    stride: usize,
    trace_eps: f64,
) -> Result<SleRun> {
    if !(t_end > 0.0 && t_end < r0) {
        return Err(SleError::OutOfRange {
            what: "T",
            value: t_end,
            reason: format!("end time must lie in (0, r0 = {r0})"),
        });
    }
    let mut cfg = cfg.clone();
    cfg.kappa = kappa;
    cfg.record_history = true;
    let cfg = cfg.with_coulomb_drift(bc, force);
    let mut state = LoewnerState::new(r0, p, vec![], force.positions(), &cfg)?;
    let n_total = (t_end / cfg.dt).round() as usize;
    let stride = stride.max(1);
    let mut run = SleRun {
        trace: TraceSample::default(),
        snapshots: vec![state.clone()],
        stop: None,
    };
    let record = |state: &LoewnerState, run: &mut SleRun| -> Result<()> {
        run.trace.times.push(state.t);
        run.trace.xi.push(state.xi);
        run.trace.gamma.push(trace_point(state, &cfg, trace_eps)?);
        Ok(())
    };
    record(&state, &mut run)?;
    let mut done = 0;
    while done < n_total {
        let n = stride.min(n_total - done);
        match advance(&mut state, &cfg, n) {
            Ok(()) => {}
            Err(e @ (SleError::Swallowed { .. } | SleError::ForcePointSwallowed { .. })) => {
                run.stop = Some(e);
                run.snapshots.push(state.clone());
                record(&state, &mut run)?;
                return Ok(run);
            }
            Err(e) => return Err(e),
        }
        done += n;
        run.snapshots.push(state.clone());
        record(&state, &mut run)?;
    }
    Ok(run)
}

/// Evaluates `f(path_index)` for every path in parallel, returning results in
/// path order, so the output is independent of the thread schedule.
pub fn ensemble_map<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Send + Sync,
{
    (0..n_paths as u64).into_par_iter().map(f).collect()
}
