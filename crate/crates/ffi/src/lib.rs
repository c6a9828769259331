//! C ABI for the annulus SLE laboratory.
//!
//! Conventions:
//! - every fallible function returns an [`AsleStatus`] and writes results
//!   through caller-provided out-pointers, which are left untouched on error;
//! - objects are opaque handles created by `*_new` and released by `*_free`
//!   (`*_free(NULL)` is a no-op);
//! - the message of the most recent error on the calling thread is available
//!   from [`asle_last_error_message`];
//! - panics never cross the boundary: they are caught and reported as
//!   [`AsleStatus::Internal`].
//!
//! Handles are not synchronized: use one handle per thread, or lock around
//! calls on a shared handle.

use annulus_sle::correlations::{green, BoundaryCondition};
use annulus_sle::coulomb_gas::{
    drift_lambda, one_leg_partition, ForceDivisor, ForcePoint, SleParams,
};
use annulus_sle::loewner::{advance, trace_point, DriverConfig, LoewnerState};
use annulus_sle::screening::{PartitionEvaluator, PartitionMethod};
use annulus_sle::special_fn::{loewner_kernel_h, theta, SeriesControl};
use annulus_sle::SleError;
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsleStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments violate a precondition (range, neutrality, coincident points, ...).
    InvalidArgument = 2,
    /// The computation itself failed (non-convergence, pole proximity, swallowing, ...).
    Numerical = 3,
    /// An unexpected internal failure (caught panic).
    Internal = 4,
}

/// Boundary condition on the inner boundary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsleBoundary {
    /// Excursion-reflected.
    Er = 0,
    /// Dirichlet.
    Dirichlet = 1,
}

impl From<AsleBoundary> for BoundaryCondition {
    fn from(b: AsleBoundary) -> Self {
        match b {
            AsleBoundary::Er => BoundaryCondition::Er,
            AsleBoundary::Dirichlet => BoundaryCondition::Dirichlet,
        }
    }
}

/// Evaluation method of screening partition functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsleMethod {
    /// Euler integral over the boundary arc (`κ > 4`).
    Euler = 0,
    /// Residue calculus (`4/κ ∈ {1, 2, 3, 4}`).
    Residue = 1,
    /// Closed forms (`κ ∈ {4, 2, 4/3, 1}`, ER only).
    ClosedForm = 2,
    /// Degenerate hypergeometric limit (`r = ∞`).
    Hypergeometric = 3,
}

impl From<AsleMethod> for PartitionMethod {
    fn from(m: AsleMethod) -> Self {
        match m {
            AsleMethod::Euler => PartitionMethod::EulerIntegral,
            AsleMethod::Residue => PartitionMethod::Residue,
            AsleMethod::ClosedForm => PartitionMethod::ClosedForm,
            AsleMethod::Hypergeometric => PartitionMethod::HypergeometricLimit,
        }
    }
}

/// Screening partition function evaluator (opaque).
pub struct AslePartition {
    eval: PartitionEvaluator,
}

/// Force divisor with its SLE parameter and boundary condition (opaque).
pub struct AsleForce {
    params: SleParams,
    bc: BoundaryCondition,
    force: ForceDivisor,
}

/// One SLE path in progress (opaque).
pub struct AsleLoewner {
    state: LoewnerState,
    cfg: DriverConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &SleError) -> AsleStatus {
    if e.is_validation() {
        AsleStatus::InvalidArgument
    } else {
        AsleStatus::Numerical
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (AsleStatus, String)>) -> AsleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AsleStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AsleStatus::Internal
        }
    }
}

fn lib<T>(r: annulus_sle::Result<T>) -> Result<T, (AsleStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AsleStatus, String) {
    (AsleStatus::NullPointer, format!("{what} is null"))
}

/// Writes `v` through `out`, failing on null.
unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), (AsleStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = v;
    Ok(())
}

/// Borrows a handle, failing on null.
unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, (AsleStatus, String)> {
    h.as_ref().ok_or_else(|| null(what))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len` bytes). Returns the full message length excluding the
/// terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn asle_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Theta function `Θ(r, z)`.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_theta(
    r: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> AsleStatus {
    guard(|| {
        let v = lib(theta(
            r,
            Complex64::new(z_re, z_im),
            &SeriesControl::default(),
        ))?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output"));
        }
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// Loewner kernel `H(r, z)`.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_loewner_kernel(
    r: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> AsleStatus {
    guard(|| {
        let v = lib(loewner_kernel_h(
            r,
            Complex64::new(z_re, z_im),
            &SeriesControl::default(),
        ))?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output"));
        }
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// Green's function `G_r(ζ, z)` of the given boundary condition.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_green(
    bc: AsleBoundary,
    r: f64,
    zeta_re: f64,
    zeta_im: f64,
    z_re: f64,
    z_im: f64,
    out: *mut f64,
) -> AsleStatus {
    guard(|| {
        let v = lib(green(
            bc.into(),
            r,
            Complex64::new(zeta_re, zeta_im),
            Complex64::new(z_re, z_im),
            &SeriesControl::default(),
        ))?;
        put(out, v, "out")
    })
}

/// Creates a screening partition function evaluator.
///
/// # Safety
/// `out` must be valid for writes; the handle must be released with
/// [`asle_partition_free`].
#[no_mangle]
pub unsafe extern "C" fn asle_partition_new(
    method: AsleMethod,
    kappa: f64,
    bc: AsleBoundary,
    out: *mut *mut AslePartition,
) -> AsleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let eval = lib(PartitionEvaluator::new(method.into(), kappa, bc.into()))?;
        *out = Box::into_raw(Box::new(AslePartition { eval }));
        Ok(())
    })
}

/// Evaluates `Z(r, x)`.
///
/// # Safety
/// `h` must be a live handle from [`asle_partition_new`]; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_partition_eval(
    h: *const AslePartition,
    r: f64,
    x: f64,
    out: *mut f64,
) -> AsleStatus {
    guard(|| {
        let h = handle(h, "partition handle")?;
        let v = lib(h.eval.eval(r, x, &SeriesControl::default()))?;
        put(out, v, "out")
    })
}

/// Releases an evaluator.
///
/// # Safety
/// `h` must be null or a handle from [`asle_partition_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asle_partition_free(h: *mut AslePartition) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Creates a force divisor with seed charge `a = √(2/κ)`.  Point `j` is
/// `q_re[j]` on the outer boundary, or `q_re[j] + i r` on the inner one when
/// `inner[j] != 0` (`inner` may be null), with charge `beta[j]`.  The charges
/// must satisfy `a + Σ β_j = 0`.
///
/// # Safety
/// `q_re`, `beta` (and `inner` if non-null) must be valid for `n` reads; `out`
/// must be valid for writes.  Release with [`asle_force_free`].
#[no_mangle]
pub unsafe extern "C" fn asle_force_new(
    kappa: f64,
    bc: AsleBoundary,
    r: f64,
    n: usize,
    q_re: *const f64,
    beta: *const f64,
    inner: *const u8,
    out: *mut *mut AsleForce,
) -> AsleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n > 0 && (q_re.is_null() || beta.is_null()) {
            return Err(null("force point arrays"));
        }
        let params = lib(SleParams::new(kappa))?;
        let mut points = Vec::with_capacity(n);
        for j in 0..n {
            let on_inner = !inner.is_null() && *inner.add(j) != 0;
            points.push(ForcePoint {
                q: Complex64::new(*q_re.add(j), if on_inner { r } else { 0.0 }),
                beta: *beta.add(j),
            });
        }
        let force = lib(ForceDivisor::new(params.a, points))?;
        *out = Box::into_raw(Box::new(AsleForce {
            params,
            bc: bc.into(),
            force,
        }));
        Ok(())
    })
}

/// One-leg partition function `Z_β(r, p)`.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_force_partition(
    h: *const AsleForce,
    r: f64,
    p: f64,
    out: *mut f64,
) -> AsleStatus {
    guard(|| {
        let h = handle(h, "force handle")?;
        let v = lib(one_leg_partition(
            h.bc,
            r,
            p,
            &h.force,
            &SeriesControl::default(),
        ))?;
        put(out, v, "out")
    })
}

/// Drift `Λ(r, ξ)` induced by the force divisor.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_force_drift(
    h: *const AsleForce,
    r: f64,
    xi: f64,
    out: *mut f64,
) -> AsleStatus {
    guard(|| {
        let h = handle(h, "force handle")?;
        let v = lib(drift_lambda(
            h.bc,
            r,
            xi,
            &h.force,
            &h.params,
            &SeriesControl::default(),
        ))?;
        put(out, v, "out")
    })
}

/// Releases a force divisor.
///
/// # Safety
/// `h` must be null or a handle from [`asle_force_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asle_force_free(h: *mut AsleForce) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Starts an SLE(κ,Λ) path in the strip of modulus `r0` from `p`.  The drift
/// comes from `force` (its κ and boundary condition); with `force` null the
/// path is driftless.  The force handle may be freed afterwards.
///
/// # Safety
/// `force` must be null or a live handle; `out` must be valid for writes.
/// Release with [`asle_loewner_free`].
#[no_mangle]
pub unsafe extern "C" fn asle_loewner_new(
    kappa: f64,
    r0: f64,
    p: f64,
    dt: f64,
    seed: u64,
    force: *const AsleForce,
    out: *mut *mut AsleLoewner,
) -> AsleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = DriverConfig {
            kappa,
            dt,
            rng_seed: seed,
            ..Default::default()
        };
        let mut force_points = vec![];
        if let Some(f) = force.as_ref() {
            if (f.params.kappa - kappa).abs() > 1e-12 {
                return Err((
                    AsleStatus::InvalidArgument,
                    format!(
                        "force divisor built for κ = {}, path uses κ = {kappa}",
                        f.params.kappa
                    ),
                ));
            }
            cfg = cfg.with_coulomb_drift(f.bc, &f.force);
            force_points = f.force.positions();
        }
        lib(cfg.validate())?;
        let state = lib(LoewnerState::new(r0, p, vec![], force_points, &cfg))?;
        *out = Box::into_raw(Box::new(AsleLoewner { state, cfg }));
        Ok(())
    })
}

/// Advances the path by `n_steps` steps.  On a numerical error (e.g. a force
/// point swallowed) the path stays at the last completed step.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn asle_loewner_advance(h: *mut AsleLoewner, n_steps: usize) -> AsleStatus {
    guard(|| {
        let h = h.as_mut().ok_or_else(|| null("loewner handle"))?;
        lib(advance(&mut h.state, &h.cfg, n_steps))
    })
}

/// Current time and driver value.
///
/// # Safety
/// `h` must be a live handle; `t` and `xi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_loewner_driver(
    h: *const AsleLoewner,
    t: *mut f64,
    xi: *mut f64,
) -> AsleStatus {
    guard(|| {
        let h = handle(h, "loewner handle")?;
        put(t, h.state.t, "t")?;
        put(xi, h.state.xi, "xi")
    })
}

/// Current tip `γ_t`, from the reverse flow started at `ξ_t + iε`.
///
/// # Safety
/// `h` must be a live handle; `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asle_loewner_tip(
    h: *const AsleLoewner,
    eps: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> AsleStatus {
    guard(|| {
        let h = handle(h, "loewner handle")?;
        let g = lib(trace_point(&h.state, &h.cfg, eps))?;
        put(out_re, g.re, "out_re")?;
        put(out_im, g.im, "out_im")
    })
}

/// Releases a path.
///
/// # Safety
/// `h` must be null or a handle from [`asle_loewner_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asle_loewner_free(h: *mut AsleLoewner) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
