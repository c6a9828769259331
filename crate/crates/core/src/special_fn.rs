//! Jacobi-type theta functions of the cylinder, the annulus Loewner kernel and
//! the associated Weierstrass zeta function.
//!
//! With nome `q = e^{-r}` the three theta functions are
//!
//! * `Θ(r,z)   = (1/i) Σ_n (-1)^n e^{-r(n+1/2)^2} e^{i(n+1/2)z}` (odd, zeros on `2πℤ + 2irℤ`),
//! * `Θ_I(r,z) = Σ_n (-1)^n e^{-r n^2} e^{inz}` (the inner-boundary companion),
//! * `Θ̃(r,z)  = Θ(r,z) · exp(z^2 / 4r)` (the Dirichlet variant).
//!
//! All three solve the heat equation `∂_r f = ∂_z^2 f`.  The Loewner kernel is
//! `H = 2Θ'/Θ`; its companions are `H_I(z) = H(z + ir) + i` and
//! `H̃(z) = H(z) + z/r`.
//!
//! Every function is pure and reentrant.  Derivatives are obtained by
//! term-wise differentiation of the series; finite differences are used only
//! by the tests.

use crate::error::{Result, SleError};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default lower bound on the modulus accepted by the series evaluators.
pub const R_MIN: f64 = 0.3;

/// Distance to a lattice point below which kernels report [`SleError::PoleProximity`].
pub const POLE_GUARD: f64 = 1e-9;

/// Highest derivative order supported by [`theta_jet`].
pub const MAX_ORDER: usize = 4;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Truncation policy for the theta series.
///
/// Summation stops once the newest (pair of) terms is smaller than `abs_tol`
/// times the running sum of term magnitudes, provided the Gaussian weight has
/// already overtaken the exponential growth coming from `Im z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Relative term-truncation threshold.
    pub abs_tol: f64,
    /// Maximum number of (paired) terms before giving up.
    pub max_terms: usize,
    /// Smallest modulus accepted.
    pub r_min: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            abs_tol: 1e-15,
            max_terms: 200,
            r_min: R_MIN,
        }
    }
}

impl SeriesControl {
    /// Checks the control parameters themselves.
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(SleError::OutOfRange {
                what: "abs_tol",
                value: self.abs_tol,
                reason: "must be positive".into(),
            });
        }
        if self.max_terms < 8 {
            return Err(SleError::OutOfRange {
                what: "max_terms",
                value: self.max_terms as f64,
                reason: "must be at least 8".into(),
            });
        }
        Ok(())
    }
}

/// Which theta function a derivative request refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    /// `Θ`
    Plain,
    /// `Θ_I`
    I,
    /// `Θ̃`
    Tilde,
}

/// Values `[f, f', f'', f''', f'''']` of a theta function at one point; only
/// the entries up to the requested order are meaningful.
pub type Jet = [Complex64; MAX_ORDER + 1];

fn check_args(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<()> {
    ctl.validate()?;
    if !r.is_finite() || r < ctl.r_min {
        return Err(SleError::OutOfRange {
            what: "r",
            value: r,
            reason: format!("modulus must be finite and at least {}", ctl.r_min),
        });
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(SleError::InvalidInput(format!("non-finite argument {z}")));
    }
    Ok(())
}

/// `Θ` and its derivatives up to `order` (≤ 4) in a single pass.
///
/// The terms `n` and `-n-1` are paired, so the sum runs over `n ≥ 0`.
fn plain_jet(r: f64, z: Complex64, order: usize, ctl: &SeriesControl) -> Result<Jet> {
    let mut out = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
    let step = (I * z).exp();
    let mut e_plus = (I * z * 0.5).exp();
    let mut e_minus = e_plus.inv();
    let step_inv = step.inv();
    let peak = z.im.abs() / (2.0 * r);
    let mut scale = 0.0f64;
    for n in 0..ctl.max_terms {
        let nu = n as f64 + 0.5;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * (-r * nu * nu).exp();
        let s = (e_plus - e_minus) * w;
        let a = (e_plus + e_minus) * w;
        // (iν)^k / i, applied to S for even k and A for odd k.
        let mut coef = Complex64::new(0.0, -1.0);
        let mut mag = 0.0f64;
        for (k, slot) in out.iter_mut().enumerate().take(order + 1) {
            let term = if k % 2 == 0 { coef * s } else { coef * a };
            *slot += term;
            mag = mag.max(term.norm());
            coef *= I * nu;
        }
        scale += mag;
        if n >= 1 && nu > peak && mag <= ctl.abs_tol * scale {
            return Ok(out);
        }
        e_plus *= step;
        e_minus *= step_inv;
    }
    Err(SleError::NonConvergent {
        what: "theta",
        terms: ctl.max_terms,
    })
}

/// `Θ_I` and its derivatives up to `order`, pairing `n` with `-n`.
fn inner_jet(r: f64, z: Complex64, order: usize, ctl: &SeriesControl) -> Result<Jet> {
    let mut out = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
    out[0] = Complex64::new(1.0, 0.0);
    let step = (I * z).exp();
    let step_inv = step.inv();
    let mut e_plus = step;
    let mut e_minus = step_inv;
    let peak = z.im.abs() / (2.0 * r);
    let mut scale = 1.0f64;
    for n in 1..=ctl.max_terms {
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * (-r * nf * nf).exp();
        let s = (e_plus - e_minus) * w;
        let a = (e_plus + e_minus) * w;
        let mut coef = Complex64::new(1.0, 0.0);
        let mut mag = 0.0f64;
        for (k, slot) in out.iter_mut().enumerate().take(order + 1) {
            let term = if k % 2 == 0 { coef * a } else { coef * s };
            *slot += term;
            mag = mag.max(term.norm());
            coef *= I * nf;
        }
        scale += mag;
        if nf > peak && mag <= ctl.abs_tol * scale {
            return Ok(out);
        }
        e_plus *= step;
        e_minus *= step_inv;
    }
    Err(SleError::NonConvergent {
        what: "theta_I",
        terms: ctl.max_terms,
    })
}

/// `Θ̃` derivatives from those of `Θ` by the Leibniz rule with the Gaussian
/// factor `E(z) = exp(z^2/4r)`, whose derivatives are `P_k(z) E(z)`.
fn tilde_jet(r: f64, z: Complex64, order: usize, ctl: &SeriesControl) -> Result<Jet> {
    let t = plain_jet(r, z, order, ctl)?;
    let e = (z * z / (4.0 * r)).exp();
    let u = z / (2.0 * r);
    let c = 1.0 / (2.0 * r);
    let p = [
        Complex64::new(1.0, 0.0),
        u,
        u * u + c,
        u * u * u + u * (3.0 * c),
        u * u * u * u + u * u * (6.0 * c) + 3.0 * c * c,
    ];
    const BINOM: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    let mut out = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
    for k in 0..=order {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            acc += t[k - j] * p[j] * BINOM[k][j];
        }
        out[k] = acc * e;
    }
    Ok(out)
}

/// Values and derivatives up to `order` (≤ 4) of the chosen theta function.
pub fn theta_jet(
    r: f64,
    z: Complex64,
    order: usize,
    kind: ThetaKind,
    ctl: &SeriesControl,
) -> Result<Jet> {
    check_args(r, z, ctl)?;
    if order > MAX_ORDER {
        return Err(SleError::OutOfRange {
            what: "order",
            value: order as f64,
            reason: format!("derivative order must be at most {MAX_ORDER}"),
        });
    }
    match kind {
        ThetaKind::Plain => plain_jet(r, z, order, ctl),
        ThetaKind::I => inner_jet(r, z, order, ctl),
        ThetaKind::Tilde => tilde_jet(r, z, order, ctl),
    }
}

/// `Θ(r,z)`.
pub fn theta(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(theta_jet(r, z, 0, ThetaKind::Plain, ctl)?[0])
}

/// `Θ_I(r,z)`.
pub fn theta_i(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(theta_jet(r, z, 0, ThetaKind::I, ctl)?[0])
}

/// `Θ̃(r,z) = Θ(r,z) exp(z²/4r)`.
pub fn theta_tilde(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(theta_jet(r, z, 0, ThetaKind::Tilde, ctl)?[0])
}

/// The `order`-th z-derivative (1..=4) of the chosen theta function.
pub fn theta_deriv(
    r: f64,
    z: Complex64,
    order: usize,
    kind: ThetaKind,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    if order == 0 {
        return Err(SleError::OutOfRange {
            what: "order",
            value: 0.0,
            reason: "derivative order must be in 1..=4".into(),
        });
    }
    Ok(theta_jet(r, z, order, kind, ctl)?[order])
}

/// `Θ'(r,0)`, the normalising constant appearing in every correlator.
pub fn theta_prime_zero(r: f64, ctl: &SeriesControl) -> Result<f64> {
    Ok(theta_jet(r, Complex64::new(0.0, 0.0), 1, ThetaKind::Plain, ctl)?[1].re)
}

/// Errors out if `z` is within [`POLE_GUARD`] of the lattice `2πℤ + 2irℤ`.
pub fn check_off_lattice(r: f64, z: Complex64) -> Result<()> {
    let m = (z.re / (2.0 * PI)).round();
    let n = (z.im / (2.0 * r)).round();
    let d = z - Complex64::new(2.0 * PI * m, 2.0 * r * n);
    if d.norm() < POLE_GUARD {
        return Err(SleError::PoleProximity { re: z.re, im: z.im });
    }
    Ok(())
}

/// Loewner kernel and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelJet {
    /// `H(r,z)`
    pub h: Complex64,
    /// `H'(r,z)`
    pub dh: Complex64,
    /// `H''(r,z)`
    pub d2h: Complex64,
}

/// `H`, `H'`, `H''` from `Θ` through logarithmic differentiation.
pub fn kernel_jet(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<KernelJet> {
    check_off_lattice(r, z)?;
    let t = theta_jet(r, z, 3, ThetaKind::Plain, ctl)?;
    let l1 = t[1] / t[0];
    let l2 = t[2] / t[0];
    let l3 = t[3] / t[0];
    Ok(KernelJet {
        h: 2.0 * l1,
        dh: 2.0 * (l2 - l1 * l1),
        d2h: 2.0 * (l3 - 3.0 * l2 * l1 + 2.0 * l1 * l1 * l1),
    })
}

/// The annulus Loewner kernel `H(r,z) = 2Θ'(r,z)/Θ(r,z)`.
pub fn loewner_kernel_h(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    check_off_lattice(r, z)?;
    let t = theta_jet(r, z, 1, ThetaKind::Plain, ctl)?;
    Ok(2.0 * t[1] / t[0])
}

/// `H_I(r,z) = H(r, z + ir) + i`, real on the real axis.
pub fn loewner_kernel_hi(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(loewner_kernel_h(r, z + Complex64::new(0.0, r), ctl)? + I)
}

/// `H̃(r,z) = H(r,z) + z/r = 2 ∂_z log Θ̃(r,z)`.
pub fn loewner_kernel_htilde(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(loewner_kernel_h(r, z, ctl)? + z / r)
}

/// `ζ_r(π) = 2π (1/24 − ¼ Σ_{k≥1} sinh^{-2}(kr))`.
pub fn zeta_pi(r: f64, ctl: &SeriesControl) -> Result<f64> {
    check_args(r, Complex64::new(0.0, 0.0), ctl)?;
    let mut sum = 0.0f64;
    for k in 1..=ctl.max_terms {
        let s = (k as f64 * r).sinh();
        let term = 1.0 / (s * s);
        sum += term;
        if term <= ctl.abs_tol * (1.0 / 24.0 + sum) {
            return Ok(2.0 * PI * (1.0 / 24.0 - 0.25 * sum));
        }
    }
    Err(SleError::NonConvergent {
        what: "zeta_pi",
        terms: ctl.max_terms,
    })
}

/// Weierstrass zeta of the lattice `2πℤ + 2irℤ`, `ζ_r(z) = H(r,z)/2 + ζ_r(π) z/π`.
pub fn weierstrass_zeta(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(loewner_kernel_h(r, z, ctl)? * 0.5 + z * (zeta_pi(r, ctl)? / PI))
}

/// `ζ_r'(z) = H'(r,z)/2 + ζ_r(π)/π` (minus the Weierstrass ℘ function).
pub fn weierstrass_zeta_deriv(r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    Ok(kernel_jet(r, z, ctl)?.dh * 0.5 + zeta_pi(r, ctl)? / PI)
}
