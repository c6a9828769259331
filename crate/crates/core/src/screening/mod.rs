//! Screening solutions of the annulus null-vector equation: the integrand
//! `Z♯`, the Euler-integral, residue, closed-form and degenerate (`r → ∞`)
//! evaluators of the chordal-type partition function `Z(r, x)`, and residual
//! checkers for the null-vector PDE and its degenerate ODE.
//!
//! All partition functions are defined up to a multiplicative constant that
//! does not depend on `r` or `x`; tests compare ratios, log-derivatives or
//! normalized residuals.

pub mod hypergeometric;
pub mod tanh_sinh;
pub mod taylor;

use crate::correlations::BoundaryCondition;
use crate::coulomb_gas::log_theta_branch;
use crate::error::{Result, SleError};
use crate::special_fn::{
    kernel_jet, theta, theta_jet, theta_prime_zero, theta_tilde, zeta_pi, SeriesControl, ThetaKind,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// `m = 4/κ` rounded to an integer when it is one (to `1e−12`).
fn integer_four_over_kappa(kappa: f64) -> Option<usize> {
    let m = 4.0 / kappa;
    let n = m.round();
    if n >= 1.0 && (m - n).abs() < 1e-12 {
        Some(n as usize)
    } else {
        None
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(SleError::OutOfRange {
            what: "kappa",
            value: kappa,
            reason: "must be positive and finite".into(),
        });
    }
    Ok(())
}

fn check_gap(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 2.0 * PI) {
        return Err(SleError::OutOfRange {
            what: "x",
            value: x,
            reason: "separation p − q must lie in (0, 2π)".into(),
        });
    }
    Ok(())
}

/// Screening normalization `C(κ) = (2 sin(4π/κ))^{−2} / Γ(1 − 4/κ)`.
pub fn normalization_c(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if integer_four_over_kappa(kappa).is_some() {
        return Err(SleError::PoleAtKappa { kappa });
    }
    let s = 2.0 * (4.0 * PI / kappa).sin();
    Ok(1.0 / (s * s * libm::tgamma(1.0 - 4.0 / kappa)))
}

/// Method used by a [`PartitionEvaluator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMethod {
    /// Interval integral of `Z♯`, `κ > 4`.
    EulerIntegral,
    /// Residue at the order-`4/κ` pole, `4/κ ∈ {1,2,3,4}`.
    Residue,
    /// Tabulated closed form (annulus, ER), `κ ∈ {4, 2, 4/3, 1}`.
    ClosedForm,
    /// Degenerate `r = ∞` hypergeometric form.
    HypergeometricLimit,
}

impl FromStr for PartitionMethod {
    type Err = SleError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" | "euler_integral" => Ok(Self::EulerIntegral),
            "residue" => Ok(Self::Residue),
            "closed" | "closed_form" => Ok(Self::ClosedForm),
            "hyp" | "hypergeometric" | "hypergeometric_limit" => Ok(Self::HypergeometricLimit),
            other => Err(SleError::InvalidInput(format!(
                "unknown partition method '{other}' (expected euler|residue|closed|hyp)"
            ))),
        }
    }
}

impl fmt::Display for PartitionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::EulerIntegral => "euler",
            Self::Residue => "residue",
            Self::ClosedForm => "closed",
            Self::HypergeometricLimit => "hyp",
        })
    }
}

/// Which table of closed forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormTable {
    /// Annulus partition functions for the ER boundary condition, multiplied
    /// by `Θ'(0)^{2/κ}` so that they solve the null-vector PDE with the ER
    /// constant `C(r)`.
    AnnulusEr,
    /// Degenerate `r = ∞` partition functions in `sin(x/2)`, `cot(x/2)`.
    Degenerate,
}

/// Quadrature scheme; only double-exponential is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    /// Tanh-sinh.
    #[default]
    TanhSinh,
}

/// Controls for the Euler-integral quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureControl {
    /// Quadrature scheme.
    pub scheme: QuadratureScheme,
    /// Maximum number of step halvings.
    pub level_max: usize,
    /// Relative agreement between successive levels.
    pub rel_tol: f64,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        QuadratureControl {
            scheme: QuadratureScheme::TanhSinh,
            level_max: 12,
            rel_tol: 1e-10,
        }
    }
}

impl QuadratureControl {
    /// Checks `rel_tol > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(SleError::OutOfRange {
                what: "rel_tol",
                value: self.rel_tol,
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

fn log_kernel(bc: BoundaryCondition, r: f64, u: Complex64) -> Result<Complex64> {
    let l = log_theta_branch(r, u)?;
    Ok(match bc {
        BoundaryCondition::Er => l,
        BoundaryCondition::Dirichlet => l + u * u / (4.0 * r),
    })
}

fn real_kernel(bc: BoundaryCondition, r: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    let z = Complex64::new(x, 0.0);
    Ok(match bc {
        BoundaryCondition::Er => theta(r, z, ctl)?.re,
        BoundaryCondition::Dirichlet => theta_tilde(r, z, ctl)?.re,
    })
}

/// Screening integrand
/// `Z♯(p,q,ζ) = Θ'(0)^{6/κ} Θ(p−q)^{2/κ} Θ(p−ζ)^{−4/κ} Θ(ζ−q)^{−4/κ}`
/// (`Θ → Θ̃` for Dirichlet) on the branch that is real and positive on
/// `(q, p)`, continued to `|Im ζ| < 2r` off the cut `(−∞, q] ∪ [p, ∞)`.
pub fn z_sharp(
    bc: BoundaryCondition,
    r: f64,
    p: f64,
    q: f64,
    zeta: Complex64,
    kappa: f64,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    check_kappa(kappa)?;
    check_gap(p - q)?;
    if zeta.im == 0.0 && !(zeta.re > q && zeta.re < p) {
        return Err(SleError::BranchCut(format!(
            "ζ = {} lies on the cut outside ({q}, {p})",
            zeta.re
        )));
    }
    let lead = (6.0 / kappa) * theta_prime_zero(r, ctl)?.ln()
        + (2.0 / kappa) * real_kernel(bc, r, p - q, ctl)?.ln();
    let m = 4.0 / kappa;
    let pc = Complex64::new(p, 0.0);
    let qc = Complex64::new(q, 0.0);
    let l = lead - m * (log_kernel(bc, r, pc - zeta)? + log_kernel(bc, r, zeta - qc)?);
    Ok(l.exp())
}

/// Euler-integral partition function
/// `Z(r, p−q) = (1/Γ(1−4/κ)) ∫_q^p Z♯(p,q,t) dt`, `κ > 4`.
pub fn partition_euler(
    bc: BoundaryCondition,
    r: f64,
    p: f64,
    q: f64,
    kappa: f64,
    quad: &QuadratureControl,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_kappa(kappa)?;
    quad.validate()?;
    if kappa <= 4.0 {
        return Err(SleError::KappaOutOfRange {
            kappa,
            reason: "the Euler integral converges only for κ > 4".into(),
        });
    }
    let x = p - q;
    check_gap(x)?;
    let m = 4.0 / kappa;
    let lead = (6.0 / kappa) * theta_prime_zero(r, ctl)?.ln()
        + (2.0 / kappa) * real_kernel(bc, r, x, ctl)?.ln();
    let integral = tanh_sinh::integrate_unit(
        |s, t| {
            let a = real_kernel(bc, r, x * t, ctl)?;
            let b = real_kernel(bc, r, x * s, ctl)?;
            Ok((a * b).powf(-m))
        },
        quad.level_max,
        quad.rel_tol,
    )?;
    Ok(lead.exp() * x * integral / libm::tgamma(1.0 - m))
}

/// Residue-calculus partition function for `4/κ = m ∈ {1,2,3,4}`:
/// `(−1)^m Res_{ζ=p} Z♯(p, p−x, ζ)`, without the `2πi` factor, computed from
/// exact Taylor coefficients of the theta functions.
pub fn partition_residue(
    bc: BoundaryCondition,
    r: f64,
    x: f64,
    kappa: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_kappa(kappa)?;
    let m = match integer_four_over_kappa(kappa) {
        Some(m) if m <= 4 => m,
        _ => return Err(SleError::KappaNotResidueCase { kappa }),
    };
    check_gap(x)?;
    let kind = match bc {
        BoundaryCondition::Er => ThetaKind::Plain,
        BoundaryCondition::Dirichlet => ThetaKind::Tilde,
    };
    // Around ζ = p + u: Θ(p−ζ) = −u·φ(u), φ(u) = Θ(u)/u; Θ(ζ−q) = Θ(x+u).
    let zero = theta_jet(r, Complex64::new(0.0, 0.0), m, kind, ctl)?;
    let at_x = theta_jet(r, Complex64::new(x, 0.0), m - 1, kind, ctl)?;
    let mut fact = 1.0;
    let mut phi = Vec::with_capacity(m);
    let mut shifted = Vec::with_capacity(m);
    for k in 0..m {
        shifted.push(at_x[k].re / fact);
        fact *= (k + 1) as f64;
        phi.push(zero[k + 1].re / fact);
    }
    let g = taylor::mul(&phi, &shifted, m);
    let coeff = taylor::powi(&taylor::recip(&g, m), m, m)[m - 1];
    let lead = (6.0 / kappa) * theta_prime_zero(r, ctl)?.ln() + (2.0 / kappa) * at_x[0].re.ln();
    Ok(lead.exp() * coeff)
}

/// Closed-form partition functions for `κ ∈ {4, 2, 4/3, 1}`.
///
/// With `m = 4/κ` and `(S, K, c)` equal to `(Θ(r,x), H(r,x), ζ_r(π)/π)` for
/// the annulus table or `(sin(x/2), cot(x/2), 1/12)` for the degenerate table:
///
/// * `m = 1`: `S^{−1/2}`
/// * `m = 2`: `S^{−1} K`
/// * `m = 3`: `S^{−3/2}(3K² − 2K' + 4c)`
/// * `m = 4`: `S^{−2}(4K³ − 6KK' + K'' + 12cK)`
///
/// The annulus entries are multiplied by `Θ'(0)^{2/κ}`.
pub fn partition_closed_form(
    r: f64,
    x: f64,
    kappa: f64,
    which: ClosedFormTable,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_kappa(kappa)?;
    let m = match integer_four_over_kappa(kappa) {
        Some(m) if m <= 4 => m,
        _ => return Err(SleError::KappaNotTabulated { kappa }),
    };
    check_gap(x)?;
    let (s, k, dk, d2k, c, pref) = match which {
        ClosedFormTable::AnnulusEr => {
            let z = Complex64::new(x, 0.0);
            let j = kernel_jet(r, z, ctl)?;
            (
                theta(r, z, ctl)?.re,
                j.h.re,
                j.dh.re,
                j.d2h.re,
                zeta_pi(r, ctl)? / PI,
                theta_prime_zero(r, ctl)?.powf(2.0 / kappa),
            )
        }
        ClosedFormTable::Degenerate => {
            let (sn, cs) = (x / 2.0).sin_cos();
            let cot = cs / sn;
            let dcot = -0.5 / (sn * sn);
            let d2cot = 0.5 * cot / (sn * sn);
            (sn, cot, dcot, d2cot, 1.0 / 12.0, 1.0)
        }
    };
    let body = match m {
        1 => s.powf(-0.5),
        2 => k / s,
        3 => s.powf(-1.5) * (3.0 * k * k - 2.0 * dk + 4.0 * c),
        _ => (4.0 * k * k * k - 6.0 * k * dk + d2k + 12.0 * c * k) / (s * s),
    };
    Ok(pref * body)
}

/// Degenerate (`r = ∞`) partition function
/// `Z_∞(x) = cos^{2/κ−1}(x/4) sin^{1−6/κ}(x/4) ₂F̃₁(1/2, 1−4/κ; 3/2−4/κ; −tan²(x/4))`.
pub fn z_infinity(x: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_gap(x)?;
    let (s, c) = (x / 4.0).sin_cos();
    let t = s / c;
    let f = hypergeometric::regularized_2f1(0.5, 1.0 - 4.0 / kappa, 1.5 - 4.0 / kappa, -t * t)?;
    Ok(c.powf(2.0 / kappa - 1.0) * s.powf(1.0 - 6.0 / kappa) * f)
}

/// Partition function evaluator selected by method, `κ` and boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionEvaluator {
    /// Evaluation method.
    pub method: PartitionMethod,
    /// SLE parameter.
    pub kappa: f64,
    /// Boundary condition.
    pub bc: BoundaryCondition,
    /// Quadrature controls (Euler integral only).
    pub quad: QuadratureControl,
}

impl PartitionEvaluator {
    /// Validates the method's range of `κ` and boundary condition.
    pub fn new(method: PartitionMethod, kappa: f64, bc: BoundaryCondition) -> Result<Self> {
        check_kappa(kappa)?;
        match method {
            PartitionMethod::EulerIntegral if kappa <= 4.0 => {
                return Err(SleError::KappaOutOfRange {
                    kappa,
                    reason: "the Euler integral requires κ > 4".into(),
                })
            }
            PartitionMethod::Residue if !matches!(integer_four_over_kappa(kappa), Some(m) if m <= 4) => {
                return Err(SleError::KappaNotResidueCase { kappa })
            }
            PartitionMethod::ClosedForm => {
                if !matches!(integer_four_over_kappa(kappa), Some(m) if m <= 4) {
                    return Err(SleError::KappaNotTabulated { kappa });
                }
                if bc != BoundaryCondition::Er {
                    return Err(SleError::InvalidInput(
                        "closed forms are tabulated for the ER boundary condition only".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(PartitionEvaluator {
            method,
            kappa,
            bc,
            quad: QuadratureControl::default(),
        })
    }

    /// Replaces the quadrature controls.
    pub fn with_quadrature(mut self, quad: QuadratureControl) -> Self {
        self.quad = quad;
        self
    }

    /// `Z(r, x)`; the hypergeometric limit ignores `r`.
    pub fn eval(&self, r: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
        match self.method {
            PartitionMethod::EulerIntegral => {
                partition_euler(self.bc, r, x, 0.0, self.kappa, &self.quad, ctl)
            }
            PartitionMethod::Residue => partition_residue(self.bc, r, x, self.kappa, ctl),
            PartitionMethod::ClosedForm => {
                partition_closed_form(r, x, self.kappa, ClosedFormTable::AnnulusEr, ctl)
            }
            PartitionMethod::HypergeometricLimit => z_infinity(x, self.kappa),
        }
    }
}

/// Finite-difference steps for the residual checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    /// Step in `x`.
    pub dx: f64,
    /// Step in `r`.
    pub dr: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps { dx: 1e-4, dr: 1e-4 }
    }
}

/// Five-point central first and second derivatives from
/// `[f(−2h), f(−h), f(0), f(h), f(2h)]`.
fn five_point(v: [f64; 5], h: f64) -> (f64, f64) {
    let d1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
    let d2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
    (d1, d2)
}

/// Normalized residual of the annulus null-vector PDE
/// `∂_r Z = (κ/2)Z'' + H Z' + (3/κ − 1/2)H' Z + C(r) Z`,
/// `C(r) = −(6/κ)ζ_r(π)/π` (ER) or that plus `1/(2r)` (Dirichlet),
/// divided by `|Z| + |Z'| + |Z''|`; derivatives by five-point differences.
pub fn null_vector_residual<F>(
    z: F,
    bc: BoundaryCondition,
    r: f64,
    x: f64,
    kappa: f64,
    fd: &FdSteps,
    ctl: &SeriesControl,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    check_kappa(kappa)?;
    let mut vx = [0.0; 5];
    let mut vr = [0.0; 5];
    for k in 0..5 {
        let o = k as f64 - 2.0;
        vx[k] = z(r, x + o * fd.dx)?;
        vr[k] = if k == 2 { vx[2] } else { z(r + o * fd.dr, x)? };
    }
    let (d1, d2) = five_point(vx, fd.dx);
    let (dr, _) = five_point(vr, fd.dr);
    let zv = vx[2];
    let j = kernel_jet(r, Complex64::new(x, 0.0), ctl)?;
    let mut c = -(6.0 / kappa) * zeta_pi(r, ctl)? / PI;
    if bc == BoundaryCondition::Dirichlet {
        c += 1.0 / (2.0 * r);
    }
    let rhs = 0.5 * kappa * d2 + j.h.re * d1 + (3.0 / kappa - 0.5) * j.dh.re * zv + c * zv;
    Ok((dr - rhs).abs() / (zv.abs() + d1.abs() + d2.abs()))
}

/// Normalized residual of the degenerate ODE
/// `0 = (κ/2)Z'' + cot(x/2)Z' + (3/κ − 1/2)cot(x/2)' Z − Z/(2κ)`.
pub fn degenerate_ode_residual<F>(z: F, x: f64, kappa: f64, dx: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_kappa(kappa)?;
    let mut v = [0.0; 5];
    for (k, slot) in v.iter_mut().enumerate() {
        *slot = z(x + (k as f64 - 2.0) * dx)?;
    }
    let (d1, d2) = five_point(v, dx);
    let (sn, cs) = (x / 2.0).sin_cos();
    let cot = cs / sn;
    let dcot = -0.5 / (sn * sn);
    let res =
        0.5 * kappa * d2 + cot * d1 + (3.0 / kappa - 0.5) * dcot * v[2] - v[2] / (2.0 * kappa);
    Ok(res.abs() / (v[2].abs() + d1.abs() + d2.abs()))
}
