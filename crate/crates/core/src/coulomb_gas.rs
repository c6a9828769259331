//! Coulomb gas layer: SLE parameters, charged divisors, Coulomb gas
//! correlators, one-leg partition functions `Z_β`, the SLE drift `Λ_β`, and
//! the one-point function of the inserted field.
//!
//! Conventions (identity chart of the cylinder `C_r`):
//!
//! * `a = √(2/κ)`, `b = √(κ/8) − √(2/κ)`, `λ(σ) = σ²/2 − bσ`;
//! * a [`ForceDivisor`] carries the seed charge `a` at the marked point `p` and
//!   charges `β_j` at force points `q_j` on the outer (`Im q = 0`) or inner
//!   (`Im q = r`) boundary; neutrality is `a + Σβ_j = 0`;
//! * the kernel `K` is `H` for ER and `H̃ = H + z/r` for Dirichlet.
//!
//! Fractional powers of theta values use the principal branch.  Correlator
//! factors are multiplied in a canonical order (decreasing `Re z`, then
//! decreasing `Im z`, then decreasing charges), so the value does not depend
//! on the order in which divisor entries are listed, and boundary–boundary
//! factors have arguments on the positive side where `Θ` and `Θ̃` are positive.

use crate::correlations::BoundaryCondition;
use crate::error::{Result, SleError};
use crate::special_fn::{
    kernel_jet, loewner_kernel_h, loewner_kernel_hi, theta, theta_prime_zero, theta_tilde,
    SeriesControl,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;

/// Tolerance for the neutrality conditions.
pub const NEUTRALITY_TOL: f64 = 1e-12;

/// Tolerance used to decide that a force point sits on a boundary component.
pub const BOUNDARY_TOL: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `κ` together with the derived Coulomb gas constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SleParams {
    /// SLE parameter `κ > 0`.
    pub kappa: f64,
    /// Seed charge `a = √(2/κ)`.
    pub a: f64,
    /// Background charge `b = √(κ/8) − √(2/κ)`.
    pub b: f64,
    /// Central charge `c = 1 − 12b²`.
    pub c: f64,
    /// Conformal weight `h_{1,2} = (6 − κ)/(2κ)`.
    pub h12: f64,
}

impl SleParams {
    /// Derives the constants; `κ` must be positive and finite.
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(SleError::OutOfRange {
                what: "kappa",
                value: kappa,
                reason: "must be positive and finite".into(),
            });
        }
        let a = (2.0 / kappa).sqrt();
        let b = (kappa / 8.0).sqrt() - a;
        Ok(SleParams {
            kappa,
            a,
            b,
            c: 1.0 - 12.0 * b * b,
            h12: (6.0 - kappa) / (2.0 * kappa),
        })
    }
}

/// Conformal dimension `λ(σ) = σ²/2 − bσ` of a vertex charge.
pub fn conformal_dimension(sigma: f64, params: &SleParams) -> f64 {
    sigma * sigma / 2.0 - params.b * sigma
}

/// One entry of a [`DoubleDivisor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    /// Position in the closed strip.
    pub point: Complex64,
    /// Holomorphic charge `σ`.
    pub sigma: f64,
    /// Anti-holomorphic charge `σ_*`.
    pub sigma_star: f64,
}

/// A finite collection of charged points satisfying `Σ(σ_j + σ_{*j}) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleDivisor {
    entries: Vec<Charge>,
}

impl DoubleDivisor {
    /// Validates distinctness and neutrality.
    pub fn new(entries: Vec<Charge>) -> Result<Self> {
        for (j, e) in entries.iter().enumerate() {
            if !(e.point.re.is_finite()
                && e.point.im.is_finite()
                && e.sigma.is_finite()
                && e.sigma_star.is_finite())
            {
                return Err(SleError::InvalidInput(format!("entry #{j} is not finite")));
            }
            for f in &entries[..j] {
                if (e.point - f.point).norm() < 1e-9 {
                    return Err(SleError::CoincidentPoints(format!(
                        "divisor points {} and {}",
                        e.point, f.point
                    )));
                }
            }
        }
        let total: f64 = entries.iter().map(|e| e.sigma + e.sigma_star).sum();
        let scale: f64 = entries
            .iter()
            .map(|e| e.sigma.abs() + e.sigma_star.abs())
            .sum::<f64>()
            .max(1.0);
        if total.abs() > NEUTRALITY_TOL * scale {
            return Err(SleError::NeutralityViolation { total });
        }
        Ok(DoubleDivisor { entries })
    }

    /// The entries as supplied.
    pub fn entries(&self) -> &[Charge] {
        &self.entries
    }
}

fn canonical_order(a: &Charge, b: &Charge) -> Ordering {
    b.point
        .re
        .total_cmp(&a.point.re)
        .then(b.point.im.total_cmp(&a.point.im))
        .then(b.sigma.total_cmp(&a.sigma))
        .then(b.sigma_star.total_cmp(&a.sigma_star))
}

/// Principal power `w^e`, with `w^0 = 1` even at `w = 0`.
fn principal_pow(w: Complex64, e: f64, what: &str) -> Result<Complex64> {
    if e == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if w.norm() == 0.0 {
        return Err(SleError::CoincidentPoints(format!(
            "vanishing theta factor in {what}"
        )));
    }
    Ok((w.ln() * e).exp())
}

fn theta_bc(bc: BoundaryCondition, r: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    match bc {
        BoundaryCondition::Er => theta(r, z, ctl),
        BoundaryCondition::Dirichlet => theta_tilde(r, z, ctl),
    }
}

/// Coulomb gas correlation function of a neutral divisor in the identity
/// chart: `Θ'(0)^{Σ(σ²+σ_*²)/2} Π_j Θ(z_j − z̄_j)^{σ_jσ_{*j}} Π_{j<k}[four-factor product]`,
/// with `Θ → Θ̃` for Dirichlet.
pub fn coulomb_correlator(
    bc: BoundaryCondition,
    r: f64,
    dd: &DoubleDivisor,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    let tol = 1e-12 * r.max(1.0);
    for (j, e) in dd.entries.iter().enumerate() {
        let y = e.point.im;
        if y < -tol || y > r + tol {
            return Err(SleError::OutOfRange {
                what: "Im z",
                value: y,
                reason: format!("divisor point must lie in the closed strip of width {r}"),
            });
        }
        let on_boundary = y.abs() <= tol || (y - r).abs() <= tol;
        if on_boundary && e.sigma * e.sigma_star != 0.0 {
            return Err(SleError::BoundaryRenormalizationRequired { index: j });
        }
    }
    let mut es = dd.entries.clone();
    es.sort_by(canonical_order);

    let tp = theta_prime_zero(r, ctl)?;
    let exponent: f64 = es
        .iter()
        .map(|e| 0.5 * (e.sigma * e.sigma + e.sigma_star * e.sigma_star))
        .sum();
    let mut value = Complex64::new(tp.powf(exponent), 0.0);
    for e in &es {
        let ex = e.sigma * e.sigma_star;
        if ex != 0.0 {
            let w = theta_bc(bc, r, e.point - e.point.conj(), ctl)?;
            value *= principal_pow(w, ex, "self factor")?;
        }
    }
    for j in 0..es.len() {
        for k in (j + 1)..es.len() {
            let (zj, zk) = (es[j].point, es[k].point);
            let factors = [
                (zj - zk, es[j].sigma * es[k].sigma),
                (zj.conj() - zk, es[j].sigma_star * es[k].sigma),
                (zj - zk.conj(), es[j].sigma * es[k].sigma_star),
                (zj.conj() - zk.conj(), es[j].sigma_star * es[k].sigma_star),
            ];
            for (w, ex) in factors {
                if ex != 0.0 {
                    value *= principal_pow(theta_bc(bc, r, w, ctl)?, ex, "pair factor")?;
                }
            }
        }
    }
    Ok(value)
}

/// A force point `q` with charge `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcePoint {
    /// Position on the outer (`Im q = 0`) or inner (`Im q = r`) boundary.
    pub q: Complex64,
    /// Charge `β`.
    pub beta: f64,
}

/// Seed charge at the marked point plus charged force points.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceDivisor {
    seed_charge: f64,
    points: Vec<ForcePoint>,
}

impl ForceDivisor {
    /// Builds a divisor satisfying `seed_charge + Σβ_j = 0`.
    pub fn new(seed_charge: f64, points: Vec<ForcePoint>) -> Result<Self> {
        let d = Self::unbalanced(seed_charge, points)?;
        let total = d.total_charge();
        let scale = seed_charge.abs() + d.points.iter().map(|p| p.beta.abs()).sum::<f64>();
        if total.abs() > NEUTRALITY_TOL * scale.max(1.0) {
            return Err(SleError::NeutralityViolation { total });
        }
        Ok(d)
    }

    /// Builds a divisor without the neutrality check; used for negative
    /// controls that deliberately break it.
    pub fn unbalanced(seed_charge: f64, points: Vec<ForcePoint>) -> Result<Self> {
        if !seed_charge.is_finite()
            || points
                .iter()
                .any(|p| !(p.q.re.is_finite() && p.q.im.is_finite() && p.beta.is_finite()))
        {
            return Err(SleError::InvalidInput("non-finite force divisor".into()));
        }
        Ok(ForceDivisor {
            seed_charge,
            points,
        })
    }

    /// The single-force-point divisor with `β = −a`.
    pub fn one_leg(params: &SleParams, q: Complex64) -> Self {
        ForceDivisor {
            seed_charge: params.a,
            points: vec![ForcePoint { q, beta: -params.a }],
        }
    }

    /// `a + Σβ_j`.
    pub fn total_charge(&self) -> f64 {
        self.seed_charge + self.points.iter().map(|p| p.beta).sum::<f64>()
    }

    /// Seed charge at the marked point.
    pub fn seed_charge(&self) -> f64 {
        self.seed_charge
    }

    /// The force points.
    pub fn points(&self) -> &[ForcePoint] {
        &self.points
    }

    /// Positions of the force points.
    pub fn positions(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.q).collect()
    }

    /// Charges of the force points.
    pub fn betas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.beta).collect()
    }

    /// Same charges at new positions (e.g. images under a Loewner map).
    pub fn moved(&self, positions: &[Complex64]) -> Result<Self> {
        if positions.len() != self.points.len() {
            return Err(SleError::InvalidInput(format!(
                "{} positions for {} force points",
                positions.len(),
                self.points.len()
            )));
        }
        Ok(ForceDivisor {
            seed_charge: self.seed_charge,
            points: self
                .points
                .iter()
                .zip(positions)
                .map(|(p, &q)| ForcePoint { q, beta: p.beta })
                .collect(),
        })
    }

    fn require_neutral(&self) -> Result<()> {
        let total = self.total_charge();
        let scale = self.seed_charge.abs() + self.points.iter().map(|p| p.beta.abs()).sum::<f64>();
        if total.abs() > NEUTRALITY_TOL * scale.max(1.0) {
            return Err(SleError::NeutralityViolation { total });
        }
        Ok(())
    }
}

/// Which boundary component a force point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    /// `Im q = 0`
    Outer,
    /// `Im q = r`
    Inner,
}

/// Classifies `q` as lying on the outer or inner boundary of `S_r`.
pub fn classify_boundary(r: f64, q: Complex64) -> Result<BoundarySide> {
    let tol = BOUNDARY_TOL * r.max(1.0);
    if q.im.abs() <= tol {
        Ok(BoundarySide::Outer)
    } else if (q.im - r).abs() <= tol {
        Ok(BoundarySide::Inner)
    } else {
        Err(SleError::UnsupportedForce(format!(
            "force point {q} is not on a boundary component of the strip of width {r}"
        )))
    }
}

/// Projects a classified boundary point exactly onto its boundary line.
fn snap(r: f64, q: Complex64) -> Result<(BoundarySide, Complex64)> {
    let side = classify_boundary(r, q)?;
    Ok(match side {
        BoundarySide::Outer => (side, Complex64::new(q.re, 0.0)),
        BoundarySide::Inner => (side, Complex64::new(q.re, r)),
    })
}

/// One-leg partition function `Z_β(p, q)` (positive).
///
/// Dirichlet: `Θ'(0)^{a²/2+Σβ²/2} Π|Θ̃(p−q_j)|^{aβ_j} Π_{j<k}|Θ̃(q_j−q_k)|^{β_jβ_k}`.
/// ER: `Π|Θ(p−q_j)|^{aβ_j} Π_{j<k}|Θ(q_j−q_k)Θ(q_j−q̄_k)|^{β_jβ_k/2}` (constant fixed to 1).
pub fn one_leg_partition(
    bc: BoundaryCondition,
    r: f64,
    p: f64,
    force: &ForceDivisor,
    ctl: &SeriesControl,
) -> Result<f64> {
    force.require_neutral()?;
    let a = force.seed_charge;
    let mut qs = Vec::with_capacity(force.points.len());
    for fp in &force.points {
        let (side, q) = snap(r, fp.q)?;
        if side == BoundarySide::Outer && ((p - q.re) / 2.0).sin().abs() < 1e-9 {
            return Err(SleError::CoincidentPoints(format!(
                "marked point {p} and force point {}",
                q.re
            )));
        }
        qs.push((q, fp.beta));
    }
    let pc = Complex64::new(p, 0.0);
    let mut log_z = 0.0;
    match bc {
        BoundaryCondition::Dirichlet => {
            let exponent = 0.5 * a * a + 0.5 * qs.iter().map(|(_, b)| b * b).sum::<f64>();
            log_z += exponent * theta_prime_zero(r, ctl)?.ln();
            for (q, beta) in &qs {
                log_z += a * beta * theta_tilde(r, pc - q, ctl)?.norm().ln();
            }
            for j in 0..qs.len() {
                for k in (j + 1)..qs.len() {
                    let w = theta_tilde(r, qs[j].0 - qs[k].0, ctl)?;
                    log_z += qs[j].1 * qs[k].1 * checked_ln(w.norm())?;
                }
            }
        }
        BoundaryCondition::Er => {
            for (q, beta) in &qs {
                log_z += a * beta * theta(r, pc - q, ctl)?.norm().ln();
            }
            for j in 0..qs.len() {
                for k in (j + 1)..qs.len() {
                    let w1 = theta(r, qs[j].0 - qs[k].0, ctl)?.norm();
                    let w2 = theta(r, qs[j].0 - qs[k].0.conj(), ctl)?.norm();
                    log_z += 0.5 * qs[j].1 * qs[k].1 * checked_ln(w1 * w2)?;
                }
            }
        }
    }
    Ok(log_z.exp())
}

fn checked_ln(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(SleError::CoincidentPoints("coincident force points".into()));
    }
    Ok(x.ln())
}

/// Drift `Λ` for force points at `positions` with charges `betas`.
///
/// ER: `√(κ/2)[Σ_{outer} βH(ξ−q) + Σ_{inner} βH_I(ξ−Re q)]`;
/// Dirichlet: `√(κ/2) Σ β H̃(ξ−q)`.  Points are snapped onto their boundary
/// line before evaluation; the imaginary part of the result is checked to be
/// below `1e−10` and discarded.
pub fn drift_lambda_at(
    bc: BoundaryCondition,
    r: f64,
    xi: f64,
    positions: &[Complex64],
    betas: &[f64],
    kappa: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (&q, &beta) in positions.iter().zip(betas) {
        let (side, q) = snap(r, q)?;
        let w = Complex64::new(xi, 0.0) - q;
        let k = match (bc, side) {
            (BoundaryCondition::Er, BoundarySide::Outer) => loewner_kernel_h(r, w, ctl)?,
            (BoundaryCondition::Er, BoundarySide::Inner) => {
                loewner_kernel_hi(r, Complex64::new(w.re, 0.0), ctl)?
            }
            (BoundaryCondition::Dirichlet, _) => loewner_kernel_h(r, w, ctl)? + w / r,
        };
        sum += beta * k;
    }
    let value = (kappa / 2.0).sqrt() * sum;
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(SleError::BranchTracking(format!(
            "drift has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Drift `Λ_β(ξ)` of the one-leg SLE with the given force divisor.
pub fn drift_lambda(
    bc: BoundaryCondition,
    r: f64,
    xi: f64,
    force: &ForceDivisor,
    params: &SleParams,
    ctl: &SeriesControl,
) -> Result<f64> {
    drift_lambda_at(
        bc,
        r,
        xi,
        &force.positions(),
        &force.betas(),
        params.kappa,
        ctl,
    )
}

/// Interior-point form of the Dirichlet drift,
/// `√(κ/2) Σ (β_j/2)(H̃(ξ − z_j) + H̃(ξ − z̄_j))`, used as a cross-check of
/// the boundary form (it reduces to it as `z_j` approaches the outer boundary).
pub fn drift_lambda_bulk_dirichlet(
    r: f64,
    xi: f64,
    points: &[Complex64],
    betas: &[f64],
    kappa: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (&z, &beta) in points.iter().zip(betas) {
        if !(z.im > 0.0 && z.im < r) {
            return Err(SleError::UnsupportedForce(format!(
                "bulk force point {z} must be interior"
            )));
        }
        let xc = Complex64::new(xi, 0.0);
        let h1 = loewner_kernel_h(r, xc - z, ctl)? + (xc - z) / r;
        let h2 = loewner_kernel_h(r, xc - z.conj(), ctl)? + (xc - z.conj()) / r;
        sum += 0.5 * beta * (h1 + h2);
    }
    Ok((kappa / 2.0).sqrt() * sum.re)
}

/// Logarithm of `Θ(r,u)` on a fixed continuous branch, defined for
/// `−2r < Im u < 2r`, `Im u ≠ 0`, from the Jacobi triple product
///
/// `log Θ(u) = −r/4 + iu/2 − iπ/2 + log(1 − e^{−iu}) + Σ_{n≥1}[log(1−q^{2n}) + log(1−q^{2n}e^{iu}) + log(1−q^{2n}e^{−iu})]`
///
/// (valid for `−2r < Im u < 0`, every logarithm principal), extended to the
/// upper half by oddness: `log Θ(u) = log Θ(−u) + iπ`.  Real arguments use
/// the lower formula (its boundary values).
pub fn log_theta_branch(r: f64, u: Complex64) -> Result<Complex64> {
    if !(u.im.abs() < 2.0 * r) {
        return Err(SleError::OutOfRange {
            what: "Im u",
            value: u.im,
            reason: format!("log-theta branch defined for |Im u| < {}", 2.0 * r),
        });
    }
    if u.im > 0.0 {
        return Ok(log_theta_lower(r, -u)? + Complex64::new(0.0, PI));
    }
    log_theta_lower(r, u)
}

fn log_theta_lower(r: f64, u: Complex64) -> Result<Complex64> {
    let e_neg = (-I * u).exp();
    if (Complex64::new(1.0, 0.0) - e_neg).norm() == 0.0 {
        return Err(SleError::PoleProximity { re: u.re, im: u.im });
    }
    let e_pos = e_neg.inv();
    let mut acc =
        Complex64::new(-r / 4.0, -PI / 2.0) + I * u * 0.5 + (Complex64::new(1.0, 0.0) - e_neg).ln();
    let grow = e_pos.norm().max(e_neg.norm());
    for n in 1..200 {
        let q2n = (-2.0 * r * n as f64).exp();
        if q2n * grow < 1e-18 {
            return Ok(acc);
        }
        acc += (1.0 - q2n).ln()
            + (Complex64::new(1.0, 0.0) - q2n * e_pos).ln()
            + (Complex64::new(1.0, 0.0) - q2n * e_neg).ln();
    }
    Err(SleError::NonConvergent {
        what: "log-theta product",
        terms: 200,
    })
}

/// One factor `coef · arg F(w − z)` of the inserted field's mean.
struct ArgFactor {
    coef: f64,
    w: Complex64,
}

fn insertion_factors(
    bc: BoundaryCondition,
    r: f64,
    p: f64,
    force: &ForceDivisor,
) -> Result<Vec<ArgFactor>> {
    let a = force.seed_charge;
    let mut out = vec![ArgFactor {
        coef: 2.0 * a,
        w: Complex64::new(p, 0.0),
    }];
    for fp in &force.points {
        let (_, q) = snap(r, fp.q)?;
        match bc {
            BoundaryCondition::Dirichlet => out.push(ArgFactor {
                coef: 2.0 * fp.beta,
                w: q,
            }),
            BoundaryCondition::Er => {
                out.push(ArgFactor {
                    coef: fp.beta,
                    w: q,
                });
                out.push(ArgFactor {
                    coef: fp.beta,
                    w: q.conj(),
                });
            }
        }
    }
    Ok(out)
}

/// `log F(u)` on the canonical branch, `F = Θ` (ER) or `Θ̃` (Dirichlet).
fn log_factor(bc: BoundaryCondition, r: f64, u: Complex64) -> Result<Complex64> {
    let l = log_theta_branch(r, u)?;
    Ok(match bc {
        BoundaryCondition::Er => l,
        BoundaryCondition::Dirichlet => l + u * u / (4.0 * r),
    })
}

/// Mean of the inserted field at `z` evaluated directly on the canonical
/// branch of [`log_theta_branch`].
pub fn insertion_one_point_direct(
    bc: BoundaryCondition,
    r: f64,
    z: Complex64,
    p: f64,
    force: &ForceDivisor,
) -> Result<f64> {
    check_interior(r, z)?;
    let mut m = 0.0;
    for f in insertion_factors(bc, r, p, force)? {
        m += f.coef * log_factor(bc, r, f.w - z)?.im;
    }
    Ok(m)
}

fn check_interior(r: f64, z: Complex64) -> Result<()> {
    if !(z.im > 0.0 && z.im < r && z.re.is_finite()) {
        return Err(SleError::OutOfRange {
            what: "Im z",
            value: z.im,
            reason: format!("evaluation point {z} must be interior to the strip of width {r}"),
        });
    }
    Ok(())
}

/// Mean `M(z)` of the inserted field:
///
/// * Dirichlet: `2a·arg Θ̃(p−z) + 2Σβ_j·arg Θ̃(q_j−z)`;
/// * ER: `2a·arg Θ(p−z) + Σβ_j·arg[Θ(q_j−z)Θ(q̄_j−z)]`.
///
/// Each argument is continued along the straight segment from the anchor
/// `z₀ = π + ir/2` (where it takes its canonical-branch value) to `z`,
/// subdividing until consecutive increments stay below `π/2`.
pub fn insertion_one_point(
    bc: BoundaryCondition,
    r: f64,
    z: Complex64,
    p: f64,
    force: &ForceDivisor,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_interior(r, z)?;
    let anchor = Complex64::new(PI, r / 2.0);
    let mut m = 0.0;
    for f in insertion_factors(bc, r, p, force)? {
        let start = log_factor(bc, r, f.w - anchor)?.im;
        let eval = |s: f64| -> Result<Complex64> {
            let zz = anchor + (z - anchor) * s;
            theta_bc(bc, r, f.w - zz, ctl)
        };
        let mut pieces = 8usize;
        let increment = loop {
            let mut vals = Vec::with_capacity(pieces + 1);
            for k in 0..=pieces {
                let v = eval(k as f64 / pieces as f64)?;
                if v.norm() == 0.0 {
                    return Err(SleError::BranchTracking(format!(
                        "segment from {anchor} to {z} meets a zero"
                    )));
                }
                vals.push(v);
            }
            let steps: Vec<f64> = vals.windows(2).map(|w| (w[1] / w[0]).arg()).collect();
            if steps.iter().all(|d| d.abs() < PI / 2.0) {
                break steps.iter().sum::<f64>();
            }
            pieces *= 2;
            if pieces > 1 << 16 {
                return Err(SleError::BranchTracking(format!(
                    "argument continuation from {anchor} to {z} did not resolve"
                )));
            }
        };
        m += f.coef * (start + increment);
    }
    Ok(m)
}

/// Drift prefactor of the one-point observable, `(a + Σβ_j)(K²/2 + K')(z)`
/// with `K = H` (ER) or `H̃` (Dirichlet); the Itô drift of `M` is its
/// imaginary part.  Vanishes for neutral divisors.
pub fn observable_drift_coefficient(
    bc: BoundaryCondition,
    r: f64,
    z: Complex64,
    force: &ForceDivisor,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    check_interior(r, z)?;
    let j = kernel_jet(r, z, ctl)?;
    let (k, dk) = match bc {
        BoundaryCondition::Er => (j.h, j.dh),
        BoundaryCondition::Dirichlet => (j.h + z / r, j.dh + 1.0 / r),
    };
    Ok(force.total_charge() * (0.5 * k * k + dk))
}
