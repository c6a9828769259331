//! Green's functions and Gaussian-free-field correlators of the cylinder
//! `C_r = {0 < Im z < r} / 2πℤ` for excursion-reflected (ER) and Dirichlet
//! boundary conditions, evaluated in the identity chart.
//!
//! * ER Green's function: `G(ζ,z) = log |Θ(ζ − z̄) / Θ(ζ − z)|`;
//! * Dirichlet: the same minus `Im ζ · Im z / r`, equivalently the `Θ̃` ratio.
//!
//! The field two-point function is `2G`, the `n`-point function is the sum over
//! perfect matchings of products of two-point functions, and the current
//! correlators are obtained by differentiating in `ζ` and `z`.

use crate::error::{Result, SleError};
use crate::special_fn::{kernel_jet, loewner_kernel_h, theta, theta_tilde, SeriesControl};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Largest number of points accepted by [`gff_n_point`]; `(n−1)!!` grows fast.
pub const MAX_WICK_POINTS: usize = 12;

/// Distance below which two points (or a point and a reflection) coincide.
pub const COINCIDENCE_TOL: f64 = 1e-9;

/// Boundary condition selecting `Θ` (ER) or `Θ̃` (Dirichlet) throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Excursion-reflected on the inner boundary.
    Er,
    /// Zero boundary values on both boundary components.
    Dirichlet,
}

impl FromStr for BoundaryCondition {
    type Err = SleError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(BoundaryCondition::Er),
            "dirichlet" | "diri" => Ok(BoundaryCondition::Dirichlet),
            other => Err(SleError::InvalidInput(format!(
                "unknown boundary condition '{other}' (expected er or dirichlet)"
            ))),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Er => write!(f, "er"),
            BoundaryCondition::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

/// Checks `0 ≤ Im z ≤ r` and finiteness.
pub fn check_cylinder_point(r: f64, z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || z.im < 0.0 || z.im > r {
        return Err(SleError::OutOfRange {
            what: "Im z",
            value: z.im,
            reason: format!("point {z} must lie in the closed strip 0 <= Im z <= {r}"),
        });
    }
    Ok(())
}

fn check_pair(r: f64, zeta: Complex64, z: Complex64) -> Result<()> {
    check_cylinder_point(r, zeta)?;
    check_cylinder_point(r, z)?;
    if (zeta - z).norm() < COINCIDENCE_TOL || (zeta - z.conj()).norm() < COINCIDENCE_TOL {
        return Err(SleError::CoincidentPoints(format!("{zeta} and {z}")));
    }
    Ok(())
}

/// Green's function `G_r(ζ, z)` of the chosen boundary condition.
pub fn green(
    bc: BoundaryCondition,
    r: f64,
    zeta: Complex64,
    z: Complex64,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_pair(r, zeta, z)?;
    let er = theta(r, zeta - z.conj(), ctl)?.norm().ln() - theta(r, zeta - z, ctl)?.norm().ln();
    Ok(match bc {
        BoundaryCondition::Er => er,
        BoundaryCondition::Dirichlet => er - zeta.im * z.im / r,
    })
}

/// Field two-point function `E[Φ(ζ)Φ(z)] = 2G`.  The Dirichlet value is
/// computed from the `Θ̃` ratio, which agrees with `2G_Dirichlet` identically.
pub fn gff_two_point(
    bc: BoundaryCondition,
    r: f64,
    zeta: Complex64,
    z: Complex64,
    ctl: &SeriesControl,
) -> Result<f64> {
    match bc {
        BoundaryCondition::Er => Ok(2.0 * green(bc, r, zeta, z, ctl)?),
        BoundaryCondition::Dirichlet => {
            check_pair(r, zeta, z)?;
            let num = theta_tilde(r, zeta - z.conj(), ctl)?.norm().ln();
            let den = theta_tilde(r, zeta - z, ctl)?.norm().ln();
            Ok(2.0 * (num - den))
        }
    }
}

/// `n`-point field correlator by Wick pairing; zero for odd `n`.
pub fn gff_n_point(
    bc: BoundaryCondition,
    r: f64,
    points: &[Complex64],
    ctl: &SeriesControl,
) -> Result<f64> {
    let n = points.len();
    if n > MAX_WICK_POINTS {
        return Err(SleError::TooManyPoints {
            n,
            max: MAX_WICK_POINTS,
        });
    }
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        check_cylinder_point(r, points[i])?;
        for j in (i + 1)..n {
            let v = gff_two_point(bc, r, points[i], points[j], ctl)?;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(pairing_sum(&cov, &idx))
}

/// Pair the first remaining index with each other one and recurse.
fn pairing_sum(cov: &[Vec<f64>], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut total = 0.0;
    for k in 1..idx.len() {
        let rest: Vec<usize> = idx[1..]
            .iter()
            .enumerate()
            .filter(|&(j, _)| j + 1 != k)
            .map(|(_, &v)| v)
            .collect();
        total += cov[first][idx[k]] * pairing_sum(cov, &rest);
    }
    total
}

fn kernel(bc: BoundaryCondition, r: f64, w: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    let h = loewner_kernel_h(r, w, ctl)?;
    Ok(match bc {
        BoundaryCondition::Er => h,
        BoundaryCondition::Dirichlet => h + w / r,
    })
}

/// Current–field correlator `E[J(ζ)Φ(z)] = ½(H(ζ − z̄) − H(ζ − z))`, with `H̃`
/// for Dirichlet.  Equals `∂_ζ` of the two-point function.
pub fn current_gff(
    bc: BoundaryCondition,
    r: f64,
    zeta: Complex64,
    z: Complex64,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    check_pair(r, zeta, z)?;
    Ok(0.5 * (kernel(bc, r, zeta - z.conj(), ctl)? - kernel(bc, r, zeta - z, ctl)?))
}

/// Current–current correlator `E[J(ζ)J(z)] = ½H'(ζ − z)` (`H̃' = H' + 1/r` for Dirichlet).
pub fn current_current(
    bc: BoundaryCondition,
    r: f64,
    zeta: Complex64,
    z: Complex64,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    check_pair(r, zeta, z)?;
    let dh = kernel_jet(r, zeta - z, ctl)?.dh;
    Ok(match bc {
        BoundaryCondition::Er => 0.5 * dh,
        BoundaryCondition::Dirichlet => 0.5 * (dh + 1.0 / r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryCondition::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn er_green_fixed_value() {
        let ctl = SeriesControl::default();
        // Oracle: log|θ1((ζ−z̄)/2, e^{-1}) / θ1((ζ−z)/2, e^{-1})| evaluated independently.
        let v = green(Er, 1.0, c(0.5, 0.3), c(1.0, 0.6), &ctl).unwrap();
        assert!((v - ER_GREEN_FROZEN).abs() < 1e-13, "{v}");
    }
    const ER_GREEN_FROZEN: f64 = 0.474_142_992_038_096_08;

    #[test]
    fn symmetric_in_arguments() {
        let ctl = SeriesControl::default();
        for bc in [Er, Dirichlet] {
            let a = green(bc, 1.3, c(0.2, 0.4), c(2.5, 1.1), &ctl).unwrap();
            let b = green(bc, 1.3, c(2.5, 1.1), c(0.2, 0.4), &ctl).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_ratio_form_matches() {
        let ctl = SeriesControl::default();
        let (zeta, z) = (c(0.7, 0.2), c(-1.9, 0.8));
        let a = gff_two_point(Dirichlet, 1.0, zeta, z, &ctl).unwrap();
        let b = 2.0 * (green(Er, 1.0, zeta, z, &ctl).unwrap() - zeta.im * z.im);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn coincident_points_rejected() {
        let ctl = SeriesControl::default();
        assert!(matches!(
            green(Er, 1.0, c(0.5, 0.5), c(0.5, 0.5), &ctl),
            Err(SleError::CoincidentPoints(_))
        ));
    }

    #[test]
    fn odd_point_count_vanishes_and_two_point_reduces() {
        let ctl = SeriesControl::default();
        let pts = [c(0.1, 0.2), c(1.0, 0.5), c(2.0, 0.7)];
        assert_eq!(gff_n_point(Er, 1.0, &pts, &ctl).unwrap(), 0.0);
        let two = gff_n_point(Er, 1.0, &pts[..2], &ctl).unwrap();
        let direct = gff_two_point(Er, 1.0, pts[0], pts[1], &ctl).unwrap();
        assert!((two - direct).abs() < 1e-15);
    }

    #[test]
    fn too_many_points_rejected() {
        let ctl = SeriesControl::default();
        let pts: Vec<_> = (0..14).map(|k| c(0.4 * k as f64, 0.5)).collect();
        assert!(matches!(
            gff_n_point(Er, 1.0, &pts, &ctl),
            Err(SleError::TooManyPoints { .. })
        ));
    }

    #[test]
    fn current_is_derivative_of_two_point() {
        let ctl = SeriesControl::default();
        let h = 1e-5;
        let (zeta, z) = (c(0.9, 0.35), c(-0.4, 0.6));
        for bc in [Er, Dirichlet] {
            let f = |w: Complex64| gff_two_point(bc, 1.0, w, z, &ctl).unwrap();
            let dx = (f(zeta + h) - f(zeta - h)) / (2.0 * h);
            let dy = (f(zeta + c(0.0, h)) - f(zeta - c(0.0, h))) / (2.0 * h);
            let fd = c(dx, -dy) * 0.5;
            let an = current_gff(bc, 1.0, zeta, z, &ctl).unwrap();
            assert!((fd - an).norm() < 1e-6, "{bc}: {fd} vs {an}");
        }
    }

    #[test]
    fn current_current_symmetric_and_matches_derivative() {
        let ctl = SeriesControl::default();
        let (zeta, z) = (c(0.9, 0.35), c(-0.4, 0.6));
        let h = 1e-5;
        for bc in [Er, Dirichlet] {
            let a = current_current(bc, 1.0, zeta, z, &ctl).unwrap();
            let b = current_current(bc, 1.0, z, zeta, &ctl).unwrap();
            assert!((a - b).norm() < 1e-12);
            // ∂_z of E[J(ζ)Φ(z)] by finite differences.
            let f = |w: Complex64| current_gff(bc, 1.0, zeta, w, &ctl).unwrap();
            let dx = (f(z + h) - f(z - h)) / (2.0 * h);
            let dy = (f(z + c(0.0, h)) - f(z - c(0.0, h))) / (2.0 * h);
            let fd = (dx - c(0.0, 1.0) * dy) * 0.5;
            assert!((fd - a).norm() < 1e-6, "{bc}: {fd} vs {a}");
        }
    }

    #[test]
    fn parses_boundary_condition() {
        assert_eq!("ER".parse::<BoundaryCondition>().unwrap(), Er);
        assert_eq!("dirichlet".parse::<BoundaryCondition>().unwrap(), Dirichlet);
        assert!("neumann".parse::<BoundaryCondition>().is_err());
    }
}
