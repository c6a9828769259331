//! Regularized Gauss hypergeometric function `₂F̃₁(a,b;c;z) = ₂F₁(a,b;c;z)/Γ(c)`
//! for real parameters and real `z < 1`.
//!
//! Negative arguments are first mapped into `[0, 1)` by the Pfaff
//! transformation `F(a,b;c;z) = (1−z)^{−a} F(a, c−b; c; z/(z−1))`; the series
//! is then summed with a term-ratio tail bound as the stopping rule.

use crate::error::{Result, SleError};

/// Upper bound on the number of series terms.
pub const MAX_TERMS: usize = 2_000_000;

fn is_nonpositive_integer(c: f64) -> bool {
    c <= 0.0 && c == c.round()
}

fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).map(|k| a + k as f64).product()
}

/// `₂F̃₁(a,b;c;z)` for `z < 1`; entire in `c`, so nonpositive integer `c` is
/// allowed.
pub fn regularized_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) || z >= 1.0 {
        return Err(SleError::OutOfRange {
            what: "z",
            value: z,
            reason: "hypergeometric argument must be finite and below 1".into(),
        });
    }
    if z < 0.0 {
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * series(a, c - b, c, w)?);
    }
    series(a, b, c, z)
}

/// Regularized series on `0 ≤ z < 1`.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    // With c = −k the first k+1 terms vanish (1/Γ(c+n) = 0).
    let n0 = if is_nonpositive_integer(c) {
        (-c) as usize + 1
    } else {
        0
    };
    let mut fact = 1.0;
    for k in 1..=n0 {
        fact *= k as f64;
    }
    let mut term = pochhammer(a, n0) * pochhammer(b, n0) * z.powi(n0 as i32)
        / (fact * libm::tgamma(c + n0 as f64));
    let mut sum = term;
    if term == 0.0 {
        return Ok(0.0);
    }
    for n in n0..MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) * z / ((nf + 1.0) * (c + nf));
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let rho = ratio.abs().max(z);
        if n > n0 + 2 && rho < 1.0 && term.abs() * rho / (1.0 - rho) <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(SleError::HypergeometricNonConvergent)
}
