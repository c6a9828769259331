//! Truncated real power series, used to extract residues at higher-order
//! poles from theta-function jets.

/// Product of two series truncated to `n` coefficients.
pub fn mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate().take(n) {
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Reciprocal `1/a` truncated to `n` coefficients; requires `a[0] ≠ 0`.
pub fn recip(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    out[0] = 1.0 / a[0];
    for k in 1..n {
        let s: f64 = (1..=k)
            .map(|j| a.get(j).copied().unwrap_or(0.0) * out[k - j])
            .sum();
        out[k] = -s / a[0];
    }
    out
}

/// Non-negative integer power truncated to `n` coefficients.
pub fn powi(a: &[f64], k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    out[0] = 1.0;
    for _ in 0..k {
        out = mul(&out, a, n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series() {
        // 1/(1 − u) = Σ u^k; its square has coefficients k + 1.
        let r = recip(&[1.0, -1.0], 5);
        assert_eq!(r, vec![1.0; 5]);
        assert_eq!(powi(&r, 2, 5), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn recip_inverts() {
        let a = [2.0, 0.5, -1.0, 0.25];
        let p = mul(&a, &recip(&a, 4), 4);
        for (k, v) in p.iter().enumerate() {
            assert!((v - if k == 0 { 1.0 } else { 0.0 }).abs() < 1e-15);
        }
    }
}
