//! Special functions shared by the distribution catalog and the Gaussian
//! covariance oracles.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::LazyLock;

/// `1 / sqrt(2π)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF, `0.5 erfc(-z / √2)`.
///
/// `libm::erfc` is a port of the FreeBSD msun routine (error below 1 ulp),
/// so the result is accurate to well under 1e-15 absolute.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(z)` without cancellation.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Standard normal quantile by monotone bisection on [`std_normal_cdf`].
///
/// Returns `-∞` at 0 and `+∞` at 1. The bracket is narrowed until its width
/// is below `1e-12 · max(1, |z|)`.
pub fn std_normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if std_normal_cdf(mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    hi
}

/// Gauss–Legendre rule on `[-1, 1]` with `n` nodes (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The fixed 64-node rule used by the bivariate normal CDF.
pub(crate) static GL64: LazyLock<(Vec<f64>, Vec<f64>)> = LazyLock::new(|| gauss_legendre(64));

/// Integrate `f` over `[a, b]` with the fixed 64-node Gauss–Legendre rule.
pub(crate) fn gl64_integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = &*GL64;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Binomial coefficient as a float (small arguments only).
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        // Φ(1.96) = 0.9750021048517795 (mpmath, 30 digits).
        assert!((std_normal_cdf(1.96) - 0.975_002_104_851_779_5).abs() < 1e-15);
        assert!((std_normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
        assert!((std_normal_sf(8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &u in &[1e-10, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let z = std_normal_quantile(u);
            assert!((std_normal_cdf(z) - u).abs() < 1e-12, "u={u}");
        }
        assert_eq!(std_normal_quantile(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((int - 2.0 / 11.0).abs() < 1e-14);
        let (x5, w5) = gauss_legendre(5);
        let int5: f64 = x5.iter().zip(&w5).map(|(x, w)| w * x.powi(8)).sum();
        assert!((int5 - 2.0 / 9.0).abs() < 1e-14);
    }
}
