//! Summary statistics and Kolmogorov–Smirnov distances.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (`n - 1` denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Unbiased sample covariance of paired sequences.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() - 1) as f64
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile (Hyndman–Fan type 7).
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    quantile_sorted(&sorted(xs), p)
}

pub fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// `sup_x |F̂(x) - F(x)|` for a continuous reference CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    d
}

/// `sup_x |F̂_a(x) - F̂_b(x)|`, exact under ties.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Exact `P(D_{n,m} ≥ d)` under the permutation null (continuous data):
/// paths through the `n × m` lattice that stay strictly inside the band.
pub fn ks_two_sample_sf(n: usize, m: usize, d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let (nf, mf) = (n as f64, m as f64);
    let inside = |i: usize, j: usize| (i as f64 / nf - j as f64 / mf).abs() < d - 1e-12;
    // probability mass of uniformly random paths, propagated row by row
    let mut row = vec![0.0; m + 1];
    row[0] = 1.0;
    for j in 1..=m {
        row[j] = if inside(0, j) { row[j - 1] * (m - j + 1) as f64 / (n + m - j + 1) as f64 } else { 0.0 };
    }
    for i in 1..=n {
        let mut next = vec![0.0; m + 1];
        for j in 0..=m {
            if !inside(i, j) {
                continue;
            }
            let remaining = (n + m - i - j + 1) as f64;
            let from_below = row[j] * (n - i + 1) as f64 / remaining;
            let from_left = if j > 0 { next[j - 1] * (m - j + 1) as f64 / remaining } else { 0.0 };
            next[j] = from_below + from_left;
        }
        row = next;
    }
    (1.0 - row[m]).clamp(0.0, 1.0)
}

/// Asymptotic Kolmogorov tail `P(K > x) = 2 Σ (-1)^{k-1} e^{-2k²x²}`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
