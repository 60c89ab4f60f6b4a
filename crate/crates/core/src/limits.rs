//! Long-run covariance of the limiting Gaussian functional,
//! `σ(f, g) = Cov(f(X₀), g(X₀)) + Σ_{k≥1} [Cov(f(X₀), g(X_k)) + Cov(f(X_k), g(X₀))]`.
//!
//! The analytic route truncates the series at lag `K` and refuses to answer
//! when its tail bound exceeds the requested tolerance.

use nalgebra::DMatrix;

use crate::bvcalc::BVFunction;
use crate::error::{invalid, unsupported, Result};
use crate::generators::{
    gaussian_lag_correlation, indicator_autocovariance, stationary_cdf, stationary_vector, transition_power,
    GeneratorKind, GeneratorSpec,
};

pub const DEFAULT_TRUNCATION_LAG: usize = 60;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Largest power `P^r` tried when looking for a strictly contracting chain.
const MAX_CONTRACTION_POWER: usize = 64;

#[derive(Debug, Clone)]
pub struct CovarianceQuery {
    pub f: BVFunction,
    pub g: BVFunction,
    pub spec: GeneratorSpec,
    pub truncation_lag: usize,
    pub tolerance: f64,
}

impl CovarianceQuery {
    pub fn new(f: BVFunction, g: BVFunction, spec: GeneratorSpec) -> Self {
        Self { f, g, spec, truncation_lag: DEFAULT_TRUNCATION_LAG, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn with_truncation(mut self, lag: usize, tolerance: f64) -> Self {
        self.truncation_lag = lag;
        self.tolerance = tolerance;
        self
    }
}

/// `Σ_{k>K}` of the absolute lag terms, bounded from above.
pub fn truncation_tail_bound(q: &CovarianceQuery) -> Result<f64> {
    q.spec.validate()?;
    let k = q.truncation_lag;
    match &q.spec.kind {
        GeneratorKind::Iid { .. } => Ok(0.0),
        GeneratorKind::Ar1 { rho } => {
            let (a, b) = (ray_mass(&q.f)?, ray_mass(&q.g)?);
            let r = rho.abs();
            // |Cov(1{X₀<s}, 1{X_k<t})| ≤ arcsin|ρᵏ|/2π ≤ |ρ|ᵏ/4, two one-sided sums
            Ok(a * b * r.powi(k as i32 + 1) / (2.0 * (1.0 - r)))
        }
        GeneratorKind::Linear { coefficients, .. } => {
            let (a, b) = (ray_mass(&q.f)?, ray_mass(&q.g)?);
            let mut tail = 0.0;
            for lag in k + 1..coefficients.len() {
                tail += gaussian_lag_correlation(&q.spec, lag)?.abs() / 4.0;
            }
            Ok(2.0 * a * b * tail)
        }
        GeneratorKind::Markov { transition, states } => {
            let pi = stationary_vector(transition)?;
            let fv: Vec<f64> = states.iter().map(|&x| q.f.eval(x)).collect();
            let gv: Vec<f64> = states.iter().map(|&x| q.g.eval(x)).collect();
            let spread = |v: &[f64]| {
                let mean: f64 = pi.iter().zip(v).map(|(p, x)| p * x).sum();
                let abs_dev: f64 = pi.iter().zip(v).map(|(p, x)| p * (x - mean).abs()).sum();
                let osc = v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    - v.iter().copied().fold(f64::INFINITY, f64::min);
                (abs_dev, osc)
            };
            let ((af, of), (ag, og)) = (spread(&fv), spread(&gv));
            let weight = af * og + ag * of;
            if weight == 0.0 {
                return Ok(0.0);
            }
            let (r, contraction) = contracting_power(transition)?;
            // δ(P^k) ≤ δ(P^r)^⌊k/r⌋
            let tail = r as f64 * contraction.powi(((k + 1) / r) as i32) / (1.0 - contraction);
            Ok(weight * tail)
        }
    }
}

/// `Σ|α_j|` over the indicator decomposition.
fn ray_mass(f: &BVFunction) -> Result<f64> {
    let (_, rays) = f.ray_decomposition()?;
    Ok(rays.iter().map(|r| r.1.abs()).sum())
}

/// Dobrushin coefficient `½ max_{i,j} Σ_l |P_il - P_jl|`.
fn dobrushin(p: &DMatrix<f64>) -> f64 {
    let d = p.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            let s: f64 = (0..d).map(|l| (p[(i, l)] - p[(j, l)]).abs()).sum();
            worst = worst.max(0.5 * s);
        }
    }
    worst
}

fn contracting_power(transition: &[Vec<f64>]) -> Result<(usize, f64)> {
    let d = transition.len();
    let p = DMatrix::from_fn(d, d, |i, j| transition[i][j]);
    let mut power = p.clone();
    for r in 1..=MAX_CONTRACTION_POWER {
        let c = dobrushin(&power);
        if c < 1.0 - 1e-12 {
            return Ok((r, c));
        }
        power = &power * &p;
    }
    unsupported("chain does not mix geometrically; no tail bound for the covariance series")
}

/// Truncated analytic series; errors when the tail bound exceeds the tolerance.
pub fn limit_covariance_analytic(q: &CovarianceQuery) -> Result<f64> {
    if !(q.tolerance > 0.0) {
        return invalid(format!("tolerance {} must be positive", q.tolerance));
    }
    let tail = truncation_tail_bound(q)?;
    if tail > q.tolerance {
        return invalid(format!(
            "truncation lag {} leaves a tail bound {tail:e} above tolerance {:e}",
            q.truncation_lag, q.tolerance
        ));
    }
    match &q.spec.kind {
        GeneratorKind::Iid { dist } => {
            Ok(q.f.product_expectation(&q.g, dist) - q.f.expectation(dist) * q.g.expectation(dist))
        }
        GeneratorKind::Ar1 { .. } | GeneratorKind::Linear { .. } => gaussian_series(q),
        GeneratorKind::Markov { transition, states } => markov_series(q, transition, states),
    }
}

/// Bilinear expansion over `f = c + Σ α_i 1_{[a_i,∞)}`. For a continuous
/// marginal `Cov(1{X ≥ a}, 1{Y ≥ b}) = Cov(1{X ≤ a}, 1{Y ≤ b})`.
fn gaussian_series(q: &CovarianceQuery) -> Result<f64> {
    let (_, fr) = match q.f.ray_decomposition() {
        Ok(d) => d,
        Err(_) => return unsupported("Gaussian covariance needs piecewise-constant f; use the estimator"),
    };
    let (_, gr) = match q.g.ray_decomposition() {
        Ok(d) => d,
        Err(_) => return unsupported("Gaussian covariance needs piecewise-constant g; use the estimator"),
    };
    let mut lag_max = q.truncation_lag;
    if let GeneratorKind::Linear { coefficients, .. } = &q.spec.kind {
        lag_max = lag_max.min(coefficients.len() - 1);
    }
    let mut total = 0.0;
    for k in 0..=lag_max {
        let mut term = 0.0;
        for &(a, alpha) in &fr {
            for &(b, beta) in &gr {
                let forward = indicator_autocovariance(&q.spec, a, b, k)?;
                term += alpha * beta * forward;
                if k > 0 {
                    term += alpha * beta * indicator_autocovariance(&q.spec, b, a, k)?;
                }
            }
        }
        total += term;
    }
    Ok(total)
}

fn markov_series(q: &CovarianceQuery, transition: &[Vec<f64>], states: &[f64]) -> Result<f64> {
    let pi = stationary_vector(transition)?;
    let d = states.len();
    let fv: Vec<f64> = states.iter().map(|&x| q.f.eval(x)).collect();
    let gv: Vec<f64> = states.iter().map(|&x| q.g.eval(x)).collect();
    let ef: f64 = (0..d).map(|i| pi[i] * fv[i]).sum();
    let eg: f64 = (0..d).map(|i| pi[i] * gv[i]).sum();
    let lag_cov = |pk: &DMatrix<f64>, a: &[f64], b: &[f64], ea: f64, eb: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            let pb: f64 = (0..d).map(|j| pk[(i, j)] * b[j]).sum();
            s += pi[i] * a[i] * pb;
        }
        s - ea * eb
    };
    let p = transition_power(transition, 1);
    let mut pk = DMatrix::<f64>::identity(d, d);
    let mut total = lag_cov(&pk, &fv, &gv, ef, eg);
    for _ in 1..=q.truncation_lag {
        pk = &pk * &p;
        total += lag_cov(&pk, &fv, &gv, ef, eg) + lag_cov(&pk, &gv, &fv, eg, ef);
    }
    Ok(total)
}

/// `[σ(g_i, g_j)]` for a family under one spec.
pub fn covariance_matrix(
    family: &[BVFunction],
    spec: &GeneratorSpec,
    truncation_lag: usize,
    tolerance: f64,
) -> Result<DMatrix<f64>> {
    let k = family.len();
    let mut m = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let q = CovarianceQuery::new(family[i].clone(), family[j].clone(), spec.clone())
                .with_truncation(truncation_lag, tolerance);
            let v = limit_covariance_analytic(&q)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Lag-window plug-in value; `degenerate` marks a constant sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceEstimate {
    pub value: f64,
    pub degenerate: bool,
}

/// `ĉ₀(f,g) + Σ_{k=1..K} (1 - k/(K+1)) (ĉ_k(f,g) + ĉ_k(g,f))`.
pub fn limit_covariance_estimate(
    f: &BVFunction,
    g: &BVFunction,
    sample: &[f64],
    truncation_lag: usize,
) -> Result<CovarianceEstimate> {
    let n = sample.len();
    if n == 0 || 2 * truncation_lag >= n {
        return invalid(format!("lag window K = {truncation_lag} needs K < n/2 with n = {n}"));
    }
    if sample.iter().all(|&x| x == sample[0]) {
        return Ok(CovarianceEstimate { value: 0.0, degenerate: true });
    }
    let centred = |h: &BVFunction| {
        let v: Vec<f64> = sample.iter().map(|&x| h.eval(x)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        v.into_iter().map(|y| y - mean).collect::<Vec<f64>>()
    };
    let (fc, gc) = (centred(f), centred(g));
    let cross = |a: &[f64], b: &[f64], k: usize| -> f64 {
        a[..n - k].iter().zip(&b[k..]).map(|(x, y)| x * y).sum::<f64>() / n as f64
    };
    let mut value = cross(&fc, &gc, 0);
    for k in 1..=truncation_lag {
        let w = 1.0 - k as f64 / (truncation_lag + 1) as f64;
        value += w * (cross(&fc, &gc, k) + cross(&gc, &fc, k));
    }
    Ok(CovarianceEstimate { value, degenerate: false })
}

/// `Var(g(X₀))` under the stationary marginal: the `K = 0` term.
pub fn marginal_variance(g: &BVFunction, spec: &GeneratorSpec) -> Result<f64> {
    let law = stationary_cdf(spec)?;
    Ok(g.product_expectation(g, &law) - g.expectation(&law).powi(2))
}
