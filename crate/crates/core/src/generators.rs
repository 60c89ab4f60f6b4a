//! Seeded stationary sequences with known marginal law and dependence.
//!
//! * `iid`: independent draws from a catalog law;
//! * `ar1`: Gaussian AR(1) standardized to unit marginal variance,
//!   `X_i = ρ X_{i-1} + √(1-ρ²) ε_i`, started from `N(0, 1)`;
//! * `linear`: finite causal moving average `X_i = Σ_j a_j ξ_{i-j}`;
//! * `markov`: finite-state chain started from its stationary vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Result};
use crate::refdist::{ContinuousLaw, ReferenceDistribution};
use crate::rng::{seeded, StreamRng};
use crate::special::{gauss_legendre, gl64_integrate, std_normal_cdf};

pub const DEFAULT_BURN_IN: usize = 1000;

const ROW_SUM_TOL: f64 = 1e-9;

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorKind {
    Iid { dist: ReferenceDistribution },
    Ar1 { rho: f64 },
    Linear { coefficients: Vec<f64>, innovation: ReferenceDistribution },
    Markov { transition: Vec<Vec<f64>>, states: Vec<f64> },
}

/// Serialized as e.g. `{"kind":"ar1","rho":0.5,"n":2000,"seed":42,"burn_in":1000}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        Self { kind, n, seed, burn_in: DEFAULT_BURN_IN }
    }

    pub fn ar1(rho: f64, n: usize, seed: u64) -> Self {
        Self::new(GeneratorKind::Ar1 { rho }, n, seed)
    }

    pub fn iid(dist: ReferenceDistribution, n: usize, seed: u64) -> Self {
        Self::new(GeneratorKind::Iid { dist }, n, seed)
    }

    /// Two-state chain on `{0, 1}` that switches state with probability `p`.
    pub fn symmetric_markov(p: f64, n: usize, seed: u64) -> Self {
        let kind = GeneratorKind::Markov {
            transition: vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
            states: vec![0.0, 1.0],
        };
        Self::new(kind, n, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("sample length n must be positive");
        }
        match &self.kind {
            GeneratorKind::Iid { .. } => Ok(()),
            GeneratorKind::Ar1 { rho } => {
                if rho.is_finite() && rho.abs() < 1.0 {
                    Ok(())
                } else {
                    invalid(format!("AR(1) needs |ρ| < 1, got {rho}"))
                }
            }
            GeneratorKind::Linear { coefficients, .. } => {
                if coefficients.is_empty() || coefficients.iter().any(|a| !a.is_finite()) {
                    return invalid("linear process needs finite coefficients a_0..a_J");
                }
                if coefficients.iter().all(|&a| a == 0.0) {
                    return invalid("linear process coefficients are all zero");
                }
                Ok(())
            }
            GeneratorKind::Markov { transition, states } => {
                let d = states.len();
                if d == 0 || transition.len() != d {
                    return invalid("transition matrix must be square with one row per state");
                }
                if states.iter().any(|x| !x.is_finite()) {
                    return invalid("state values must be finite");
                }
                for (i, row) in transition.iter().enumerate() {
                    if row.len() != d {
                        return invalid(format!("row {i} has {} entries, expected {d}", row.len()));
                    }
                    if row.iter().any(|&p| !(p >= 0.0 && p <= 1.0)) {
                        return invalid(format!("row {i} has entries outside [0, 1]"));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOL {
                        return invalid(format!("row {i} sums to {sum}"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Draws the sequence from this spec's own seed.
    pub fn generate(&self) -> Result<Vec<f64>> {
        let mut rng = seeded(self.seed);
        self.generate_with(&mut rng)
    }

    /// Draws the sequence from a caller-supplied stream (the seed field is ignored).
    pub fn generate_with(&self, rng: &mut StreamRng) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n;
        match &self.kind {
            GeneratorKind::Iid { dist } => Ok((0..n).map(|_| dist.sample(rng)).collect()),
            GeneratorKind::Ar1 { rho } => {
                let innovation_sd = (1.0 - rho * rho).sqrt();
                let mut x: f64 = rng.sample(StandardNormal);
                let mut out = Vec::with_capacity(n);
                for i in 0..self.burn_in + n {
                    if i > 0 {
                        let e: f64 = rng.sample(StandardNormal);
                        x = rho * x + innovation_sd * e;
                    }
                    if i >= self.burn_in {
                        out.push(x);
                    }
                }
                Ok(out)
            }
            GeneratorKind::Linear { coefficients, innovation } => {
                let j = coefficients.len() - 1;
                let xi: Vec<f64> = (0..n + j).map(|_| innovation.sample(rng)).collect();
                Ok((0..n)
                    .map(|i| coefficients.iter().enumerate().map(|(l, a)| a * xi[i + j - l]).sum())
                    .collect())
            }
            GeneratorKind::Markov { transition, states } => {
                let pi = stationary_vector(transition)?;
                let draw = |rng: &mut StreamRng, probs: &[f64]| -> usize {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    for (i, &p) in probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return i;
                        }
                    }
                    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
                };
                let mut state = draw(rng, &pi);
                let mut out = Vec::with_capacity(n);
                for i in 0..self.burn_in + n {
                    if i > 0 {
                        state = draw(rng, &transition[state]);
                    }
                    if i >= self.burn_in {
                        out.push(states[state]);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Stationary probabilities `π P = π`, `Σ π = 1`.
pub fn stationary_vector(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = transition.len();
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = transition[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..d {
        a[(d - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(d);
    b[d - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| crate::Error::InvalidArgument("chain has no unique stationary law".into()))?;
    if pi.iter().any(|&p| p < -1e-10) {
        return invalid("stationary vector has negative entries");
    }
    Ok(pi.iter().map(|&p| p.max(0.0)).collect())
}

/// The exact stationary marginal law of a spec.
pub fn stationary_cdf(spec: &GeneratorSpec) -> Result<ReferenceDistribution> {
    spec.validate()?;
    match &spec.kind {
        GeneratorKind::Iid { dist } => Ok(dist.clone()),
        GeneratorKind::Ar1 { .. } => Ok(ReferenceDistribution::standard_normal()),
        GeneratorKind::Linear { coefficients, innovation } => match innovation.continuous_part() {
            Some((ContinuousLaw::Gaussian { mean, sd }, w)) if w == 1.0 && innovation.is_continuous() => {
                let sum: f64 = coefficients.iter().sum();
                let sq: f64 = coefficients.iter().map(|a| a * a).sum();
                ReferenceDistribution::gaussian(mean * sum, sd * sq.sqrt())
            }
            _ => unsupported(format!("no closed-form marginal for a linear process with {innovation} innovations")),
        },
        GeneratorKind::Markov { transition, states } => {
            let pi = stationary_vector(transition)?;
            ReferenceDistribution::discrete(states.iter().copied().zip(pi))
        }
    }
}

/// Lag-`k` correlation of a Gaussian spec (`ar1` or linear with Gaussian innovations).
pub fn gaussian_lag_correlation(spec: &GeneratorSpec, k: usize) -> Result<f64> {
    match &spec.kind {
        GeneratorKind::Ar1 { rho } => Ok(if k == 0 { 1.0 } else { rho.powi(k as i32) }),
        GeneratorKind::Linear { coefficients, .. } => {
            stationary_cdf(spec)?;
            let sq: f64 = coefficients.iter().map(|a| a * a).sum();
            let cross: f64 = coefficients.iter().zip(coefficients.iter().skip(k)).map(|(a, b)| a * b).sum();
            Ok(cross / sq)
        }
        _ => unsupported("not a Gaussian sequence"),
    }
}

/// `P^k` for a row-stochastic matrix.
pub fn transition_power(transition: &[Vec<f64>], k: usize) -> DMatrix<f64> {
    let d = transition.len();
    let p = DMatrix::from_fn(d, d, |i, j| transition[i][j]);
    let mut result = DMatrix::<f64>::identity(d, d);
    let mut base = p;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

/// `Cov(1{X_0 ≤ s}, 1{X_k ≤ t})`.
pub fn indicator_autocovariance(spec: &GeneratorSpec, s: f64, t: f64, k: usize) -> Result<f64> {
    spec.validate()?;
    match &spec.kind {
        GeneratorKind::Iid { dist } => {
            Ok(if k == 0 { dist.cdf(s.min(t)) - dist.cdf(s) * dist.cdf(t) } else { 0.0 })
        }
        GeneratorKind::Ar1 { .. } | GeneratorKind::Linear { .. } => {
            let law = stationary_cdf(spec)?;
            let (mean, sd) = match law.continuous_part() {
                Some((ContinuousLaw::Gaussian { mean, sd }, _)) => (mean, sd),
                _ => unreachable!("Gaussian marginal"),
            };
            let (zs, zt) = ((s - mean) / sd, (t - mean) / sd);
            let r = gaussian_lag_correlation(spec, k)?;
            Ok(bvn_cdf_closed(zs, zt, r) - std_normal_cdf(zs) * std_normal_cdf(zt))
        }
        GeneratorKind::Markov { transition, states } => {
            let pi = stationary_vector(transition)?;
            let pk = transition_power(transition, k);
            let d = states.len();
            let mut joint = 0.0;
            for i in (0..d).filter(|&i| states[i] <= s) {
                for j in (0..d).filter(|&j| states[j] <= t) {
                    joint += pi[i] * pk[(i, j)];
                }
            }
            let ps: f64 = (0..d).filter(|&i| states[i] <= s).map(|i| pi[i]).sum();
            let pt: f64 = (0..d).filter(|&j| states[j] <= t).map(|j| pi[j]).sum();
            Ok(joint - ps * pt)
        }
    }
}

/// Standard bivariate normal CDF `P(U ≤ x, V ≤ y)` with correlation ρ, `|ρ| < 1`.
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) || x.is_nan() || y.is_nan() {
        return invalid(format!("bivariate normal needs |ρ| < 1, got {rho}"));
    }
    Ok(bvn_cdf_closed(x, y, rho))
}

/// Same as [`bivariate_normal_cdf`] but also defined at `ρ = ±1`.
pub(crate) fn bvn_cdf_closed(x: f64, y: f64, rho: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return std_normal_cdf(y);
    }
    if y == f64::INFINITY {
        return std_normal_cdf(x);
    }
    if rho >= 1.0 {
        return std_normal_cdf(x.min(y));
    }
    if rho <= -1.0 {
        return (std_normal_cdf(x) - std_normal_cdf(-y)).max(0.0);
    }
    if rho == 0.0 {
        return std_normal_cdf(x) * std_normal_cdf(y);
    }
    let value = if rho.abs() <= 0.925 {
        // Plackett: ∂Φ₂/∂ρ = φ₂, written in θ = asin r
        let upper = rho.asin();
        let integral = gl64_integrate(0.0, upper, |theta| {
            let (sn, cs) = theta.sin_cos();
            (-(x * x - 2.0 * x * y * sn + y * y) / (2.0 * cs * cs)).exp()
        });
        std_normal_cdf(x) * std_normal_cdf(y) + integral / (2.0 * std::f64::consts::PI)
    } else if rho > 0.0 {
        // integrate down from ρ = 1 with r = cos φ
        let upper = rho.acos();
        let integral = graded_integral(upper, |phi| {
            if phi == 0.0 {
                return 0.0;
            }
            let (sn, cs) = phi.sin_cos();
            (-(x * x - 2.0 * x * y * cs + y * y) / (2.0 * sn * sn)).exp()
        });
        std_normal_cdf(x.min(y)) - integral / (2.0 * std::f64::consts::PI)
    } else {
        std_normal_cdf(x) - bvn_cdf_closed(x, -y, -rho)
    };
    value.clamp(0.0, 1.0)
}

/// `∫_0^A f` on geometrically shrinking panels toward 0, for integrands with a
/// boundary layer of unknown width at the origin.
fn graded_integral(upper: f64, f: impl Fn(f64) -> f64) -> f64 {
    thread_local! {
        static GL16: (Vec<f64>, Vec<f64>) = gauss_legendre(16);
    }
    GL16.with(|(nodes, weights)| {
        let mut total = 0.0;
        let mut hi = upper;
        for _ in 0..48 {
            let lo = 0.5 * hi;
            let (c, h) = (0.5 * (hi + lo), 0.5 * (hi - lo));
            total += h * nodes.iter().zip(weights).map(|(&t, &w)| w * f(c + h * t)).sum::<f64>();
            hi = lo;
        }
        total
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::stats::ks_one_sample;
    use crate::special::std_normal_pdf;
    use std::f64::consts::PI;

    /// Adaptive Simpson in one variable.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, depth)
    }

    /// Nested adaptive 2-D quadrature of the bivariate density over `[-10, x] × [-10, y]`.
    fn bvn_by_2d_quadrature(x: f64, y: f64, rho: f64) -> f64 {
        let det = 1.0 - rho * rho;
        let density = move |u: f64, v: f64| {
            (-(u * u - 2.0 * rho * u * v + v * v) / (2.0 * det)).exp() / (2.0 * PI * det.sqrt())
        };
        let inner = |u: f64| adaptive_simpson(&|v| density(u, v), -10.0, y, 1e-13, 40);
        adaptive_simpson(&inner, -10.0, x, 1e-12, 40)
    }

    #[test]
    fn orthant_identity() {
        for rho in [-0.999, -0.95, -0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9, 0.93, 0.999] {
            let got = bivariate_normal_cdf(0.0, 0.0, rho).unwrap();
            let want = 0.25 + rho.asin() / (2.0 * PI);
            assert!((got - want).abs() < 1e-12, "ρ={rho}: {got} vs {want}");
        }
        assert!(bivariate_normal_cdf(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn matches_2d_quadrature() {
        for &(x, y, rho) in &[(0.3, -0.7, 0.5), (1.2, 0.4, -0.9), (-0.5, 0.2, 0.95), (0.0, 0.0, 0.5), (0.6, 0.6001, 0.97)] {
            let got = bivariate_normal_cdf(x, y, rho).unwrap();
            let oracle = bvn_by_2d_quadrature(x, y, rho);
            assert!((got - oracle).abs() < 1e-8, "({x},{y},{rho}): {got} vs {oracle}");
        }
    }

    #[test]
    fn bvn_against_conditional_integral() {
        // Φ₂(x,y;ρ) = ∫_{-∞}^x φ(u) Φ((y - ρu)/√(1-ρ²)) du
        let mut rng = seeded(31);
        for _ in 0..200 {
            let x: f64 = rng.random_range(-4.0..4.0);
            let y: f64 = rng.random_range(-4.0..4.0);
            let rho: f64 = rng.random_range(-0.995..0.995);
            let s = (1.0 - rho * rho).sqrt();
            let f = |u: f64| std_normal_pdf(u) * std_normal_cdf((y - rho * u) / s);
            let oracle = adaptive_simpson(&f, -12.0, x, 1e-14, 50);
            let got = bivariate_normal_cdf(x, y, rho).unwrap();
            assert!((got - oracle).abs() < 1e-10, "({x},{y},{rho}): {got} vs {oracle}");
        }
    }

    #[test]
    fn bvn_margins_symmetry_monotonicity() {
        let mut rng = seeded(2);
        for _ in 0..200 {
            let x = rng.random_range(-3.0..3.0);
            let y = rng.random_range(-3.0..3.0);
            let rho = rng.random_range(-0.99..0.99);
            let a = bivariate_normal_cdf(x, y, rho).unwrap();
            assert!((a - bivariate_normal_cdf(y, x, rho).unwrap()).abs() < 1e-14);
            assert!((bivariate_normal_cdf(x, f64::INFINITY, rho).unwrap() - std_normal_cdf(x)).abs() < 1e-15);
            assert!((bivariate_normal_cdf(x, 40.0, rho).unwrap() - std_normal_cdf(x)).abs() < 1e-12);
            assert!(bivariate_normal_cdf(x + 0.1, y, rho).unwrap() >= a - 1e-15);
            assert!(bivariate_normal_cdf(x, y + 0.1, rho).unwrap() >= a - 1e-15);
        }
    }

    #[test]
    fn indicator_autocovariance_examples() {
        let spec = GeneratorSpec::ar1(0.5, 10, 1);
        let c1 = indicator_autocovariance(&spec, 0.0, 0.0, 1).unwrap();
        assert!((c1 - 1.0 / 12.0).abs() < 1e-12);
        let c0 = indicator_autocovariance(&spec, 0.0, 0.0, 0).unwrap();
        assert!((c0 - 0.25).abs() < 1e-15);
        let far = indicator_autocovariance(&spec, 0.3, -0.2, 60).unwrap();
        assert!(far.abs() < 1e-17);
        let iid = GeneratorSpec::iid(ReferenceDistribution::uniform(0.0, 1.0).unwrap(), 10, 1);
        assert_eq!(indicator_autocovariance(&iid, 0.3, 0.6, 2).unwrap(), 0.0);
        assert!((indicator_autocovariance(&iid, 0.3, 0.6, 0).unwrap() - (0.3 - 0.18)).abs() < 1e-15);
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(stationary_cdf(&GeneratorSpec::ar1(0.5, 5, 0)).unwrap(), ReferenceDistribution::standard_normal());
        let m = stationary_cdf(&GeneratorSpec::symmetric_markov(0.3, 5, 0)).unwrap();
        assert_eq!(m, ReferenceDistribution::discrete([(0.0, 0.5), (1.0, 0.5)]).unwrap());
        let lin = GeneratorSpec::new(
            GeneratorKind::Linear { coefficients: vec![1.0, 0.5], innovation: ReferenceDistribution::standard_normal() },
            5,
            0,
        );
        let law = stationary_cdf(&lin).unwrap();
        assert_eq!(law, ReferenceDistribution::gaussian(0.0, 1.25f64.sqrt()).unwrap());
        let nongauss = GeneratorSpec::new(
            GeneratorKind::Linear { coefficients: vec![1.0, 0.5], innovation: ReferenceDistribution::uniform(-1.0, 1.0).unwrap() },
            5,
            0,
        );
        assert!(matches!(stationary_cdf(&nongauss), Err(crate::Error::Capability(_))));
    }

    #[test]
    fn reproducible_and_degenerate_cases() {
        let spec = GeneratorSpec::ar1(0.7, 500, 99);
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
        let mut ar0 = GeneratorSpec::ar1(0.0, 300, 5);
        ar0.burn_in = 0;
        let iid = GeneratorSpec::iid(ReferenceDistribution::standard_normal(), 300, 5);
        assert_eq!(ar0.generate().unwrap(), iid.generate().unwrap());
        assert!(GeneratorSpec::ar1(1.0, 10, 0).generate().is_err());
        assert!(GeneratorSpec::ar1(0.5, 0, 0).generate().is_err());
    }

    #[test]
    fn symmetric_half_markov_is_iid_bernoulli() {
        let xs = GeneratorSpec::symmetric_markov(0.5, 100_000, 3).generate().unwrap();
        let n = xs.len() as f64;
        let p1 = xs.iter().filter(|&&x| x == 1.0).count() as f64 / n;
        assert!((p1 - 0.5).abs() < 3.0 * (0.25 / n).sqrt() * 1.5);
        // lag-1 joint frequency of (1, 1) ≈ 1/4
        let both = xs.windows(2).filter(|w| w[0] == 1.0 && w[1] == 1.0).count() as f64 / (n - 1.0);
        assert!((both - 0.25).abs() < 4.0 * (0.1875 / n).sqrt());
    }

    #[test]
    fn iid_uniform_passes_dkw() {
        let law = ReferenceDistribution::uniform(0.0, 1.0).unwrap();
        let n = 500;
        let mut fails = 0;
        for seed in 0..200 {
            let xs = GeneratorSpec::iid(law.clone(), n, seed).generate().unwrap();
            if ks_one_sample(&xs, |x| law.cdf(x)) >= 1.36 / (n as f64).sqrt() {
                fails += 1;
            }
        }
        // 5% nominal; binomial(200, 0.05) exceeds 20 with probability < 1e-4
        assert!(fails <= 20, "{fails} exceedances");
    }

    /// Lag-`k` cross-moment estimate with a batch-means standard error.
    fn lag_estimate(a: &[f64], b: &[f64], k: usize) -> (f64, f64) {
        let n = a.len();
        let ma = a.iter().sum::<f64>() / n as f64;
        let mb = b.iter().sum::<f64>() / n as f64;
        let prods: Vec<f64> = (0..n - k).map(|i| (a[i] - ma) * (b[i + k] - mb)).collect();
        let est = prods.iter().sum::<f64>() / prods.len() as f64;
        let batches = 200;
        let size = prods.len() / batches;
        let means: Vec<f64> =
            (0..batches).map(|j| prods[j * size..(j + 1) * size].iter().sum::<f64>() / size as f64).collect();
        let mm = means.iter().sum::<f64>() / batches as f64;
        let se = (means.iter().map(|m| (m - mm).powi(2)).sum::<f64>() / (batches - 1) as f64 / batches as f64).sqrt();
        (est, se)
    }

    #[test]
    fn ar1_autocovariance_matches_rho_power() {
        let rho = 0.6;
        let xs = GeneratorSpec::ar1(rho, 100_000, 11).generate().unwrap();
        for k in 0..5usize {
            let (c, se) = lag_estimate(&xs, &xs, k);
            assert!((c - rho.powi(k as i32)).abs() < 3.0 * se, "lag {k}: {c} (se {se})");
        }
    }

    #[test]
    fn markov_autocovariance_matches_frequencies() {
        let spec = GeneratorSpec::new(
            GeneratorKind::Markov {
                transition: vec![vec![0.7, 0.2, 0.1], vec![0.3, 0.4, 0.3], vec![0.2, 0.2, 0.6]],
                states: vec![-1.0, 0.0, 2.0],
            },
            200_000,
            8,
        );
        let xs = spec.generate().unwrap();
        for &(s, t, k) in &[(-1.0, 0.0, 1usize), (0.0, 0.0, 2), (-1.0, -1.0, 3)] {
            let exact = indicator_autocovariance(&spec, s, t, k).unwrap();
            let a: Vec<f64> = xs.iter().map(|&x| (x <= s) as u8 as f64).collect();
            let b: Vec<f64> = xs.iter().map(|&x| (x <= t) as u8 as f64).collect();
            let (est, se) = lag_estimate(&a, &b, k);
            assert!((est - exact).abs() < 3.0 * se, "({s},{t},{k}): {est} vs {exact} (se {se})");
        }
    }

    #[test]
    fn spec_json_shape() {
        let spec: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"ar1","rho":0.5,"n":2000,"seed":42,"burn_in":1000}"#).unwrap();
        assert_eq!(spec, GeneratorSpec { burn_in: 1000, ..GeneratorSpec::ar1(0.5, 2000, 42) });
        let iid: GeneratorSpec = serde_json::from_str(r#"{"kind":"iid","dist":"uniform:0,1","n":10}"#).unwrap();
        assert_eq!(iid.burn_in, DEFAULT_BURN_IN);
        let back: GeneratorSpec = serde_json::from_str(&serde_json::to_string(&iid).unwrap()).unwrap();
        assert_eq!(back, iid);
    }
}
