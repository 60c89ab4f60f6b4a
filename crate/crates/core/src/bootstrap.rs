//! Moving block bootstrap and the bootstrap empirical process
//! `G*_n(t) = √m ((1/m) Σ 1{X*_i ≤ t} - (1/n) Σ 1{X_i ≤ t})`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bvcalc::BVFunction;
use crate::empirical::{zbar_ibp, DriftTerm, EmpiricalPath};
use crate::error::{invalid, Result};
use crate::refdist::ReferenceDistribution;
use crate::rng::seeded;

/// Smallest `b` with `b³ ≥ n`, i.e. `⌈n^{1/3}⌉` computed in integers.
pub fn default_block_length(n: usize) -> usize {
    let mut b = (n as f64).cbrt().floor().max(1.0) as usize;
    while b.saturating_mul(b).saturating_mul(b) < n {
        b += 1;
    }
    while b > 1 && (b - 1) * (b - 1) * (b - 1) >= n {
        b -= 1;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockBootstrapConfig {
    /// Block length `b`; `None` selects [`default_block_length`].
    #[serde(default)]
    pub block_length: Option<usize>,
    /// Resample size `m`; `None` selects `⌊n/b⌋·b`.
    #[serde(default)]
    pub resample_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl BlockBootstrapConfig {
    pub fn new(block_length: usize, seed: u64) -> Self {
        Self { block_length: Some(block_length), resample_size: None, seed }
    }

    /// Resolved `(b, m)` for a sample of length `n`.
    pub fn resolve(&self, n: usize) -> Result<(usize, usize)> {
        if n == 0 {
            return invalid("cannot resample an empty sample");
        }
        let b = self.block_length.unwrap_or_else(|| default_block_length(n));
        if b == 0 || b > n {
            return invalid(format!("block length {b} outside 1..={n}"));
        }
        let m = self.resample_size.unwrap_or((n / b) * b);
        if m == 0 || m % b != 0 {
            return invalid(format!("resample size {m} is not a positive multiple of b = {b}"));
        }
        Ok((b, m))
    }
}

/// `k` block starts drawn uniformly from `0..=n-b` (0-based).
pub fn block_starts<R: Rng + ?Sized>(rng: &mut R, n: usize, b: usize, k: usize) -> Vec<usize> {
    (0..k).map(|_| rng.random_range(0..=n - b)).collect()
}

/// Concatenation of the blocks starting at `starts`.
pub fn assemble(sample: &[f64], starts: &[usize], b: usize) -> Vec<f64> {
    starts.iter().flat_map(|&s| sample[s..s + b].iter().copied()).collect()
}

/// One MBB resample of length `m` from the config's seed.
pub fn mbb_resample(sample: &[f64], cfg: &BlockBootstrapConfig) -> Result<Vec<f64>> {
    let mut rng = seeded(cfg.seed);
    mbb_resample_with(sample, cfg, &mut rng)
}

/// One MBB resample drawn from a caller-supplied stream.
pub fn mbb_resample_with<R: Rng + ?Sized>(sample: &[f64], cfg: &BlockBootstrapConfig, rng: &mut R) -> Result<Vec<f64>> {
    let (b, m) = cfg.resolve(sample.len())?;
    let starts = block_starts(rng, sample.len(), b, m / b);
    Ok(assemble(sample, &starts, b))
}

/// `G*_n` as an [`EmpiricalPath`]: jumps `1/√m` at resampled points and the
/// atomic drift `-√m F_n`.
pub fn make_gn_star(original: &[f64], resample: &[f64]) -> Result<EmpiricalPath> {
    if resample.is_empty() {
        return invalid("bootstrap resample is empty");
    }
    let rm = (resample.len() as f64).sqrt();
    let centre = ReferenceDistribution::empirical(original)?;
    EmpiricalPath::new(resample, 1.0 / rm, vec![DriftTerm { weight: -rm, law: centre }])
}

/// `∫ g dG*_n = √m ((1/m) Σ g(X*_i) - (1/n) Σ g(X_i))`.
pub fn zbar_star(g: &BVFunction, original: &[f64], resample: &[f64]) -> Result<f64> {
    if original.is_empty() || resample.is_empty() {
        return invalid("bootstrap functional needs nonempty samples");
    }
    let m = resample.len() as f64;
    let n = original.len() as f64;
    let boot: f64 = resample.iter().map(|&x| g.eval(x)).sum::<f64>() / m;
    let full: f64 = original.iter().map(|&x| g.eval(x)).sum::<f64>() / n;
    Ok(m.sqrt() * (boot - full))
}

/// Same functional through `T₁ + T₂` on the path [`make_gn_star`].
pub fn zbar_star_ibp(g: &BVFunction, original: &[f64], resample: &[f64]) -> Result<f64> {
    zbar_ibp(g, &make_gn_star(original, resample)?)
}

/// Prefix sums of `g(X_i)` for evaluating `∫ g dG*_n` from block starts in
/// `O(#blocks)`.
#[derive(Debug, Clone)]
pub struct BlockSums {
    prefix: Vec<f64>,
    mean: f64,
}

impl BlockSums {
    pub fn new(values: &[f64]) -> Self {
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        for v in values {
            prefix.push(prefix.last().unwrap() + v);
        }
        let mean = prefix.last().unwrap() / values.len().max(1) as f64;
        Self { prefix, mean }
    }

    /// `√m ((1/m) Σ_blocks Σ g - mean)` with `m = starts.len()·b`.
    pub fn zbar_star(&self, starts: &[usize], b: usize) -> f64 {
        let m = (starts.len() * b) as f64;
        let total: f64 = starts.iter().map(|&s| self.prefix[s + b] - self.prefix[s]).sum();
        (total - m * self.mean) / m.sqrt()
    }
}
