//! Reference distributions `F` / `F₀` and the β-grid construction.
//!
//! A [`ReferenceDistribution`] is an optional continuous component (uniform,
//! Gaussian or exponential) with weight `w` plus a finite list of atoms whose
//! masses sum to `1 - w`. All catalog kinds are special cases of that shape,
//! which keeps the CDF, left limit, interval moments and quantile in one
//! place.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Error, Result};
use crate::special::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};

/// Highest moment degree served by [`ReferenceDistribution::moment_about`].
pub const MAX_MOMENT_DEGREE: u32 = 8;

/// Tolerance used when validating that probabilities sum to one.
const MASS_TOL: f64 = 1e-9;

/// Continuous component of a reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ContinuousLaw {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    Exponential { rate: f64 },
}

impl ContinuousLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            ContinuousLaw::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && lo < hi => Ok(()),
            ContinuousLaw::Gaussian { mean, sd } if mean.is_finite() && sd.is_finite() && sd > 0.0 => Ok(()),
            ContinuousLaw::Exponential { rate } if rate.is_finite() && rate > 0.0 => Ok(()),
            other => invalid(format!("bad parameters for {other:?}")),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            ContinuousLaw::Gaussian { mean, sd } => std_normal_cdf((x - mean) / sd),
            ContinuousLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            ContinuousLaw::Gaussian { mean, sd } => std_normal_pdf((x - mean) / sd) / sd,
            ContinuousLaw::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
        }
    }

    /// Generalized inverse on `(0, 1)`; `-∞` at 0 and the upper support end at 1.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match *self {
            ContinuousLaw::Uniform { lo, hi } => lo + u.min(1.0) * (hi - lo),
            ContinuousLaw::Gaussian { mean, sd } => mean + sd * std_normal_quantile(u),
            ContinuousLaw::Exponential { rate } => {
                if u >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-u).ln_1p() / rate
                }
            }
        }
    }

    /// `∫_lo^hi C(x) dx` for finite `lo ≤ hi`.
    fn cdf_integral(&self, lo: f64, hi: f64) -> f64 {
        let antiderivative = |x: f64| -> f64 {
            match *self {
                ContinuousLaw::Uniform { lo: a, hi: b } => {
                    if x <= a {
                        0.0
                    } else if x <= b {
                        (x - a) * (x - a) / (2.0 * (b - a))
                    } else {
                        0.5 * (b - a) + (x - b)
                    }
                }
                ContinuousLaw::Gaussian { mean, sd } => {
                    let z = (x - mean) / sd;
                    sd * (z * std_normal_cdf(z) + std_normal_pdf(z))
                }
                ContinuousLaw::Exponential { rate } => {
                    if x <= 0.0 {
                        0.0
                    } else {
                        x + (-rate * x).exp_m1() / rate
                    }
                }
            }
        };
        antiderivative(hi) - antiderivative(lo)
    }

    /// `∫_{[lo,hi)} (x - c)^k dC(x)`; the bounds may be infinite, `c` must be finite
    /// when `k > 0`.
    fn moment_about(&self, lo: f64, hi: f64, c: f64, k: u32) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        match *self {
            ContinuousLaw::Uniform { lo: a, hi: b } => {
                let l = lo.max(a);
                let h = hi.min(b);
                if l >= h {
                    return 0.0;
                }
                let k1 = (k + 1) as i32;
                ((h - c).powi(k1) - (l - c).powi(k1)) / ((k + 1) as f64 * (b - a))
            }
            ContinuousLaw::Gaussian { mean, sd } => {
                let zl = (lo - mean) / sd;
                let zh = (hi - mean) / sd;
                let g0 = if zl > 0.0 {
                    std_normal_sf(zl) - std_normal_sf(zh)
                } else {
                    std_normal_cdf(zh) - std_normal_cdf(zl)
                };
                if k == 0 {
                    return g0;
                }
                let zc = (c - mean) / sd;
                let boundary = |z: f64, j: u32| -> f64 {
                    if z.is_infinite() {
                        0.0
                    } else {
                        (z - zc).powi(j as i32) * std_normal_pdf(z)
                    }
                };
                let mut prev2 = 0.0;
                let mut prev = g0;
                for j in 1..=k {
                    let cur = boundary(zl, j - 1) - boundary(zh, j - 1) + (j - 1) as f64 * prev2 - zc * prev;
                    prev2 = prev;
                    prev = cur;
                }
                prev * sd.powi(k as i32)
            }
            ContinuousLaw::Exponential { rate } => {
                let l = lo.max(0.0);
                let h = hi;
                if l >= h {
                    return 0.0;
                }
                let el = (-rate * l).exp();
                let eh = if h.is_infinite() { 0.0 } else { (-rate * h).exp() };
                let mut acc = el - eh;
                for j in 1..=k {
                    let bl = (l - c).powi(j as i32) * el;
                    let bh = if h.is_infinite() { 0.0 } else { (h - c).powi(j as i32) * eh };
                    acc = bl - bh + j as f64 / rate * acc;
                }
                acc
            }
        }
    }

    /// True when the density vanishes on some interval `(x - ε, x)`.
    pub fn flat_left_of(&self, x: f64) -> bool {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => x <= lo || x > hi,
            ContinuousLaw::Gaussian { .. } => false,
            ContinuousLaw::Exponential { .. } => x <= 0.0,
        }
    }

    fn attains_zero(&self) -> bool {
        !matches!(self, ContinuousLaw::Gaussian { .. })
    }

    fn attains_one(&self) -> bool {
        matches!(self, ContinuousLaw::Uniform { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ContinuousLaw::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            ContinuousLaw::Exponential { rate } => {
                let e: f64 = rng.sample(Exp1);
                e / rate
            }
        }
    }

    fn write_spec(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            ContinuousLaw::Gaussian { mean, sd } => write!(f, "gaussian:{mean},{sd}"),
            ContinuousLaw::Exponential { rate } => write!(f, "exponential:{rate}"),
        }
    }
}

/// Catalog tag of a [`ReferenceDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Uniform,
    Gaussian,
    Exponential,
    Discrete,
    Mixed,
}

/// A distribution function on ℝ: continuous part plus atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ReferenceDistribution {
    continuous: Option<ContinuousLaw>,
    continuous_weight: f64,
    atoms: Vec<f64>,
    masses: Vec<f64>,
    // cumulative[i] = mass of the first i atoms
    cumulative: Vec<f64>,
}

impl ReferenceDistribution {
    fn build(continuous: Option<(ContinuousLaw, f64)>, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if let Some((law, w)) = &continuous {
            law.validate()?;
            if !(w.is_finite() && *w > 0.0 && *w <= 1.0 + MASS_TOL) {
                return invalid(format!("continuous weight {w} outside (0, 1]"));
            }
        }
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|&(_, m)| m != 0.0).collect();
        for &(x, m) in &atoms {
            if !x.is_finite() || !m.is_finite() || m < 0.0 {
                return invalid(format!("bad atom ({x}, {m})"));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += m,
                _ => merged.push((x, m)),
            }
        }
        let w = continuous.map_or(0.0, |(_, w)| w.min(1.0));
        let total = w + merged.iter().map(|a| a.1).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return invalid(format!("total mass {total} differs from 1"));
        }
        let mut cumulative = Vec::with_capacity(merged.len() + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for &(_, m) in &merged {
            acc += m;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            if !merged.is_empty() {
                *last = 1.0 - w;
            }
        }
        Ok(Self {
            continuous: continuous.map(|(law, _)| law),
            continuous_weight: w,
            atoms: merged.iter().map(|a| a.0).collect(),
            masses: merged.iter().map(|a| a.1).collect(),
            cumulative,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::build(Some((ContinuousLaw::Uniform { lo, hi }, 1.0)), vec![])
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        Self::build(Some((ContinuousLaw::Gaussian { mean, sd }, 1.0)), vec![])
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::build(Some((ContinuousLaw::Exponential { rate }, 1.0)), vec![])
    }

    pub fn standard_normal() -> Self {
        Self::gaussian(0.0, 1.0).expect("valid parameters")
    }

    /// Purely atomic law; repeated locations are merged.
    pub fn discrete(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return invalid("discrete law needs at least one atom");
        }
        Self::build(None, atoms)
    }

    /// Continuous law with weight `1 - Σ masses` plus the given atoms.
    pub fn mixed(law: ContinuousLaw, atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().collect();
        let w = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
        Self::build(Some((law, w)), atoms)
    }

    /// Empirical distribution of a sample (ties merged into heavier atoms).
    pub fn empirical(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return invalid("empirical law of an empty sample");
        }
        let p = 1.0 / sample.len() as f64;
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut count = 0usize;
        for (i, &x) in sorted.iter().enumerate() {
            count += 1;
            if i + 1 == sorted.len() || sorted[i + 1] != x {
                atoms.push((x, count as f64 * p));
                count = 0;
            }
        }
        Self::build(None, atoms)
    }

    pub fn kind(&self) -> DistributionKind {
        match (&self.continuous, self.atoms.is_empty()) {
            (None, _) => DistributionKind::Discrete,
            (Some(_), false) => DistributionKind::Mixed,
            (Some(ContinuousLaw::Uniform { .. }), true) => DistributionKind::Uniform,
            (Some(ContinuousLaw::Gaussian { .. }), true) => DistributionKind::Gaussian,
            (Some(ContinuousLaw::Exponential { .. }), true) => DistributionKind::Exponential,
        }
    }

    pub fn continuous_part(&self) -> Option<(ContinuousLaw, f64)> {
        self.continuous.map(|law| (law, self.continuous_weight))
    }

    pub fn is_continuous(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms as `(location, mass)` in increasing location order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn atom_locations(&self) -> &[f64] {
        &self.atoms
    }

    /// Stored mass of the atom at exactly `x` (0 off atoms).
    pub fn atom_mass(&self, x: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.total_cmp(&x)) {
            Ok(i) => self.masses[i],
            Err(_) => 0.0,
        }
    }

    fn continuous_cdf(&self, x: f64) -> f64 {
        self.continuous.map_or(0.0, |law| self.continuous_weight * law.cdf(x))
    }

    /// `F(x) = P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        (self.continuous_cdf(x) + self.cumulative[k]).clamp(0.0, 1.0)
    }

    /// `F(x⁻) = P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a < x);
        (self.continuous_cdf(x) + self.cumulative[k]).clamp(0.0, 1.0)
    }

    /// `F([lo, hi))`; either bound may be infinite.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        let mut m = 0.0;
        if let Some(law) = &self.continuous {
            m += self.continuous_weight * law.moment_about(lo, hi, 0.0, 0);
        }
        let a = self.atoms.partition_point(|&x| x < lo);
        let b = self.atoms.partition_point(|&x| x < hi);
        m + self.masses[a..b].iter().sum::<f64>()
    }

    /// `∫_{[lo,hi)} (x - c)^k dF(x)` for `k ≤` [`MAX_MOMENT_DEGREE`].
    pub fn moment_about(&self, lo: f64, hi: f64, c: f64, k: u32) -> Result<f64> {
        if k > MAX_MOMENT_DEGREE {
            return unsupported(format!("moment of degree {k} (max {MAX_MOMENT_DEGREE})"));
        }
        if k > 0 && !c.is_finite() {
            return invalid("moment centre must be finite");
        }
        Ok(self.moment_about_unchecked(lo, hi, c, k))
    }

    pub(crate) fn moment_about_unchecked(&self, lo: f64, hi: f64, c: f64, k: u32) -> f64 {
        if k == 0 {
            return self.mass(lo, hi);
        }
        if lo >= hi {
            return 0.0;
        }
        let mut m = 0.0;
        if let Some(law) = &self.continuous {
            m += self.continuous_weight * law.moment_about(lo, hi, c, k);
        }
        let a = self.atoms.partition_point(|&x| x < lo);
        let b = self.atoms.partition_point(|&x| x < hi);
        for i in a..b {
            m += self.masses[i] * (self.atoms[i] - c).powi(k as i32);
        }
        m
    }

    /// Raw partial moment `∫_{[lo,hi)} x^k dF(x)`.
    pub fn partial_moment(&self, lo: f64, hi: f64, k: u32) -> Result<f64> {
        self.moment_about(lo, hi, 0.0, k)
    }

    /// `∫_lo^hi F(x) dx` for finite `lo ≤ hi`.
    pub fn cdf_integral(&self, lo: f64, hi: f64) -> f64 {
        if !(lo < hi) {
            return 0.0;
        }
        let mut acc = self
            .continuous
            .map_or(0.0, |law| self.continuous_weight * law.cdf_integral(lo, hi));
        let b = self.atoms.partition_point(|&x| x < hi);
        for i in 0..b {
            acc += self.masses[i] * (hi - self.atoms[i].max(lo));
        }
        acc
    }

    /// Generalized inverse `inf { x : F(x) ≥ u }`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let u = u.min(1.0);
        for &x in &self.atoms {
            if self.cdf_left(x) < u && u <= self.cdf(x) {
                return x;
            }
        }
        match (&self.continuous, self.atoms.is_empty()) {
            (Some(law), true) => return law.quantile(u),
            (None, _) => return *self.atoms.last().expect("discrete law has atoms"),
            _ => {}
        }
        // Mixed law: bracket and bisect on F.
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        let mut guard = 0;
        while self.cdf(hi) < u && guard < 2100 {
            hi = 2.0 * hi + 1.0;
            guard += 1;
        }
        if self.cdf(hi) < u {
            return f64::INFINITY;
        }
        guard = 0;
        while self.cdf(lo) >= u && guard < 2100 {
            lo = 2.0 * lo - 1.0;
            guard += 1;
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * hi.abs().max(1.0) {
                break;
            }
        }
        hi
    }

    /// True when `F` is constant on some interval `(x - ε, x)`.
    pub fn flat_left_of(&self, x: f64) -> bool {
        self.continuous.is_none_or(|law| law.flat_left_of(x))
    }

    /// True when `F(t) = 0` for some real `t`.
    pub fn attains_zero(&self) -> bool {
        self.continuous.is_none_or(|law| law.attains_zero())
    }

    /// True when `F(t) = 1` for some real `t`.
    pub fn attains_one(&self) -> bool {
        self.continuous.is_none_or(|law| law.attains_one())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let (Some(law), true) = (&self.continuous, self.atoms.is_empty()) {
            return law.sample(rng);
        }
        let u: f64 = rng.random();
        if let Some(law) = &self.continuous {
            if u < self.continuous_weight {
                return law.sample(rng);
            }
        }
        let target = u - self.continuous_weight;
        let i = self.cumulative[1..].partition_point(|&c| c <= target);
        self.atoms[i.min(self.atoms.len() - 1)]
    }
}

/// `d(s, t) = |F₀(s) - F₀(t)|`.
pub fn cdf_distance(f0: &ReferenceDistribution, s: f64, t: f64) -> f64 {
    (f0.cdf(s) - f0.cdf(t)).abs()
}

impl fmt::Display for ReferenceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_atoms = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            write!(f, "[")?;
            for (i, (x, m)) in self.atoms().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "({x},{m})")?;
            }
            write!(f, "]")
        };
        match (&self.continuous, self.atoms.is_empty()) {
            (Some(law), true) => law.write_spec(f),
            (None, _) => {
                write!(f, "discrete:")?;
                write_atoms(f)
            }
            (Some(law), false) => {
                write!(f, "mixed:")?;
                law.write_spec(f)?;
                write!(f, "|")?;
                write_atoms(f)
            }
        }
    }
}

fn parse_numbers(s: &str, expected: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(Error::Parse(format!("expected {expected} numbers in {s:?}")));
    }
    Ok(values)
}

fn parse_continuous(s: &str) -> Result<ContinuousLaw> {
    let (name, args) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("missing ':' in {s:?}")))?;
    match name.trim() {
        "uniform" => {
            let v = parse_numbers(args, 2)?;
            Ok(ContinuousLaw::Uniform { lo: v[0], hi: v[1] })
        }
        "gaussian" | "normal" => {
            let v = parse_numbers(args, 2)?;
            Ok(ContinuousLaw::Gaussian { mean: v[0], sd: v[1] })
        }
        "exponential" => {
            let v = parse_numbers(args, 1)?;
            Ok(ContinuousLaw::Exponential { rate: v[0] })
        }
        other => Err(Error::Parse(format!("unknown continuous law {other:?}"))),
    }
}

fn parse_atoms(s: &str) -> Result<Vec<(f64, f64)>> {
    let body = s
        .trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("atom list must be bracketed: {s:?}")))?;
    let mut atoms = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' in {rest:?}")))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unclosed atom in {rest:?}")))?;
        let v = parse_numbers(&open[..close], 2)?;
        atoms.push((v[0], v[1]));
        rest = open[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    Ok(atoms)
}

impl FromStr for ReferenceDistribution {
    type Err = Error;

    /// Parses `uniform:a,b`, `gaussian:m,s`, `exponential:r`,
    /// `discrete:[(x,p),...]` and `mixed:<continuous>|[(x,p),...]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(atoms) = s.strip_prefix("discrete:") {
            return Self::discrete(parse_atoms(atoms)?);
        }
        if let Some(rest) = s.strip_prefix("mixed:") {
            let (law, atoms) = rest
                .split_once('|')
                .ok_or_else(|| Error::Parse("mixed law needs '<law>|[atoms]'".into()))?;
            return Self::mixed(parse_continuous(law)?, parse_atoms(atoms)?);
        }
        let law = parse_continuous(s)?;
        Self::build(Some((law, 1.0)), vec![])
    }
}

impl TryFrom<String> for ReferenceDistribution {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ReferenceDistribution> for String {
    fn from(d: ReferenceDistribution) -> String {
        d.to_string()
    }
}

/// Finite grid `-∞ = s₀ < s₁ < … < s_M` used to discretise a path at
/// `F₀`-resolution β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaGrid {
    pub beta: f64,
    /// `s₁, …, s_M` (the leading `-∞` is implicit).
    pub points: Vec<f64>,
}

impl BetaGrid {
    /// `M`, the number of finite grid points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks `F₀(s_j) - F₀(s_{j-1}) ≥ β`, `F₀(s_j⁻) - F₀(s_{j-1}) ≤ 2β` and
    /// `F₀(s_M) < 1 - 2β` (vacuous when `M = 0`), returning the first violated condition.
    pub fn check(&self, f0: &ReferenceDistribution) -> std::result::Result<(), String> {
        let beta = self.beta;
        let mut prev_x = f64::NEG_INFINITY;
        let mut prev_f = 0.0;
        for (j, &x) in self.points.iter().enumerate() {
            if x <= prev_x {
                return Err(format!("s_{} = {x} not above s_{} = {prev_x}", j + 1, j));
            }
            let fx = f0.cdf(x);
            if fx - prev_f < beta {
                return Err(format!("F0(s_{}) - F0(s_{}) = {} < β = {beta}", j + 1, j, fx - prev_f));
            }
            let fl = f0.cdf_left(x);
            if fl - prev_f > 2.0 * beta {
                return Err(format!("F0(s_{}⁻) - F0(s_{}) = {} > 2β", j + 1, j, fl - prev_f));
            }
            prev_x = x;
            prev_f = fx;
        }
        // a grid {-∞} alone carries no constraints
        if !self.points.is_empty() && prev_f >= 1.0 - 2.0 * beta {
            return Err(format!("F0(s_M) = {prev_f} not below 1 - 2β = {}", 1.0 - 2.0 * beta));
        }
        Ok(())
    }
}

/// Greedy left-to-right grid: `s_j = Q(F₀(s_{j-1}) + β)`, stopping before the
/// first point whose CDF value would reach `1 - 2β`.
pub fn build_grid(f0: &ReferenceDistribution, beta: f64) -> Result<BetaGrid> {
    if !(beta > 0.0 && beta < 1.0) {
        return invalid(format!("β = {beta} outside (0, 1)"));
    }
    let ceiling = 1.0 - 2.0 * beta;
    let mut points = Vec::new();
    let mut prev_f = 0.0;
    loop {
        let target = prev_f + beta;
        if target >= ceiling {
            break;
        }
        let mut x = f0.quantile(target);
        if !x.is_finite() {
            break;
        }
        let mut step = x.abs().max(1.0) * 1e-15;
        // the increment itself must reach β after rounding, not just the target
        while f0.cdf(x) - prev_f < beta {
            x += step;
            step *= 2.0;
        }
        let fx = f0.cdf(x);
        if fx >= ceiling {
            break;
        }
        points.push(x);
        prev_f = fx;
    }
    Ok(BetaGrid { beta, points })
}
