//! Right-continuous bounded-variation functions on ℝ.
//!
//! A [`BVFunction`] is piecewise affine between finitely many knots
//! `a₁ < … < a_m`, may jump at each knot, and is constant on both tails. On
//! `[a_j, a_{j+1})` it equals `g(a_j) + s_j (x - a_j)`, and
//! `g(a_j) = g(a_j⁻) + α_j`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{invalid, unsupported, Error, Result};
use crate::refdist::{ReferenceDistribution, MAX_MOMENT_DEGREE};
use crate::special::binomial;

/// One knot: location, slope on `[x, next knot)`, and jump `g(x) - g(x⁻)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub x: f64,
    pub slope: f64,
    pub jump: f64,
}

impl Knot {
    pub fn new(x: f64, slope: f64, jump: f64) -> Self {
        Self { x, slope, jump }
    }

    pub fn step(x: f64, jump: f64) -> Self {
        Self { x, slope: 0.0, jump }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BVFunction {
    left_tail: f64,
    knots: Vec<f64>,
    slopes: Vec<f64>,
    jumps: Vec<f64>,
    values: Vec<f64>,
    left_limits: Vec<f64>,
}

impl BVFunction {
    pub fn new(left_tail: f64, knots: impl IntoIterator<Item = Knot>) -> Result<Self> {
        let knots: Vec<Knot> = knots.into_iter().collect();
        if !left_tail.is_finite() {
            return invalid("left tail value must be finite");
        }
        for (i, k) in knots.iter().enumerate() {
            if !(k.x.is_finite() && k.slope.is_finite() && k.jump.is_finite()) {
                return invalid(format!("non-finite knot {k:?}"));
            }
            if i > 0 && knots[i - 1].x >= k.x {
                return invalid(format!("knots not strictly increasing at {}", k.x));
            }
        }
        if let Some(last) = knots.last() {
            if last.slope != 0.0 {
                return invalid("right tail must be constant (last slope 0)");
            }
        }
        let m = knots.len();
        let mut values = Vec::with_capacity(m);
        let mut left_limits = Vec::with_capacity(m);
        let mut current = left_tail;
        for (i, k) in knots.iter().enumerate() {
            if i > 0 {
                let prev = &knots[i - 1];
                current += prev.slope * (k.x - prev.x);
            }
            left_limits.push(current);
            current += k.jump;
            values.push(current);
        }
        Ok(Self {
            left_tail,
            knots: knots.iter().map(|k| k.x).collect(),
            slopes: knots.iter().map(|k| k.slope).collect(),
            jumps: knots.iter().map(|k| k.jump).collect(),
            values,
            left_limits,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, []).expect("constant function")
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `1_{(-∞, t]}` on floating-point arguments: the drop sits at the next
    /// representable number above `t`, which keeps the function right-continuous.
    pub fn indicator_le(t: f64) -> Result<Self> {
        Self::new(1.0, [Knot::step(t.next_up(), -1.0)])
    }

    /// `1_{(-∞, t)}`.
    pub fn indicator_lt(t: f64) -> Result<Self> {
        Self::new(1.0, [Knot::step(t, -1.0)])
    }

    /// `1_{[t, ∞)}`.
    pub fn indicator_ge(t: f64) -> Result<Self> {
        Self::new(0.0, [Knot::step(t, 1.0)])
    }

    /// `1_{[a, b)}`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return invalid(format!("empty interval [{a}, {b})"));
        }
        Self::new(0.0, [Knot::step(a, 1.0), Knot::step(b, -1.0)])
    }

    /// Affine ramp from `(x0, y0)` to `(x1, y1)` with constant extension on
    /// both sides.
    pub fn ramp(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1) {
            return invalid("ramp needs x0 < x1");
        }
        Self::new(y0, [Knot::new(x0, (y1 - y0) / (x1 - x0), 0.0), Knot::step(x1, 0.0)])
    }

    pub fn knots(&self) -> impl Iterator<Item = Knot> + '_ {
        (0..self.knots.len()).map(|i| Knot::new(self.knots[i], self.slopes[i], self.jumps[i]))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.knots
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// `g(a_j)` for each knot.
    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    /// `g(a_j⁻)` for each knot.
    pub fn knot_left_limits(&self) -> &[f64] {
        &self.left_limits
    }

    pub fn left_tail(&self) -> f64 {
        self.left_tail
    }

    pub fn right_tail(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.left_tail)
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.slopes.iter().all(|&s| s == 0.0)
    }

    pub fn is_continuous(&self) -> bool {
        self.jumps.iter().all(|&a| a == 0.0)
    }

    /// `g(x)`, right-continuous at knots.
    pub fn eval(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return self.right_tail();
        }
        let k = self.knots.partition_point(|&a| a <= x);
        if k == 0 {
            self.left_tail
        } else {
            let j = k - 1;
            self.values[j] + self.slopes[j] * (x - self.knots[j])
        }
    }

    /// `g(x⁻)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return self.left_tail;
        }
        if x == f64::INFINITY {
            return self.right_tail();
        }
        let k = self.knots.partition_point(|&a| a < x);
        if k == 0 {
            self.left_tail
        } else {
            let j = k - 1;
            self.values[j] + self.slopes[j] * (x - self.knots[j])
        }
    }

    /// `g(x) - g(x⁻)`; zero off the knots.
    pub fn jump_at(&self, x: f64) -> f64 {
        match self.knots.binary_search_by(|a| a.total_cmp(&x)) {
            Ok(i) => self.jumps[i],
            Err(_) => 0.0,
        }
    }

    /// Slope of the affine piece containing `x` (right-continuous convention).
    pub fn slope_at(&self, x: f64) -> f64 {
        let k = self.knots.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.slopes[k - 1]
        }
    }

    /// `‖g‖_TV = Σ|α_j| + Σ|s_j|(a_{j+1} - a_j)`.
    pub fn tv_norm(&self) -> f64 {
        let jumps: f64 = self.jumps.iter().map(|a| a.abs()).sum();
        let slopes: f64 = self
            .knots
            .windows(2)
            .zip(&self.slopes)
            .map(|(w, s)| s.abs() * (w[1] - w[0]))
            .sum();
        jumps + slopes
    }

    /// `sup |g|`, attained at a tail, a knot value, or a left limit.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .chain(&self.left_limits)
            .fold(self.left_tail.abs(), |m, v| m.max(v.abs()))
    }

    /// Affine pieces `(lo, hi, value at lo, slope)` covering ℝ, tails included.
    fn pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let m = self.knots.len();
        let mut out = Vec::with_capacity(m + 1);
        let first = self.knots.first().copied().unwrap_or(f64::INFINITY);
        out.push((f64::NEG_INFINITY, first, self.left_tail, 0.0));
        for j in 0..m {
            let hi = if j + 1 < m { self.knots[j + 1] } else { f64::INFINITY };
            out.push((self.knots[j], hi, self.values[j], self.slopes[j]));
        }
        out
    }

    /// `∫|g|^p dF₀` raised to `1/p`, exact for catalog laws.
    pub fn lp_norm(&self, f0: &ReferenceDistribution, p: u32) -> Result<f64> {
        if p == 0 {
            return invalid("L_p norm needs p ≥ 1");
        }
        if p > MAX_MOMENT_DEGREE && !self.is_piecewise_constant() {
            return unsupported(format!("L_{p} norm of a sloped function (max p = {MAX_MOMENT_DEGREE})"));
        }
        let mut total = 0.0;
        for (lo, hi, v, s) in self.pieces() {
            if lo >= hi {
                continue;
            }
            if s == 0.0 {
                if v != 0.0 {
                    total += v.abs().powi(p as i32) * f0.mass(lo, hi);
                }
                continue;
            }
            let root = lo - v / s;
            let mut cuts = vec![lo];
            if root > lo && root < hi {
                cuts.push(root);
            }
            cuts.push(hi);
            for w in cuts.windows(2) {
                let (l, h) = (w[0], w[1]);
                let gl = v + s * (l - lo);
                let gh = v + s * (h - lo);
                // expand around the endpoint nearer the zero of g
                let (c, gc) = if gl.abs() <= gh.abs() { (l, gl) } else { (h, gh) };
                let sign = if gl + gh >= 0.0 { 1.0 } else { -1.0 };
                let a = sign * gc;
                let b = sign * s;
                for k in 0..=p {
                    let coeff = binomial(p, k) * a.powi((p - k) as i32) * b.powi(k as i32);
                    if coeff != 0.0 {
                        total += coeff * f0.moment_about_unchecked(l, h, c, k);
                    }
                }
            }
        }
        Ok(total.max(0.0).powf(1.0 / p as f64))
    }

    /// `∫ g dF`.
    pub fn expectation(&self, law: &ReferenceDistribution) -> f64 {
        self.pieces()
            .into_iter()
            .filter(|(lo, hi, _, _)| lo < hi)
            .map(|(lo, hi, v, s)| {
                let mut acc = if v != 0.0 { v * law.mass(lo, hi) } else { 0.0 };
                if s != 0.0 {
                    acc += s * law.moment_about_unchecked(lo, hi, lo, 1);
                }
                acc
            })
            .sum()
    }

    /// `∫ f g dF`.
    pub fn product_expectation(&self, other: &BVFunction, law: &ReferenceDistribution) -> f64 {
        let cuts = merged_knots(&self.knots, &other.knots);
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(f64::NEG_INFINITY);
        edges.extend(cuts);
        edges.push(f64::INFINITY);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if lo >= hi {
                continue;
            }
            let (c, v1, s1, v2, s2) = if lo.is_finite() {
                (lo, self.eval(lo), self.slope_at(lo), other.eval(lo), other.slope_at(lo))
            } else {
                (0.0, self.left_tail, 0.0, other.left_tail, 0.0)
            };
            let c0 = v1 * v2;
            let c1 = v1 * s2 + v2 * s1;
            let c2 = s1 * s2;
            if c0 != 0.0 {
                acc += c0 * law.mass(lo, hi);
            }
            if c1 != 0.0 {
                acc += c1 * law.moment_about_unchecked(lo, hi, c, 1);
            }
            if c2 != 0.0 {
                acc += c2 * law.moment_about_unchecked(lo, hi, c, 2);
            }
        }
        acc
    }

    /// Lebesgue integral `∫_lo^hi g(x) dx` over a finite range.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if !(lo < hi) {
            return 0.0;
        }
        self.pieces()
            .into_iter()
            .map(|(pl, ph, v, s)| {
                let l = pl.max(lo);
                let h = ph.min(hi);
                if l >= h {
                    return 0.0;
                }
                let gl = if pl.is_finite() { v + s * (l - pl) } else { v };
                (h - l) * (gl + 0.5 * s * (h - l))
            })
            .sum()
    }

    pub fn scale(&self, c: f64) -> BVFunction {
        self.combine(c, &BVFunction::zero(), 0.0)
    }

    /// `a·self + b·other` on the merged knot set, dropping knots that carry
    /// neither a jump nor a slope change.
    pub fn combine(&self, a: f64, other: &BVFunction, b: f64) -> BVFunction {
        let cuts = merged_knots(&self.knots, &other.knots);
        let mut knots = Vec::with_capacity(cuts.len());
        let mut prev_slope = 0.0;
        for x in cuts {
            let slope = a * self.slope_at(x) + b * other.slope_at(x);
            let jump = a * self.jump_at(x) + b * other.jump_at(x);
            if jump != 0.0 || slope != prev_slope {
                knots.push(Knot::new(x, slope, jump));
                prev_slope = slope;
            }
        }
        if let Some(last) = knots.last_mut() {
            // exact cancellation of tail slopes is guaranteed; guard rounding
            last.slope = 0.0;
        }
        BVFunction::new(a * self.left_tail + b * other.left_tail, knots).expect("merged knots are valid")
    }

    /// `self - other`.
    pub fn difference(&self, other: &BVFunction) -> BVFunction {
        self.combine(1.0, other, -1.0)
    }

    /// Decomposition `g = c + Σ_j α_j 1_{[a_j, ∞)}` for piecewise-constant `g`.
    pub fn ray_decomposition(&self) -> Result<(f64, Vec<(f64, f64)>)> {
        if !self.is_piecewise_constant() {
            return unsupported("ray decomposition needs a piecewise-constant function");
        }
        let rays = self
            .knots
            .iter()
            .zip(&self.jumps)
            .filter(|(_, &a)| a != 0.0)
            .map(|(&x, &a)| (x, a))
            .collect();
        Ok((self.left_tail, rays))
    }
}

fn merged_knots(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

impl fmt::Display for BVFunction {
    /// `left v`, one `x slope jump` row per knot, then `right v`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "left {:?}", self.left_tail)?;
        for k in self.knots() {
            writeln!(f, "{:?} {:?} {:?}", k.x, k.slope, k.jump)?;
        }
        writeln!(f, "right {:?}", self.right_tail())
    }
}

impl FromStr for BVFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut left = None;
        let mut right = None;
        let mut knots = Vec::new();
        let num = |t: &str| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}")));
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["left", v] => left = Some(num(v)?),
                ["right", v] => right = Some(num(v)?),
                [x, slope, jump] => knots.push(Knot::new(num(x)?, num(slope)?, num(jump)?)),
                _ => return Err(Error::Parse(format!("line {}: cannot read {raw:?}", lineno + 1))),
            }
        }
        let left = left.ok_or_else(|| Error::Parse("missing `left` row".into()))?;
        let g = BVFunction::new(left, knots)?;
        if let Some(r) = right {
            let tol = 1e-9 * (1.0 + g.tv_norm() + left.abs());
            if (g.right_tail() - r).abs() > tol {
                return Err(Error::Parse(format!("declared right tail {r} but rows give {}", g.right_tail())));
            }
        }
        Ok(g)
    }
}

/// A BV function that may differ from its right-continuous version at
/// finitely many points.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralBVFunction {
    base: BVFunction,
    overrides: BTreeMap<OrderedX, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedX(f64);

impl Eq for OrderedX {}

impl PartialOrd for OrderedX {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedX {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl GeneralBVFunction {
    pub fn new(base: BVFunction, overrides: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, v) in overrides {
            if !x.is_finite() || !v.is_finite() {
                return invalid(format!("non-finite override ({x}, {v})"));
            }
            map.insert(OrderedX(x), v);
        }
        Ok(Self { base, overrides: map })
    }

    pub fn from_right_continuous(base: BVFunction) -> Self {
        Self { base, overrides: BTreeMap::new() }
    }

    /// Point values that differ from the right-continuous version.
    pub fn overrides(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.overrides.iter().map(|(k, &v)| (k.0, v))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.overrides.get(&OrderedX(x)).copied().unwrap_or_else(|| self.base.eval(x))
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        self.base.left_limit(x)
    }

    /// `ḡ(x) = g(x⁺)`.
    pub fn regularize(&self) -> BVFunction {
        self.base.clone()
    }

    /// Total variation counting both one-sided jumps at each override.
    pub fn tv_norm(&self) -> f64 {
        let mut tv = self.base.tv_norm();
        for (x, c) in self.overrides() {
            let l = self.base.left_limit(x);
            let v = self.base.eval(x);
            tv += (c - l).abs() + (v - c).abs() - (v - l).abs();
        }
        tv
    }

    pub fn sup_norm(&self) -> f64 {
        self.overrides().fold(self.base.sup_norm(), |m, (_, c)| m.max(c.abs()))
    }

    /// `∫ g dF`; overrides contribute only through atoms of `F`.
    pub fn expectation(&self, law: &ReferenceDistribution) -> f64 {
        let mut acc = self.base.expectation(law);
        for (x, c) in self.overrides() {
            let m = law.atom_mass(x);
            if m != 0.0 {
                acc += (c - self.base.eval(x)) * m;
            }
        }
        acc
    }
}

/// Sampler for random BV functions with `‖g‖_TV ≤ bound` and `‖g‖_∞ ≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBv {
    pub max_knots: usize,
    pub bound: f64,
    pub lo: f64,
    pub hi: f64,
    pub piecewise_constant: bool,
    /// Probability that a knot is copied from the caller's pool.
    pub pool_probability: f64,
}

impl Default for RandomBv {
    fn default() -> Self {
        Self { max_knots: 6, bound: 1.0, lo: -3.0, hi: 3.0, piecewise_constant: false, pool_probability: 0.0 }
    }
}

impl RandomBv {
    /// Draws a function; knot locations come from `pool` with
    /// `pool_probability`, which lets callers force shared atom locations.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, pool: &[f64]) -> BVFunction {
        let count = rng.random_range(0..=self.max_knots);
        let mut xs: Vec<f64> = (0..count)
            .map(|_| {
                if !pool.is_empty() && rng.random::<f64>() < self.pool_probability {
                    pool[rng.random_range(0..pool.len())]
                } else {
                    rng.random_range(self.lo..self.hi)
                }
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let m = xs.len();
        let knots: Vec<Knot> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let jump = if rng.random::<f64>() < 0.8 { rng.random_range(-1.0..1.0) } else { 0.0 };
                let slope = if self.piecewise_constant || i + 1 == m || rng.random::<f64>() < 0.4 {
                    0.0
                } else {
                    rng.random_range(-2.0..2.0)
                };
                Knot::new(x, slope, jump)
            })
            .collect();
        let left = rng.random_range(-1.0..1.0);
        let g = BVFunction::new(left, knots).expect("sorted distinct knots");
        let size = g.tv_norm().max(g.sup_norm());
        if size > self.bound && size > 0.0 {
            g.scale(self.bound / size)
        } else {
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn partition_tv(g: &BVFunction, extra: &[f64]) -> f64 {
        // evaluate along the canonical partition with explicit left-limit probes
        let mut seq = vec![g.left_tail()];
        let mut pts: Vec<f64> = g.breakpoints().iter().copied().chain(extra.iter().copied()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for x in pts {
            seq.push(g.left_limit(x));
            seq.push(g.eval(x));
        }
        seq.push(g.right_tail());
        seq.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(BVFunction::indicator_le(0.3).unwrap().tv_norm(), 1.0);
        assert_eq!(BVFunction::interval(0.0, 1.0).unwrap().tv_norm(), 2.0);
        let g = BVFunction::new(0.0, [Knot::new(0.0, 1.0, 0.0), Knot::step(1.0, 0.0), Knot::step(2.0, -1.0)]).unwrap();
        assert!((g.tv_norm() - 2.0).abs() < 1e-15);
        assert_eq!(BVFunction::zero().tv_norm(), 0.0);
    }

    #[test]
    fn sup_examples() {
        assert_eq!(BVFunction::interval(0.0, 1.0).unwrap().sup_norm(), 1.0);
        assert_eq!(BVFunction::zero().sup_norm(), 0.0);
        assert!((BVFunction::ramp(0.0, 0.0, 1.0, -3.0).unwrap().sup_norm() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn indicator_le_is_closed_at_t() {
        let g = BVFunction::indicator_le(0.5).unwrap();
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(0.5_f64.next_up()), 0.0);
        assert_eq!(g.eval(-10.0), 1.0);
        let h = BVFunction::indicator_lt(0.5).unwrap();
        assert_eq!(h.eval(0.5), 0.0);
        assert_eq!(h.left_limit(0.5), 1.0);
    }

    #[test]
    fn lp_examples() {
        let u02 = ReferenceDistribution::uniform(0.0, 2.0).unwrap();
        let g = BVFunction::indicator_le(0.0).unwrap();
        assert!(g.lp_norm(&u02, 1).unwrap().abs() < 1e-15);
        let g = BVFunction::indicator_le(1.0).unwrap();
        assert!((g.lp_norm(&u02, 1).unwrap() - 0.5).abs() < 1e-15);
        let u01 = ReferenceDistribution::uniform(0.0, 1.0).unwrap();
        let g = BVFunction::new(0.0, [Knot::new(0.0, 1.0, 0.0), Knot::step(1.0, -1.0)]).unwrap();
        // Simpson oracle on x² over [0, 1]
        let n = 1000;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let x = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * x * x;
        }
        let oracle = (s * h / 3.0).sqrt();
        assert!((g.lp_norm(&u01, 2).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(matches!(g.lp_norm(&u01, 9), Err(Error::Capability(_))));
        assert!(g.lp_norm(&u01, 0).is_err());
    }

    #[test]
    fn lp_norm_against_quadrature() {
        let mut rng = seeded(3);
        let spec = RandomBv { max_knots: 5, bound: 3.0, lo: -2.0, hi: 2.0, ..Default::default() };
        let laws: Vec<ReferenceDistribution> = ["gaussian:0,1", "exponential:1.2", "uniform:-1,1.5"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        for _ in 0..40 {
            let g = spec.sample(&mut rng, &[]);
            for law in &laws {
                for p in 1..=3u32 {
                    // composite Simpson between the discontinuities of g and of the density
                    let (lw, _) = law.continuous_part().unwrap();
                    let mut cuts: Vec<f64> = vec![-9.0, 40.0, -1.0, 1.5, 0.0];
                    cuts.extend(g.breakpoints().iter().copied());
                    cuts.sort_by(f64::total_cmp);
                    cuts.dedup();
                    let q: f64 = cuts
                        .windows(2)
                        .map(|w| {
                            let f = |x: f64| g.eval(x).abs().powi(p as i32) * lw.pdf(x);
                            // nudge inside so jumps of g and of the density stay at the ends
                            let (a, b) = (w[0], w[1]);
                            let n = 2000;
                            let h = (b - a) / n as f64;
                            let mut s = f(a.next_up()) + f(b.next_down());
                            for i in 1..n {
                                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
                            }
                            s * h / 3.0
                        })
                        .sum();
                    let got = g.lp_norm(law, p).unwrap().powi(p as i32);
                    assert!((got - q).abs() < 1e-7 * (1.0 + q), "{law} p={p}: {got} vs {q}\n{g}");
                }
            }
        }
    }

    #[test]
    fn lp_norm_with_atoms() {
        let law: ReferenceDistribution = "mixed:uniform:0,1|[(0.5,0.25),(2,0.25)]".parse().unwrap();
        let g = BVFunction::interval(0.5, 2.0).unwrap();
        // 0.5·P(U ∈ [0.5,1)) + atom at 0.5; 2 is excluded by [0.5, 2)
        let expected = 0.5 * 0.5 + 0.25;
        assert!((g.lp_norm(&law, 1).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn expectation_matches_product_with_one() {
        let mut rng = seeded(9);
        let law: ReferenceDistribution = "mixed:gaussian:0,1|[(0.25,0.2)]".parse().unwrap();
        let one = BVFunction::constant(1.0);
        for _ in 0..200 {
            let g = RandomBv::default().sample(&mut rng, &[0.25]);
            let a = g.expectation(&law);
            let b = g.product_expectation(&one, &law);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn regularize_examples() {
        let zero = BVFunction::zero();
        let g = GeneralBVFunction::new(zero.clone(), [(0.0, 5.0)]).unwrap();
        assert_eq!(g.regularize(), zero);
        assert_eq!(g.eval(0.0), 5.0);
        assert_eq!(g.tv_norm(), 10.0);
        let closed = GeneralBVFunction::new(BVFunction::interval(0.0, 1.0).unwrap(), [(1.0, 1.0)]).unwrap();
        let bar = closed.regularize();
        assert_eq!(bar.eval(1.0), 0.0);
        assert_eq!(closed.eval(1.0), 1.0);
        assert_eq!(closed.tv_norm(), 2.0);
        let plain = GeneralBVFunction::from_right_continuous(bar.clone());
        assert_eq!(plain.regularize(), bar);
    }

    #[test]
    fn difference_examples() {
        let g = BVFunction::ramp(0.0, 1.0, 2.0, -1.0).unwrap();
        let z = g.difference(&g);
        assert_eq!(z.tv_norm(), 0.0);
        assert_eq!(z.sup_norm(), 0.0);
        let (s, t) = (0.2, 0.9);
        let d = BVFunction::indicator_le(s).unwrap().difference(&BVFunction::indicator_le(t).unwrap());
        assert_eq!(d.tv_norm(), 2.0);
        assert_eq!(d.eval(s), 0.0);
        assert_eq!(d.eval(0.5), -1.0);
        assert_eq!(d.eval(t), -1.0);
        assert_eq!(d.eval(t.next_up()), 0.0);
    }

    #[test]
    fn text_round_trip() {
        let mut rng = seeded(21);
        for _ in 0..50 {
            let g = RandomBv::default().sample(&mut rng, &[]);
            let back: BVFunction = g.to_string().parse().unwrap();
            assert_eq!(g.breakpoints(), back.breakpoints());
            assert_eq!(g.jumps(), back.jumps());
            assert_eq!(g.slopes(), back.slopes());
            assert_eq!(g.left_tail(), back.left_tail());
        }
        let g: BVFunction = "# step\nleft 0\n0 0 1\n1 0 -1\nright 0\n".parse().unwrap();
        assert_eq!(g, BVFunction::interval(0.0, 1.0).unwrap());
        assert!("left 0\n0 0 1\nright 0\n".parse::<BVFunction>().is_err());
        assert!("0 0 1\n".parse::<BVFunction>().is_err());
    }

    #[test]
    fn rejects_bad_constructions() {
        assert!(BVFunction::new(0.0, [Knot::step(1.0, 1.0), Knot::step(0.0, 1.0)]).is_err());
        assert!(BVFunction::new(0.0, [Knot::new(1.0, 1.0, 0.0)]).is_err());
        assert!(BVFunction::new(f64::NAN, []).is_err());
    }

    fn bv_strategy() -> impl Strategy<Value = BVFunction> {
        (any::<u64>(), 0usize..8).prop_map(|(seed, k)| {
            let spec = RandomBv { max_knots: k, bound: 5.0, ..Default::default() };
            spec.sample(&mut seeded(seed), &[])
        })
    }

    proptest! {
        #[test]
        fn tv_matches_partition_supremum(g in bv_strategy(), extra in proptest::collection::vec(-4.0f64..4.0, 0..20)) {
            let tv = g.tv_norm();
            let canonical = partition_tv(&g, &[]);
            prop_assert!((tv - canonical).abs() <= 1e-12 * (1.0 + tv));
            let refined = partition_tv(&g, &extra);
            prop_assert!(refined <= tv + 1e-12 * (1.0 + tv));
        }

        #[test]
        fn difference_norm_triangle(a in bv_strategy(), b in bv_strategy()) {
            let d = a.difference(&b);
            prop_assert!(d.tv_norm() <= a.tv_norm() + b.tv_norm() + 1e-12);
            prop_assert!(d.sup_norm() <= a.sup_norm() + b.sup_norm() + 1e-12);
            for x in [-3.5, -1.0, 0.0, 0.3, 2.2, 3.9] {
                prop_assert!((d.eval(x) - (a.eval(x) - b.eval(x))).abs() < 1e-12);
            }
        }

        #[test]
        fn regularize_idempotent(g in bv_strategy(), xs in proptest::collection::vec((-3.0f64..3.0, -2.0f64..2.0), 0..4)) {
            let gen = GeneralBVFunction::new(g, xs).unwrap();
            let once = gen.regularize();
            let twice = GeneralBVFunction::from_right_continuous(once.clone()).regularize();
            for i in 0..400 {
                let x = -4.0 + 0.02 * i as f64;
                prop_assert_eq!(once.eval(x), twice.eval(x));
            }
        }

        #[test]
        fn l1_below_lp(g in bv_strategy(), p in 1u32..=6, which in 0usize..4) {
            let law: ReferenceDistribution = ["gaussian:0,1", "uniform:-2,2", "exponential:0.7", "discrete:[(-1,0.3),(0.5,0.7)]"][which].parse().unwrap();
            let l1 = g.lp_norm(&law, 1).unwrap();
            let lp = g.lp_norm(&law, p).unwrap();
            prop_assert!(l1 <= lp + 1e-12 * (1.0 + lp));
        }
    }
}
