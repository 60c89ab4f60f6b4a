//! Empirical paths `Z(t) = scale·#{X_i ≤ t} + Σ_k w_k F_k(t)`, the functional
//! `∫ g dZ`, the moduli Ψ and 𝕘, and the pathwise decoupling bounds.

use crate::bvcalc::{BVFunction, GeneralBVFunction};
use crate::error::{invalid, unsupported, Error, Result};
use crate::refdist::ReferenceDistribution;
use crate::stieltjes::ibp_decompose;

/// Relative tolerance for the algebraic tail check.
const A1_TOL: f64 = 1e-12;

/// Slack used when reporting whether `lhs ≤ rhs` held.
const BOUND_SLACK: f64 = 1e-12;

/// Signed multiple of a distribution function inside a path.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftTerm {
    pub weight: f64,
    pub law: ReferenceDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPath {
    points: Vec<f64>,
    counts: Vec<usize>,
    prefix_count: Vec<usize>,
    prefix_sum: Vec<f64>,
    n: usize,
    scale: f64,
    drift: Vec<DriftTerm>,
}

impl EmpiricalPath {
    pub fn new(sample: &[f64], scale: f64, drift: Vec<DriftTerm>) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return invalid(format!("path scale {scale} must be positive"));
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return invalid("sample contains non-finite values");
        }
        if drift.iter().any(|d| !d.weight.is_finite()) {
            return invalid("drift weight must be finite");
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut points = Vec::new();
        let mut counts = Vec::new();
        for x in sorted {
            match points.last() {
                Some(&last) if last == x => *counts.last_mut().unwrap() += 1,
                _ => {
                    points.push(x);
                    counts.push(1);
                }
            }
        }
        let mut prefix_count = vec![0usize];
        let mut prefix_sum = vec![0.0];
        for (&x, &c) in points.iter().zip(&counts) {
            prefix_count.push(prefix_count.last().unwrap() + c);
            prefix_sum.push(prefix_sum.last().unwrap() + c as f64 * x);
        }
        Ok(Self { points, counts, prefix_count, prefix_sum, n: sample.len(), scale, drift })
    }

    /// The identically zero path.
    pub fn zero() -> Self {
        Self::new(&[], 1.0, vec![]).expect("empty path")
    }

    /// `G_n(t) = n^{-1/2} Σ (1{X_i ≤ t} - F(t))`.
    pub fn make_gn(sample: &[f64], law: &ReferenceDistribution) -> Result<Self> {
        if sample.is_empty() {
            return invalid("G_n needs a nonempty sample");
        }
        let rn = (sample.len() as f64).sqrt();
        Self::new(sample, 1.0 / rn, vec![DriftTerm { weight: -rn, law: law.clone() }])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn drift(&self) -> &[DriftTerm] {
        &self.drift
    }

    /// Distinct sample points with multiplicities.
    pub fn points(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.points.iter().copied().zip(self.counts.iter().copied())
    }

    /// Sample points and drift atoms, sorted and distinct.
    pub fn knots(&self) -> Vec<f64> {
        let mut xs = self.points.clone();
        for d in &self.drift {
            xs.extend_from_slice(d.law.atom_locations());
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    fn count_le(&self, t: f64) -> usize {
        self.prefix_count[self.points.partition_point(|&x| x <= t)]
    }

    fn count_lt(&self, t: f64) -> usize {
        self.prefix_count[self.points.partition_point(|&x| x < t)]
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.at_infinity();
        }
        let drift: f64 = self.drift.iter().map(|d| d.weight * d.law.cdf(t)).sum();
        self.scale * self.count_le(t) as f64 + drift
    }

    pub fn left_limit(&self, t: f64) -> f64 {
        if t == f64::NEG_INFINITY {
            return 0.0;
        }
        if t == f64::INFINITY {
            return self.at_infinity();
        }
        let drift: f64 = self.drift.iter().map(|d| d.weight * d.law.cdf_left(t)).sum();
        self.scale * self.count_lt(t) as f64 + drift
    }

    /// `Z(t) - Z(t⁻)`, computed from multiplicities and atom masses.
    pub fn jump(&self, t: f64) -> f64 {
        let count = match self.points.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => self.counts[i],
            Err(_) => 0,
        };
        let drift: f64 = self.drift.iter().map(|d| d.weight * d.law.atom_mass(t)).sum();
        self.scale * count as f64 + drift
    }

    /// `sup_t |Z(t) - Z(t⁻)|`.
    pub fn max_jump(&self) -> f64 {
        self.knots().into_iter().map(|x| self.jump(x).abs()).fold(0.0, f64::max)
    }

    /// `Z(+∞) = scale·n + Σ w_k`.
    pub fn at_infinity(&self) -> f64 {
        self.scale * self.n as f64 + self.drift.iter().map(|d| d.weight).sum::<f64>()
    }

    /// Checks `Z(±∞) = 0`. `Z(-∞) = 0` holds by construction.
    pub fn check_a1(&self) -> Result<()> {
        let size = self.scale * self.n as f64 + self.drift.iter().map(|d| d.weight.abs()).sum::<f64>();
        let tail = self.at_infinity();
        if tail.abs() > A1_TOL * size.max(1.0) {
            return Err(Error::Contract(format!("path does not vanish at +∞ (Z(∞) = {tail})")));
        }
        Ok(())
    }

    /// `∫_lo^hi Z(x) dx` for finite `lo ≤ hi`.
    pub fn lebesgue_integral(&self, lo: f64, hi: f64) -> f64 {
        if !(lo < hi) {
            return 0.0;
        }
        let a = self.points.partition_point(|&x| x <= lo);
        let b = self.points.partition_point(|&x| x < hi);
        let below = self.prefix_count[a] as f64 * (hi - lo);
        let inside = if b > a {
            (self.prefix_count[b] - self.prefix_count[a]) as f64 * hi - (self.prefix_sum[b] - self.prefix_sum[a])
        } else {
            0.0
        };
        let drift: f64 = self.drift.iter().map(|d| d.weight * d.law.cdf_integral(lo, hi)).sum();
        self.scale * (below + inside) + drift
    }

    /// `∫ g dZ = scale·Σ g(X_i) + Σ_k w_k ∫ g dF_k`.
    pub fn integrate(&self, g: &BVFunction) -> f64 {
        let jumps: f64 = self.points().map(|(x, c)| c as f64 * g.eval(x)).sum();
        let drift: f64 = self.drift.iter().map(|d| d.weight * g.expectation(&d.law)).sum();
        self.scale * jumps + drift
    }

    /// `∫ g dZ` for a function with point overrides, evaluated atom by atom.
    pub fn integrate_general(&self, g: &GeneralBVFunction) -> f64 {
        let jumps: f64 = self.points().map(|(x, c)| c as f64 * g.eval(x)).sum();
        let drift: f64 = self.drift.iter().map(|d| d.weight * g.expectation(&d.law)).sum();
        self.scale * jumps + drift
    }
}

/// `G_n` for a sample and its law.
pub fn make_gn(sample: &[f64], law: &ReferenceDistribution) -> Result<EmpiricalPath> {
    EmpiricalPath::make_gn(sample, law)
}

/// `n^{-1/2} Σ (g(X_i) - ∫ g dF)` straight from the sample.
pub fn zbar_direct(g: &BVFunction, sample: &[f64], law: &ReferenceDistribution) -> Result<f64> {
    if sample.is_empty() {
        return invalid("empty sample");
    }
    let n = sample.len() as f64;
    let mean = g.expectation(law);
    let sum: f64 = sample.iter().map(|&x| g.eval(x) - mean).sum();
    Ok(sum / n.sqrt())
}

/// `∫ g dZ` through the integration-by-parts split `T₁ + T₂`.
pub fn zbar_ibp(g: &BVFunction, path: &EmpiricalPath) -> Result<f64> {
    Ok(ibp_decompose(g, path)?.total())
}

/// A computed inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    /// True when `lhs ≤ rhs` up to floating-point slack.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + BOUND_SLACK * (1.0 + self.rhs.abs())
    }
}

/// Graph of the path over one knot interval, in `u = F₀(t)` coordinates.
/// On the interval `Z` is affine in `u` with the common slope λ.
#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    zlo: f64,
    zhi: f64,
    lo_attained: bool,
    hi_attained: bool,
}

/// Slope of `Z` against `F₀` on knot-free intervals. Requires every drift
/// term's continuous part to share `F₀`'s continuous law.
fn drift_slope(path: &EmpiricalPath, f0: &ReferenceDistribution) -> Result<f64> {
    let mut sum = 0.0;
    let mut any = false;
    for d in &path.drift {
        if let Some((law, c)) = d.law.continuous_part() {
            if d.weight == 0.0 {
                continue;
            }
            match f0.continuous_part() {
                Some((law0, _)) if law0 == law => {
                    sum += d.weight * c;
                    any = true;
                }
                _ => {
                    return unsupported(format!(
                        "modulus needs the drift's continuous part {law:?} to match the reference law {f0}"
                    ))
                }
            }
        }
    }
    if !any {
        return Ok(0.0);
    }
    let (_, c0) = f0.continuous_part().expect("checked above");
    Ok(sum / c0)
}

fn segments(path: &EmpiricalPath, f0: &ReferenceDistribution) -> Vec<Segment> {
    let mut knots = path.knots();
    knots.extend_from_slice(f0.atom_locations());
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let m = knots.len();
    let mut out = Vec::with_capacity(m + 1);
    let (first_hi, first_zhi, first_flat) = match knots.first() {
        Some(&k) => (f0.cdf_left(k), path.left_limit(k), f0.flat_left_of(k)),
        None => (1.0, path.at_infinity(), f0.attains_one()),
    };
    let degenerate = first_hi == 0.0;
    out.push(Segment {
        lo: 0.0,
        hi: first_hi,
        zlo: 0.0,
        zhi: first_zhi,
        lo_attained: degenerate || f0.attains_zero(),
        hi_attained: degenerate || first_flat,
    });
    for i in 0..m {
        let k = knots[i];
        let lo = f0.cdf(k);
        let (hi, zhi, flat) = if i + 1 < m {
            let next = knots[i + 1];
            (f0.cdf_left(next), path.left_limit(next), f0.flat_left_of(next))
        } else {
            (1.0, path.at_infinity(), f0.attains_one())
        };
        let hi = hi.max(lo);
        out.push(Segment {
            lo,
            hi,
            zlo: path.eval(k),
            zhi,
            lo_attained: true,
            hi_attained: lo == hi || flat,
        });
    }
    out
}

/// Range-minimum table over a fixed array.
struct SparseMin {
    levels: Vec<Vec<f64>>,
}

impl SparseMin {
    fn new(values: Vec<f64>) -> Self {
        let mut levels = vec![values];
        let mut width = 1;
        while 2 * width <= levels[0].len() {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..prev.len() - width).map(|i| prev[i].min(prev[i + width])).collect();
            levels.push(next);
            width *= 2;
        }
        Self { levels }
    }

    /// Minimum over `[a, b]`, `+∞` when empty.
    fn query(&self, a: usize, b: usize) -> f64 {
        if a > b {
            return f64::INFINITY;
        }
        let len = b - a + 1;
        let level = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let row = &self.levels[level];
        row[a].min(row[b + 1 - (1 << level)])
    }
}

/// `Ψ_{β,F₀}(Z) = sup_{|F₀(s) - F₀(t)| ≤ β} |Z(s) - Z(t)|`.
///
/// For `β > 0` the supremum runs over the closure of the graph
/// `{(F₀(t), Z(t))}`, so one-sided limits count as attained. For `β = 0`
/// only genuinely attained points are compared, which leaves the jumps of
/// `Z` at points where `F₀` is locally flat.
pub fn modulus_psi(path: &EmpiricalPath, f0: &ReferenceDistribution, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return invalid(format!("β = {beta} must be nonnegative"));
    }
    let lambda = drift_slope(path, f0)?;
    let segs = segments(path, f0);
    if beta == 0.0 {
        return Ok(psi_at_zero(&segs));
    }
    let (segs, lambda) = if lambda < 0.0 {
        let flipped: Vec<Segment> = segs
            .iter()
            .rev()
            .map(|s| Segment {
                lo: 1.0 - s.hi,
                hi: 1.0 - s.lo,
                zlo: s.zhi,
                zhi: s.zlo,
                lo_attained: s.hi_attained,
                hi_attained: s.lo_attained,
            })
            .collect();
        (flipped, -lambda)
    } else {
        (segs, lambda)
    };
    let los: Vec<f64> = segs.iter().map(|s| s.lo).collect();
    let his: Vec<f64> = segs.iter().map(|s| s.hi).collect();
    let r_min = SparseMin::new(segs.iter().map(|s| s.zlo - lambda * s.lo).collect());
    let e_min = SparseMin::new(segs.iter().map(|s| s.zlo).collect());
    let mut best = 0.0_f64;
    for a in &segs {
        // feasible partners: hi_B ≥ lo_A - β and lo_B ≤ hi_A + β
        let left = his.partition_point(|&h| h < a.lo - beta);
        let right_end = los.partition_point(|&l| l <= a.hi + beta);
        if right_end == 0 || left >= right_end {
            continue;
        }
        let right = right_end - 1;
        // partners with lo_B ≥ hi_A - β reach their far endpoint; the rest bind at distance β
        let split = los.partition_point(|&l| l < a.hi - beta);
        let endpoint_from = split.max(left);
        if endpoint_from <= right {
            best = best.max(a.zhi - e_min.query(endpoint_from, right));
        }
        if split > left {
            let bind_to = (split - 1).min(right);
            best = best.max(a.zlo - lambda * a.lo + lambda * beta - r_min.query(left, bind_to));
        }
    }
    Ok(best.max(0.0))
}

fn psi_at_zero(segs: &[Segment]) -> f64 {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * segs.len());
    for s in segs {
        if s.lo_attained {
            pts.push((s.lo, s.zlo));
        }
        if s.hi_attained {
            pts.push((s.hi, s.zhi));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = 0.0_f64;
    let mut i = 0;
    while i < pts.len() {
        let mut j = i;
        let (mut lo, mut hi) = (pts[i].1, pts[i].1);
        while j < pts.len() && pts[j].0 == pts[i].0 {
            lo = lo.min(pts[j].1);
            hi = hi.max(pts[j].1);
            j += 1;
        }
        best = best.max(hi - lo);
        i = j;
    }
    best
}

/// `𝕘_{β,F₀}(Z) = sup_{F₀(s) - F₀(s⁻) > β} |Z(s) - Z(s⁻)|`, zero over an empty set.
pub fn modulus_atom(path: &EmpiricalPath, f0: &ReferenceDistribution, beta: f64) -> f64 {
    f0.atoms()
        .filter(|&(_, m)| m > beta)
        .map(|(x, _)| path.jump(x).abs())
        .fold(0.0, f64::max)
}

/// `|∫g dZ|` against `{2β⁻¹‖g‖_{L₁(F₀)} + 6‖g‖_TV} Ψ_{2β} + β⁻¹‖g‖_{L₁(F₀)} 𝕘_β`.
pub fn decoupling_bound(
    g: &BVFunction,
    f0: &ReferenceDistribution,
    path: &EmpiricalPath,
    beta: f64,
) -> Result<BoundCheck> {
    if !(beta > 0.0 && beta < 1.0) {
        return invalid(format!("β = {beta} outside (0, 1)"));
    }
    let l1 = g.lp_norm(f0, 1)?;
    let tv = g.tv_norm();
    let psi = modulus_psi(path, f0, 2.0 * beta)?;
    let atom = modulus_atom(path, f0, beta);
    let rhs = (2.0 * l1 / beta + 6.0 * tv) * psi + l1 / beta * atom;
    Ok(BoundCheck { lhs: path.integrate(g).abs(), rhs })
}

fn small_ball_bound(
    tv_budget: f64,
    tv_constant: f64,
    delta: f64,
    f0: &ReferenceDistribution,
    path: &EmpiricalPath,
    g: &BVFunction,
    p: u32,
) -> Result<BoundCheck> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("δ = {delta} outside (0, 1)"));
    }
    let tv = g.tv_norm();
    if tv > tv_budget {
        return invalid(format!("‖g‖_TV = {tv} exceeds {tv_budget}"));
    }
    let lp = g.lp_norm(f0, p)?;
    if lp > delta {
        return invalid(format!("‖g‖_L{p} = {lp} exceeds δ = {delta}"));
    }
    let root = delta.sqrt();
    let psi = modulus_psi(path, f0, 2.0 * root)?;
    let atom = modulus_atom(path, f0, root);
    Ok(BoundCheck { lhs: path.integrate(g).abs(), rhs: (2.0 * root + tv_constant) * psi + root * atom })
}

/// `(2√δ + 6T) Ψ_{2√δ} + √δ 𝕘_{√δ}` for `‖g‖_TV ≤ T`, `‖g‖_{L_p(F₀)} ≤ δ`.
pub fn corollary11_bound(
    t: f64,
    delta: f64,
    f0: &ReferenceDistribution,
    path: &EmpiricalPath,
    g: &BVFunction,
    p: u32,
) -> Result<BoundCheck> {
    small_ball_bound(t, 6.0 * t, delta, f0, path, g, p)
}

/// Difference version: `h = g - g'` with `‖h‖_TV ≤ 2T` and `‖h‖_{L₁(F₀)} ≤ δ`,
/// bounded by `(2√δ + 12T) Ψ_{2√δ} + √δ 𝕘_{√δ}`.
pub fn equicontinuity_bound(
    t: f64,
    delta: f64,
    f0: &ReferenceDistribution,
    path: &EmpiricalPath,
    h: &BVFunction,
) -> Result<BoundCheck> {
    small_ball_bound(2.0 * t, 12.0 * t, delta, f0, path, h, 1)
}

/// `|∫g dZ - ∫ḡ dZ|` against `‖g‖_TV · sup_x |Z(x) - Z(x⁻)|`.
pub fn lemma3_bound(g: &GeneralBVFunction, path: &EmpiricalPath) -> BoundCheck {
    let diff = (path.integrate_general(g) - path.integrate(&g.regularize())).abs();
    BoundCheck { lhs: diff, rhs: g.tv_norm() * path.max_jump() }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::bvcalc::{Knot, RandomBv};
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    /// Point-cloud oracle for Ψ: knot values, left limits, tails, a probe grid
    /// and the partners at `F₀`-distance exactly β, compared in a sliding window.
    pub(crate) fn psi_oracle(path: &EmpiricalPath, f0: &ReferenceDistribution, beta: f64, grid: usize) -> f64 {
        let mut ts: Vec<f64> = path.knots();
        ts.extend_from_slice(f0.atom_locations());
        let lo = ts.first().copied().unwrap_or(0.0) - 3.0;
        let hi = ts.last().copied().unwrap_or(0.0) + 3.0;
        for i in 0..grid {
            ts.push(lo + (hi - lo) * i as f64 / (grid - 1) as f64);
        }
        let mut cloud: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, path.at_infinity())];
        let push = |cloud: &mut Vec<(f64, f64)>, t: f64| {
            if t.is_finite() {
                cloud.push((f0.cdf(t), path.eval(t)));
                cloud.push((f0.cdf_left(t), path.left_limit(t)));
            }
        };
        for &t in &ts {
            push(&mut cloud, t);
        }
        let base = cloud.clone();
        for &(u, _) in &base {
            for v in [u - beta, u + beta] {
                if v > 0.0 && v < 1.0 {
                    push(&mut cloud, f0.quantile(v));
                    push(&mut cloud, f0.quantile(v).next_up());
                }
            }
        }
        cloud.sort_by(|a, b| a.0.total_cmp(&b.0));
        let us: Vec<f64> = cloud.iter().map(|c| c.0).collect();
        let mins = SparseMin::new(cloud.iter().map(|c| c.1).collect());
        let maxs = SparseMin::new(cloud.iter().map(|c| -c.1).collect());
        let mut best = 0.0_f64;
        for &(u, z) in &cloud {
            let a = us.partition_point(|&v| v < u - beta - 1e-13);
            let b = us.partition_point(|&v| v <= u + beta + 1e-13);
            best = best.max(z - mins.query(a, b - 1)).max(-maxs.query(a, b - 1) - z);
        }
        best
    }

    fn uniform01() -> ReferenceDistribution {
        ReferenceDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn make_gn_examples() {
        let f = uniform01();
        let p = make_gn(&[0.5], &f).unwrap();
        assert!((p.eval(0.5) - 0.5).abs() < 1e-15);
        assert!((p.eval(0.25) + 0.25).abs() < 1e-15);
        assert_eq!(p.eval(f64::INFINITY), 0.0);
        assert_eq!(p.left_limit(f64::NEG_INFINITY), 0.0);
        p.check_a1().unwrap();
        let p = make_gn(&[0.1, 0.2, 0.6, 0.8], &f).unwrap();
        assert!(p.eval(0.5).abs() < 1e-15);
        assert!(make_gn(&[], &f).is_err());
    }

    #[test]
    fn zbar_direct_examples() {
        let f = uniform01();
        let g = BVFunction::indicator_le(0.5).unwrap();
        assert!(zbar_direct(&g, &[0.1, 0.2, 0.6, 0.8], &f).unwrap().abs() < 1e-15);
        assert!((zbar_direct(&g, &[0.1, 0.2, 0.3, 0.4], &f).unwrap() - 1.0).abs() < 1e-15);
        let c = BVFunction::constant(2.5);
        assert!(zbar_direct(&c, &[0.3, 0.9, 0.1], &f).unwrap().abs() < 1e-15);
    }

    #[test]
    fn zbar_routes_with_collision() {
        let f = uniform01();
        let sample = [0.25, 0.5, 0.5, 0.9];
        let g = BVFunction::new(0.0, [Knot::new(0.1, 1.0, 0.0), Knot::step(0.5, -2.0)]).unwrap();
        let path = make_gn(&sample, &f).unwrap();
        let direct = zbar_direct(&g, &sample, &f).unwrap();
        let ibp = zbar_ibp(&g, &path).unwrap();
        assert!((direct - ibp).abs() < 1e-12, "{direct} vs {ibp}");
        assert!(zbar_ibp(&BVFunction::constant(1.0), &path).unwrap().abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        // unit step up at 0, down at 1
        let f0 = ReferenceDistribution::uniform(0.0, 2.0).unwrap();
        let step = ReferenceDistribution::discrete([(1.0, 1.0)]).unwrap();
        let path = EmpiricalPath::new(&[0.0], 1.0, vec![DriftTerm { weight: -1.0, law: step }]).unwrap();
        assert!((modulus_psi(&path, &f0, 0.4).unwrap() - 1.0).abs() < 1e-15);
        assert!((modulus_psi(&path, &f0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // continuous strictly increasing F₀: the constraint collapses to s = t
        let g = ReferenceDistribution::standard_normal();
        let gn = make_gn(&[-0.3, 0.4, 1.2], &g).unwrap();
        assert_eq!(modulus_psi(&gn, &g, 0.0).unwrap(), 0.0);
        assert!(modulus_psi(&gn, &g, -0.1).is_err());
    }

    #[test]
    fn psi_zero_sees_jumps_on_flats() {
        let f0 = ReferenceDistribution::uniform(0.0, 1.0).unwrap();
        // jump at 2 sits where F₀ is flat at 1
        let path = EmpiricalPath::new(
            &[0.5, 2.0],
            0.5,
            vec![DriftTerm { weight: -1.0, law: f0.clone() }],
        )
        .unwrap();
        assert!((modulus_psi(&path, &f0, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn psi_full_oscillation_at_beta_one() {
        let f = ReferenceDistribution::standard_normal();
        let mut rng = seeded(17);
        let xs: Vec<f64> = (0..30).map(|_| f.sample(&mut rng)).collect();
        let p = make_gn(&xs, &f).unwrap();
        let psi = modulus_psi(&p, &f, 1.0).unwrap();
        let mut zs: Vec<f64> = vec![0.0];
        for x in p.knots() {
            zs.push(p.eval(x));
            zs.push(p.left_limit(x));
        }
        let osc = zs.iter().cloned().fold(f64::MIN, f64::max) - zs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((psi - osc).abs() < 1e-12);
    }

    #[test]
    fn psi_rejects_mismatched_reference() {
        let f = ReferenceDistribution::standard_normal();
        let p = make_gn(&[0.1], &f).unwrap();
        let f0 = ReferenceDistribution::uniform(0.0, 1.0).unwrap();
        assert!(matches!(modulus_psi(&p, &f0, 0.1), Err(Error::Capability(_))));
    }

    #[test]
    fn atom_modulus_examples() {
        let f0: ReferenceDistribution = "discrete:[(0,0.5),(1,0.5)]".parse().unwrap();
        let path = EmpiricalPath::new(&[0.0], 0.3, vec![DriftTerm { weight: -0.3, law: ReferenceDistribution::discrete([(1.0, 1.0)]).unwrap() }]).unwrap();
        assert!((modulus_atom(&path, &f0, 0.4) - 0.3).abs() < 1e-15);
        assert_eq!(modulus_atom(&path, &f0, 0.6), 0.0);
        let c = ReferenceDistribution::standard_normal();
        assert_eq!(modulus_atom(&path, &c, 0.01), 0.0);
    }

    #[test]
    fn decoupling_examples() {
        let f = ReferenceDistribution::standard_normal();
        let p = make_gn(&[0.2, -1.0, 0.7], &f).unwrap();
        let b = decoupling_bound(&BVFunction::zero(), &f, &p, 0.2).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        let g = BVFunction::indicator_le(0.0).unwrap();
        let b = decoupling_bound(&g, &f, &EmpiricalPath::zero(), 0.2).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        assert!(decoupling_bound(&g, &f, &p, 0.0).is_err());
        assert!(decoupling_bound(&g, &f, &p, 1.0).is_err());
        let c = corollary11_bound(1.0, 0.1, &f, &p, &BVFunction::zero(), 1).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.rhs > 0.0 && c.holds());
        // ‖g‖_L1 = 1/2 > δ
        assert!(corollary11_bound(1.0, 0.1, &f, &p, &g, 1).is_err());
    }

    #[test]
    fn regularization_bound_examples() {
        let f = ReferenceDistribution::standard_normal();
        let p = make_gn(&[0.0], &f).unwrap();
        let c = 0.7;
        let g = GeneralBVFunction::new(BVFunction::zero(), [(0.0, c)]).unwrap();
        let b = lemma3_bound(&g, &p);
        assert!((b.lhs - c).abs() < 1e-15);
        assert!(b.rhs >= c);
        let plain = GeneralBVFunction::from_right_continuous(BVFunction::indicator_le(0.3).unwrap());
        assert_eq!(lemma3_bound(&plain, &p).lhs, 0.0);
        let tied = make_gn(&[0.0, 0.0, 1.0], &f).unwrap();
        assert!((tied.max_jump() - 2.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    fn law_pool() -> Vec<ReferenceDistribution> {
        [
            "gaussian:0,1",
            "uniform:-1,2",
            "exponential:1.5",
            "discrete:[(-1,0.2),(0,0.45),(1.5,0.35)]",
            "mixed:gaussian:0,1|[(0,0.3),(1,0.15)]",
            "mixed:uniform:0,1|[(0.5,0.4)]",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
    }

    #[test]
    fn psi_matches_point_cloud_oracle() {
        let laws = law_pool();
        let mut rng = seeded(99);
        for trial in 0..300 {
            let f = &laws[trial % laws.len()];
            let n = rng.random_range(1..25);
            let xs: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
            let path = if trial % 3 == 2 {
                // bootstrap-type path: purely atomic drift
                let resample: Vec<f64> = (0..n).map(|_| xs[rng.random_range(0..n)]).collect();
                let rm = (n as f64).sqrt();
                EmpiricalPath::new(
                    &resample,
                    1.0 / rm,
                    vec![DriftTerm { weight: -rm, law: ReferenceDistribution::empirical(&xs).unwrap() }],
                )
                .unwrap()
            } else {
                make_gn(&xs, f).unwrap()
            };
            let beta = [0.0, 0.01, 0.07, 0.2, 0.5, 0.9][rng.random_range(0..6)];
            let fast = modulus_psi(&path, f, beta).unwrap();
            if beta == 0.0 {
                continue;
            }
            let slow = psi_oracle(&path, f, beta, 2000);
            assert!((fast - slow).abs() < 1e-9, "trial {trial} {f} β={beta}: {fast} vs {slow}");
        }
    }

    proptest! {
        #[test]
        fn psi_monotone_and_atom_antitone(seed in any::<u64>(), which in 0usize..6) {
            let laws = law_pool();
            let f = &laws[which];
            let mut rng = seeded(seed);
            let n = rng.random_range(1..40);
            let xs: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
            let path = make_gn(&xs, f).unwrap();
            let mut prev_psi = 0.0;
            let mut prev_atom = f64::INFINITY;
            for beta in [0.0, 0.02, 0.05, 0.1, 0.25, 0.5, 1.0] {
                let psi = modulus_psi(&path, f, beta).unwrap();
                let atom = modulus_atom(&path, f, beta);
                prop_assert!(psi + 1e-12 >= prev_psi);
                prop_assert!(atom <= prev_atom);
                prev_psi = psi;
                prev_atom = atom;
            }
        }

        #[test]
        fn decoupling_holds(seed in any::<u64>(), which in 0usize..6) {
            let laws = law_pool();
            let f = &laws[which];
            let mut rng = seeded(seed);
            let n = rng.random_range(1..60);
            let xs: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
            let path = make_gn(&xs, f).unwrap();
            let g = RandomBv { bound: 2.0, ..Default::default() }.sample(&mut rng, &xs);
            let beta = rng.random_range(0.01..0.49);
            let b = decoupling_bound(&g, f, &path, beta).unwrap();
            prop_assert!(b.holds(), "{b:?}");
        }

        #[test]
        fn g_to_integral_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let f = ReferenceDistribution::standard_normal();
            let mut rng = seeded(seed);
            let xs: Vec<f64> = (0..20).map(|_| f.sample(&mut rng)).collect();
            let path = make_gn(&xs, &f).unwrap();
            let g1 = RandomBv::default().sample(&mut rng, &xs);
            let g2 = RandomBv::default().sample(&mut rng, &xs);
            let lhs = path.integrate(&g1.combine(a, &g2, b));
            let rhs = a * path.integrate(&g1) + b * path.integrate(&g2);
            prop_assert!((lhs - rhs).abs() < 1e-11);
        }
    }
}
