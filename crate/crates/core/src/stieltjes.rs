//! Finite signed Lebesgue–Stieltjes measures generated by [`BVFunction`]s,
//! integration against them, and integration by parts with the diagonal
//! atom term.

use crate::bvcalc::BVFunction;
use crate::empirical::EmpiricalPath;
use crate::error::Result;

/// `dg` for a [`BVFunction`] `g`: atoms at the jumps plus a piecewise-constant
/// density equal to the slope.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StieltjesMeasure {
    /// `(location, mass)`, strictly increasing locations, nonzero masses.
    pub atoms: Vec<(f64, f64)>,
    /// `(lo, hi, density)` over disjoint finite intervals.
    pub density_pieces: Vec<(f64, f64, f64)>,
}

impl StieltjesMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `|μ|(ℝ)`.
    pub fn total_variation(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.1.abs()).sum();
        let dens: f64 = self.density_pieces.iter().map(|&(l, h, d)| d.abs() * (h - l)).sum();
        atoms + dens
    }

    /// `μ((-∞, x])`.
    pub fn cumulative(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.0 <= x).map(|a| a.1).sum();
        let dens: f64 = self
            .density_pieces
            .iter()
            .filter(|p| p.0 < x)
            .map(|&(l, h, d)| d * (h.min(x) - l))
            .sum();
        atoms + dens
    }
}

/// Measure `df` with `df((-∞, x]) = f(x) - f(-∞)`.
pub fn measure_of(f: &BVFunction) -> StieltjesMeasure {
    let xs = f.breakpoints();
    let atoms = xs
        .iter()
        .zip(f.jumps())
        .filter(|(_, &a)| a != 0.0)
        .map(|(&x, &a)| (x, a))
        .collect();
    let density_pieces = xs
        .windows(2)
        .zip(f.slopes())
        .filter(|(_, &s)| s != 0.0)
        .map(|(w, &s)| (w[0], w[1], s))
        .collect();
    StieltjesMeasure { atoms, density_pieces }
}

/// `∫ g dμ`, with `g` taking its right-continuous value at atoms.
pub fn integrate(g: &BVFunction, mu: &StieltjesMeasure) -> f64 {
    let atoms: f64 = mu.atoms.iter().map(|&(x, m)| g.eval(x) * m).sum();
    let dens: f64 = mu.density_pieces.iter().map(|&(l, h, d)| d * g.integral(l, h)).sum();
    atoms + dens
}

/// `∫∫ 1{x = y} dμ(x) dν(y)`: products of masses at exactly shared atom
/// locations.
pub fn cross_term(mu: &StieltjesMeasure, nu: &StieltjesMeasure) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < mu.atoms.len() && j < nu.atoms.len() {
        let (x, a) = mu.atoms[i];
        let (y, b) = nu.atoms[j];
        if x == y {
            acc += a * b;
            i += 1;
            j += 1;
        } else if x < y {
            i += 1;
        } else {
            j += 1;
        }
    }
    acc
}

/// `∫f dg + ∫g df - [(fg)(∞) - (fg)(-∞)] - ∫∫1{x=y} df dg`; zero in exact arithmetic.
pub fn integration_by_parts_check(f: &BVFunction, g: &BVFunction) -> f64 {
    let df = measure_of(f);
    let dg = measure_of(g);
    let boundary = f.right_tail() * g.right_tail() - f.left_tail() * g.left_tail();
    integrate(f, &dg) + integrate(g, &df) - boundary - cross_term(&df, &dg)
}

/// Residual tolerance scale `1 + ‖f‖_∞‖g‖_TV + ‖g‖_∞‖f‖_TV`.
pub fn ibp_scale(f: &BVFunction, g: &BVFunction) -> f64 {
    1.0 + f.sup_norm() * g.tv_norm() + g.sup_norm() * f.tv_norm()
}

/// `T₁ = -∫ Z dg`, `T₂ = Σ_j α_j (Z(a_j) - Z(a_j⁻))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpTerms {
    pub t1: f64,
    pub t2: f64,
}

impl IbpTerms {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2
    }
}

/// Splits `∫ g dZ` into `T₁ + T₂`; the path must vanish at both tails.
pub fn ibp_decompose(g: &BVFunction, path: &EmpiricalPath) -> Result<IbpTerms> {
    path.check_a1()?;
    let xs = g.breakpoints();
    let mut z_dg = 0.0;
    let mut t2 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let alpha = g.jumps()[i];
        if alpha != 0.0 {
            z_dg += alpha * path.eval(x);
            t2 += alpha * path.jump(x);
        }
        let s = g.slopes()[i];
        if s != 0.0 {
            z_dg += s * path.lebesgue_integral(x, xs[i + 1]);
        }
    }
    Ok(IbpTerms { t1: -z_dg, t2 })
}
