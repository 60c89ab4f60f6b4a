//! Deterministic suites: integration by parts, route equality, the pathwise
//! inequalities, regularization and grid invariants.

use rand::Rng;

use super::config::ExperimentConfig;
use super::domain;
use super::parallel_map;
use super::record::{ResultRecord, Witness};
use crate::bvcalc::{BVFunction, GeneralBVFunction, RandomBv};
use crate::empirical::{
    corollary11_bound, decoupling_bound, equicontinuity_bound, lemma3_bound, make_gn, modulus_atom, zbar_direct,
    zbar_ibp, BoundCheck,
};
use crate::error::Result;
use crate::generators::{stationary_cdf, GeneratorSpec};
use crate::refdist::{build_grid, ContinuousLaw, ReferenceDistribution};
use crate::rng::{stream, StreamRng};
use crate::stieltjes::{ibp_scale, integration_by_parts_check};

/// A law from every catalog family, atoms included.
pub(crate) fn random_reference(rng: &mut StreamRng) -> ReferenceDistribution {
    let continuous = |rng: &mut StreamRng| match rng.random_range(0..3) {
        0 => {
            let lo = rng.random_range(-2.0..1.0);
            ContinuousLaw::Uniform { lo, hi: lo + rng.random_range(0.2..3.0) }
        }
        1 => ContinuousLaw::Gaussian { mean: rng.random_range(-1.0..1.0), sd: rng.random_range(0.3..2.0) },
        _ => ContinuousLaw::Exponential { rate: rng.random_range(0.3..3.0) },
    };
    let atoms = |rng: &mut StreamRng, total: f64| {
        let k = rng.random_range(1..=5);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter()
            .map(|w| ((rng.random_range(-8..=8) as f64) / 4.0, total * w / s))
            .collect::<Vec<_>>()
    };
    match rng.random_range(0..5) {
        0 | 1 => ReferenceDistribution::mixed(continuous(rng), []).expect("valid law"),
        2 => ReferenceDistribution::discrete(atoms(rng, 1.0)).expect("valid law"),
        _ => {
            let w = rng.random_range(0.1..0.9);
            let law = continuous(rng);
            ReferenceDistribution::mixed(law, atoms(rng, 1.0 - w)).expect("valid law")
        }
    }
}

fn one_line(g: &BVFunction) -> String {
    g.to_string().trim_end().replace('\n', "; ")
}

fn cap(count: usize, cfg: &ExperimentConfig) -> usize {
    cfg.replications.map_or(count, |r| r.min(count))
}

/// Per-draw outcome of a suite: residual or ratio, plus a witness on failure.
struct Draw {
    value: f64,
    witness: Option<String>,
    atomic_hit: bool,
}

impl Draw {
    fn ok(value: f64) -> Self {
        Self { value, witness: None, atomic_hit: false }
    }
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let v = &cfg.verify;
    let t = &cfg.thresholds;
    let seed = cfg.seed;
    let marginal = match &cfg.generator {
        Some(_) => {
            let spec = cfg.data_spec()?;
            Some((stationary_cdf(&spec)?, spec))
        }
        None => None,
    };
    let mut record = ResultRecord::new(cfg);

    let ibp_pairs = cap(v.ibp_pairs, cfg);
    let shared = v.shared_pairs.min(ibp_pairs);
    let ibp = parallel_map(ibp_pairs, |i| Ok(ibp_draw(seed, i, i < shared, t.ibp_residual)));
    absorb(&mut record, "ibp", "ibp_residual", ibp?, t.ibp_residual, false);
    record.note("ibp_shared_pairs", shared as f64);

    let route = parallel_map(cap(v.route_draws, cfg), |i| route_draw(seed, i, v.route_max_n, t.route_error));
    absorb(&mut record, "route", "route_error", route?, t.route_error, false);

    let bounds = parallel_map(cap(v.bound_draws, cfg), |i| bound_draw(seed, i, marginal.as_ref()));
    let bounds = bounds?;
    for (k, name) in ["decoupling", "small_ball", "difference"].iter().enumerate() {
        let draws: Vec<Draw> = bounds
            .iter()
            .map(|triple| {
                let d = &triple[k];
                Draw { value: d.value, witness: d.witness.clone(), atomic_hit: d.atomic_hit }
            })
            .collect();
        absorb(&mut record, name, &format!("{name}_violations"), draws, 0.0, true);
    }

    let reg = parallel_map(cap(v.regularization_draws, cfg), |i| regularization_draw(seed, i));
    absorb(&mut record, "regularization", "regularization_violations", reg?, 0.0, true);

    let grid = parallel_map(cap(v.grid_draws, cfg), |i| grid_draw(seed, i, v.grid_max_beta));
    absorb(&mut record, "grid", "grid_violations", grid?, 0.0, true);

    Ok(record)
}

/// Adds rows, witnesses and one criterion. Counting suites judge the
/// number of witnesses; residual suites judge the largest value.
fn absorb(record: &mut ResultRecord, suite: &str, criterion: &str, draws: Vec<Draw>, threshold: f64, counting: bool) {
    let mut worst: f64 = 0.0;
    let mut violations = 0usize;
    let mut atomic = 0usize;
    for (i, d) in draws.iter().enumerate() {
        record.push_row(i, suite, d.value);
        worst = worst.max(d.value);
        atomic += d.atomic_hit as usize;
        if let Some(w) = &d.witness {
            violations += 1;
            record.witnesses.push(Witness { suite: suite.into(), draw: i, detail: w.clone() });
        }
    }
    record.note(format!("{suite}_draws"), draws.len() as f64);
    record.note(format!("{suite}_max"), worst);
    if atomic > 0 || suite == "decoupling" {
        record.note(format!("{suite}_atomic_branch_hits"), atomic as f64);
    }
    let (observed, passed) = if counting { (violations as f64, violations == 0) } else { (worst, violations == 0) };
    let detail = format!("{} draws, {violations} violations, max {worst:e}", draws.len());
    record.judge(criterion, passed, observed, threshold, detail);
}

fn ibp_draw(seed: u64, i: usize, engineered: bool, tolerance: f64) -> Draw {
    let mut rng = stream(seed, domain::IBP, i as u64);
    let spec = RandomBv { max_knots: 7, bound: 4.0, ..RandomBv::default() };
    let (f, g) = loop {
        let f = spec.sample(&mut rng, &[]);
        if !engineered {
            break (f, spec.sample(&mut rng, &[]));
        }
        let atoms: Vec<f64> = f.breakpoints().iter().zip(f.jumps()).filter(|p| *p.1 != 0.0).map(|p| *p.0).collect();
        if atoms.is_empty() {
            continue;
        }
        let g = RandomBv { pool_probability: 0.8, ..spec.clone() }.sample(&mut rng, &atoms);
        if atoms.iter().any(|&a| g.jump_at(a) != 0.0) {
            break (f, g);
        }
    };
    let residual = integration_by_parts_check(&f, &g).abs() / ibp_scale(&f, &g);
    let mut d = Draw::ok(residual);
    if !(residual <= tolerance) {
        d.witness = Some(format!("residual {residual:e}; f = [{}]; g = [{}]", one_line(&f), one_line(&g)));
    }
    d
}

fn route_draw(seed: u64, i: usize, max_n: usize, tolerance: f64) -> Result<Draw> {
    let mut rng = stream(seed, domain::ROUTE, i as u64);
    let law = random_reference(&mut rng);
    let n = rng.random_range(1..=max_n);
    let sample: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
    let g = RandomBv { pool_probability: 0.5, bound: rng.random_range(0.2..4.0), ..RandomBv::default() }
        .sample(&mut rng, &sample);
    let direct = zbar_direct(&g, &sample, &law)?;
    let ibp = zbar_ibp(&g, &make_gn(&sample, &law)?)?;
    let err = (direct - ibp).abs();
    let mut d = Draw::ok(err);
    if !(err <= tolerance) {
        d.witness = Some(format!("direct {direct} vs ibp {ibp}; law {law}; g = [{}]; sample {sample:?}", one_line(&g)));
    }
    Ok(d)
}

fn violation(check: &BoundCheck, context: &str) -> Option<String> {
    (!check.holds()).then(|| format!("lhs {:e} > rhs {:e}; {context}", check.lhs, check.rhs))
}

fn ratio(check: &BoundCheck) -> f64 {
    if check.rhs > 0.0 {
        check.lhs / check.rhs
    } else if check.lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `δ ∈ [norm, 1)` after shrinking `g` so that its norm is below one.
fn radius(rng: &mut StreamRng, norm: f64) -> f64 {
    norm + (1.0 - norm) * rng.random_range(0.01..0.99)
}

fn bound_draw(seed: u64, i: usize, marginal: Option<&(ReferenceDistribution, GeneratorSpec)>) -> Result<[Draw; 3]> {
    let mut rng = stream(seed, domain::BOUNDS, i as u64);
    let n = rng.random_range(1..=200);
    let (f0, sample) = match marginal {
        Some((law, spec)) if i % 2 == 0 => (law.clone(), spec.with_n(n).generate_with(&mut rng)?),
        _ => {
            let law = random_reference(&mut rng);
            let xs = (0..n).map(|_| law.sample(&mut rng)).collect();
            (law, xs)
        }
    };
    let path = make_gn(&sample, &f0)?;
    let sampler = RandomBv { pool_probability: 0.4, bound: rng.random_range(0.2..3.0), ..RandomBv::default() };
    let context = |g: &BVFunction, extra: String| {
        format!("F0 {f0}; g = [{}]; {extra}; sample {:?}", one_line(g), sample)
    };

    let g = sampler.sample(&mut rng, &sample);
    let beta = rng.random_range(0.005..0.995);
    let check = decoupling_bound(&g, &f0, &path, beta)?;
    let decoupling = Draw {
        value: ratio(&check),
        witness: violation(&check, &context(&g, format!("β {beta}"))),
        atomic_hit: modulus_atom(&path, &f0, beta) > 0.0,
    };

    let p = rng.random_range(1..=2u32);
    let mut g = sampler.sample(&mut rng, &sample);
    let mut lp = g.lp_norm(&f0, p)?;
    if lp >= 0.95 {
        g = g.scale(0.5 / lp);
        lp = g.lp_norm(&f0, p)?;
    }
    let delta = radius(&mut rng, lp);
    let t = g.tv_norm() * rng.random_range(1.0..1.5);
    let small_ball = match corollary11_bound(t, delta, &f0, &path, &g, p) {
        Ok(check) => Draw {
            value: ratio(&check),
            witness: violation(&check, &context(&g, format!("T {t}, δ {delta}, p {p}"))),
            atomic_hit: modulus_atom(&path, &f0, delta.sqrt()) > 0.0,
        },
        Err(e) => Draw { value: f64::NAN, witness: Some(format!("{e}; {}", context(&g, String::new()))), atomic_hit: false },
    };

    let (mut g1, mut g2) = (sampler.sample(&mut rng, &sample), sampler.sample(&mut rng, &sample));
    let mut h = g1.difference(&g2);
    let l1 = h.lp_norm(&f0, 1)?;
    if l1 >= 0.95 {
        g1 = g1.scale(0.5 / l1);
        g2 = g2.scale(0.5 / l1);
        h = g1.difference(&g2);
    }
    let l1 = h.lp_norm(&f0, 1)?;
    let delta = radius(&mut rng, l1);
    let t = g1.tv_norm().max(g2.tv_norm()).max(0.5 * h.tv_norm());
    let difference = match equicontinuity_bound(t, delta, &f0, &path, &h) {
        Ok(check) => Draw {
            value: ratio(&check),
            witness: violation(&check, &context(&h, format!("T {t}, δ {delta}"))),
            atomic_hit: modulus_atom(&path, &f0, delta.sqrt()) > 0.0,
        },
        Err(e) => Draw { value: f64::NAN, witness: Some(format!("{e}; {}", context(&h, String::new()))), atomic_hit: false },
    };
    Ok([decoupling, small_ball, difference])
}

fn regularization_draw(seed: u64, i: usize) -> Result<Draw> {
    let mut rng = stream(seed, domain::REGULARIZATION, i as u64);
    let law = random_reference(&mut rng);
    let distinct: Vec<f64> = (0..rng.random_range(1..=8)).map(|_| law.sample(&mut rng)).collect();
    let n = rng.random_range(1..=100);
    let sample: Vec<f64> = (0..n).map(|_| distinct[rng.random_range(0..distinct.len())]).collect();
    let path = make_gn(&sample, &law)?;
    let bound = rng.random_range(0.2..3.0);
    let base = RandomBv { pool_probability: 0.5, bound, ..RandomBv::default() }.sample(&mut rng, &distinct);
    let mut spots: Vec<f64> = distinct.clone();
    spots.extend_from_slice(base.breakpoints());
    let overrides: Vec<(f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let x = if rng.random::<f64>() < 0.8 { spots[rng.random_range(0..spots.len())] } else { rng.random_range(-3.0..3.0) };
            (x, rng.random_range(-bound..bound))
        })
        .collect();
    let g = GeneralBVFunction::new(base.clone(), overrides.clone())?;
    let check = lemma3_bound(&g, &path);
    let context = format!("F0 {law}; base = [{}]; overrides {overrides:?}; sample {sample:?}", one_line(&base));
    Ok(Draw { value: ratio(&check), witness: violation(&check, &context), atomic_hit: false })
}

fn grid_draw(seed: u64, i: usize, max_beta: f64) -> Result<Draw> {
    let mut rng = stream(seed, domain::GRID, i as u64);
    let law = random_reference(&mut rng);
    let beta = max_beta * (1.0 - rng.random::<f64>());
    let grid = build_grid(&law, beta)?;
    let limit = (1.0 / beta).ceil() as usize;
    let witness = match grid.check(&law) {
        Err(msg) => Some(format!("F0 {law}, β {beta}: {msg}")),
        Ok(()) if grid.len() > limit => Some(format!("F0 {law}, β {beta}: M = {} > {limit}", grid.len())),
        Ok(()) => None,
    };
    Ok(Draw { value: grid.len() as f64, witness, atomic_hit: false })
}
