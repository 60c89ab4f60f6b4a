//! Monte Carlo experiments: CLT marginals, moduli decay, bootstrap validity
//! and covariance matrices.

use super::config::{ExperimentConfig, ModuliSection};
use super::domain;
use super::parallel_map;
use super::record::ResultRecord;
use super::stats::{ks_one_sample, ks_two_sample, median, quantile_sorted, sample_covariance, sample_variance};
use crate::bootstrap::{block_starts, BlockBootstrapConfig, BlockSums};
use crate::bvcalc::BVFunction;
use crate::empirical::{make_gn, modulus_atom, modulus_psi};
use crate::error::{invalid, Result};
use crate::generators::{stationary_cdf, GeneratorSpec};
use crate::limits::{covariance_matrix, limit_covariance_analytic, marginal_variance, min_eigenvalue, CovarianceQuery};
use crate::refdist::ReferenceDistribution;
use crate::rng::stream;
use crate::special::std_normal_cdf;

struct Setup {
    spec: GeneratorSpec,
    law: ReferenceDistribution,
    family: Vec<(String, BVFunction)>,
    means: Vec<f64>,
    replications: usize,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    cfg.validate()?;
    let spec = cfg.data_spec()?;
    let law = stationary_cdf(&spec)?;
    let family = cfg.family.build(cfg.seed)?;
    let means = family.iter().map(|(_, g)| g.expectation(&law)).collect();
    Ok(Setup { spec, law, family, means, replications: cfg.monte_carlo_replications()? })
}

fn sigma(cfg: &ExperimentConfig, spec: &GeneratorSpec, f: &BVFunction, g: &BVFunction) -> Result<f64> {
    let q = CovarianceQuery::new(f.clone(), g.clone(), spec.clone()).with_truncation(cfg.truncation_lag, cfg.tolerance);
    limit_covariance_analytic(&q)
}

impl Setup {
    /// `Z̄_n(g) = √n ((1/n) Σ g(X_i) - E g)` for every family member.
    fn zbars(&self, xs: &[f64]) -> Vec<f64> {
        let rn = (xs.len() as f64).sqrt();
        self.family
            .iter()
            .zip(&self.means)
            .map(|((_, g), &m)| {
                let avg = xs.iter().map(|&x| g.eval(x)).sum::<f64>() / xs.len() as f64;
                rn * (avg - m)
            })
            .collect()
    }

    /// One row of `zbars` per replication of domain `tag`.
    fn draw(&self, seed: u64, tag: u64, count: usize) -> Result<Vec<Vec<f64>>> {
        parallel_map(count, |r| {
            let mut rng = stream(seed, tag, r as u64);
            Ok(self.zbars(&self.spec.generate_with(&mut rng)?))
        })
    }
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

pub fn run_clt(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let s = setup(cfg)?;
    let t = &cfg.thresholds;
    let mut record = ResultRecord::new(cfg);
    let rows = s.draw(cfg.seed, domain::DATA, s.replications)?;
    for (j, (label, g)) in s.family.iter().enumerate() {
        let z = column(&rows, j);
        for (r, &v) in z.iter().enumerate() {
            record.push_row(r, format!("zbar:{label}"), v);
        }
        let target = sigma(cfg, &s.spec, g, g)?;
        let var = sample_variance(&z);
        let rel = (var / target - 1.0).abs();
        record.note(format!("variance:{label}"), var);
        record.note(format!("sigma2:{label}"), target);
        record.judge(
            &format!("variance:{label}"),
            rel <= t.variance_rel,
            rel,
            t.variance_rel,
            format!("sample variance {var} vs analytic {target}"),
        );
        if target > 0.0 {
            let sd = target.sqrt();
            let standardized: Vec<f64> = z.iter().map(|v| v / sd).collect();
            let ks = ks_one_sample(&standardized, std_normal_cdf);
            record.note(format!("ks_normal:{label}"), ks);
            record.judge(
                &format!("ks_normal:{label}"),
                ks <= t.ks_normal,
                ks,
                t.ks_normal,
                "Z̄_n/σ against Φ",
            );
        }
    }
    if let Some(m) = &cfg.moduli {
        moduli_decay(cfg, m, &s, &mut record)?;
    }
    Ok(record)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn largest_ratio(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

fn moduli_decay(cfg: &ExperimentConfig, m: &ModuliSection, s: &Setup, record: &mut ResultRecord) -> Result<()> {
    let mut deltas = m.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.dedup();
    let psi_spec = s.spec.with_n(m.n);
    let psi = parallel_map(m.paths, |p| {
        let mut rng = stream(cfg.seed, domain::MODULI, p as u64);
        let path = make_gn(&psi_spec.generate_with(&mut rng)?, &s.law)?;
        deltas.iter().map(|&d| modulus_psi(&path, &s.law, 2.0 * d.sqrt())).collect::<Result<Vec<f64>>>()
    })?;
    let mut medians = Vec::new();
    for (k, &d) in deltas.iter().enumerate() {
        let col = column(&psi, k);
        for (p, &v) in col.iter().enumerate() {
            record.push_row(p, format!("psi:{d}"), v);
        }
        let med = median(&col);
        record.note(format!("psi_median:{d}"), med);
        medians.push(med);
    }
    record.judge(
        "psi_decay",
        strictly_decreasing(&medians),
        largest_ratio(&medians),
        1.0,
        format!("median Ψ_(2√δ) over δ = {deltas:?}: {medians:?}"),
    );

    if let Some(atomic) = &m.atomic_generator {
        let spec = atomic.with_n(m.n);
        let law = stationary_cdf(&spec)?;
        let atom = parallel_map(m.paths, |p| {
            let mut rng = stream(cfg.seed, domain::ATOMIC, p as u64);
            let path = make_gn(&spec.generate_with(&mut rng)?, &law)?;
            Ok(deltas.iter().map(|&d| modulus_atom(&path, &law, d.sqrt()) * d.sqrt()).collect::<Vec<f64>>())
        })?;
        let mut medians = Vec::new();
        for (k, &d) in deltas.iter().enumerate() {
            let col = column(&atom, k);
            for (p, &v) in col.iter().enumerate() {
                record.push_row(p, format!("atom_scaled:{d}"), v);
            }
            let med = median(&col);
            record.note(format!("atom_scaled_median:{d}"), med);
            medians.push(med);
        }
        record.judge(
            "atom_decay",
            strictly_decreasing(&medians),
            largest_ratio(&medians),
            1.0,
            format!("median 𝕘_(√δ)·√δ over δ = {deltas:?}: {medians:?}"),
        );
    }
    Ok(())
}

/// Statistics of one data replication for one family member.
struct BootOutcome {
    zbar: f64,
    variance: f64,
    covered: bool,
    draws: Vec<f64>,
    unit_variance: Option<f64>,
}

pub fn run_boot(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let s = setup(cfg)?;
    let t = &cfg.thresholds;
    let bs = &cfg.bootstrap;
    let n = s.spec.n;
    let (b, m) = BlockBootstrapConfig { block_length: bs.b, resample_size: bs.m, seed: 0 }.resolve(n)?;
    let big_b = bs.replications;
    let alpha = 1.0 - t.coverage_level;
    let mut record = ResultRecord::new(cfg);
    record.note("block_length", b as f64);
    record.note("resample_size", m as f64);

    let outcomes = parallel_map(s.replications, |d| {
        let mut data_rng = stream(cfg.seed, domain::DATA, d as u64);
        let xs = s.spec.generate_with(&mut data_rng)?;
        let zbar = s.zbars(&xs);
        let sums: Vec<BlockSums> =
            s.family.iter().map(|(_, g)| BlockSums::new(&xs.iter().map(|&x| g.eval(x)).collect::<Vec<_>>())).collect();
        let mut draws = vec![Vec::with_capacity(big_b); s.family.len()];
        let mut rng = stream(cfg.seed, domain::BOOT, d as u64);
        for _ in 0..big_b {
            let starts = block_starts(&mut rng, n, b, m / b);
            for (j, bsum) in sums.iter().enumerate() {
                draws[j].push(bsum.zbar_star(&starts, b));
            }
        }
        let mut unit = vec![None; s.family.len()];
        if bs.negative_control {
            let mut rng = stream(cfg.seed, domain::BOOT_UNIT, d as u64);
            let mut unit_draws = vec![Vec::with_capacity(big_b); s.family.len()];
            for _ in 0..big_b {
                let starts = block_starts(&mut rng, n, 1, n);
                for (j, bsum) in sums.iter().enumerate() {
                    unit_draws[j].push(bsum.zbar_star(&starts, 1));
                }
            }
            unit = unit_draws.iter().map(|v| Some(sample_variance(v))).collect();
        }
        Ok(draws
            .into_iter()
            .zip(zbar)
            .zip(unit)
            .map(|((draws, zbar), unit_variance)| {
                let mut sorted = draws.clone();
                sorted.sort_by(f64::total_cmp);
                let lo = quantile_sorted(&sorted, alpha / 2.0);
                let hi = quantile_sorted(&sorted, 1.0 - alpha / 2.0);
                BootOutcome { zbar, variance: sample_variance(&draws), covered: lo <= zbar && zbar <= hi, draws, unit_variance }
            })
            .collect::<Vec<_>>())
    })?;
    let mc = s.draw(cfg.seed, domain::MC, bs.mc_draws)?;

    for (j, (label, g)) in s.family.iter().enumerate() {
        let target = sigma(cfg, &s.spec, g, g)?;
        let per: Vec<&BootOutcome> = outcomes.iter().map(|o| &o[j]).collect();
        for (d, o) in per.iter().enumerate() {
            record.push_row(d, format!("zbar:{label}"), o.zbar);
            record.push_row(d, format!("boot_var:{label}"), o.variance);
            record.push_row(d, format!("covered:{label}"), o.covered as u8 as f64);
            if let Some(u) = o.unit_variance {
                record.push_row(d, format!("boot_var_b1:{label}"), u);
            }
        }
        let variances: Vec<f64> = per.iter().map(|o| o.variance).collect();
        let med = median(&variances);
        let rel = (med / target - 1.0).abs();
        record.note(format!("sigma2:{label}"), target);
        record.note(format!("boot_var_median:{label}"), med);
        record.judge(
            &format!("boot_variance:{label}"),
            rel <= t.boot_variance_rel,
            rel,
            t.boot_variance_rel,
            format!("median bootstrap variance {med} vs analytic {target} (b = {b}, m = {m})"),
        );

        let pooled: Vec<f64> = per.iter().flat_map(|o| o.draws.iter().copied()).collect();
        let independent = column(&mc, j);
        for (r, &v) in independent.iter().enumerate() {
            record.push_row(r, format!("mc_zbar:{label}"), v);
        }
        let ks = ks_two_sample(&pooled, &independent);
        record.note(format!("boot_ks:{label}"), ks);
        record.judge(
            &format!("boot_ks:{label}"),
            ks <= t.boot_ks,
            ks,
            t.boot_ks,
            format!("{} pooled bootstrap draws vs {} independent Z̄_n draws", pooled.len(), independent.len()),
        );

        let coverage = per.iter().filter(|o| o.covered).count() as f64 / per.len() as f64;
        record.note(format!("coverage:{label}"), coverage);
        record.note(format!("coverage_nominal:{label}"), t.coverage_level);

        if bs.negative_control {
            let unit: Vec<f64> = per.iter().filter_map(|o| o.unit_variance).collect();
            let unit_med = median(&unit);
            let iid = marginal_variance(g, &s.spec)?;
            record.note(format!("boot_var_b1_median:{label}"), unit_med);
            record.note(format!("iid_variance:{label}"), iid);
            let closer = (unit_med - iid).abs() < (unit_med - target).abs();
            record.judge(
                &format!("negative_control:{label}"),
                closer,
                unit_med,
                0.5 * (iid + target),
                format!("b = 1 median variance {unit_med}; iid value {iid}, dependent value {target}"),
            );
        }
    }
    Ok(record)
}

pub fn run_cov(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let s = setup(cfg)?;
    let t = &cfg.thresholds;
    let k = s.family.len();
    if s.replications < 2 {
        return invalid("covariance experiments need at least two replications");
    }
    let members: Vec<BVFunction> = s.family.iter().map(|(_, g)| g.clone()).collect();
    let analytic = covariance_matrix(&members, &s.spec, cfg.truncation_lag, cfg.tolerance)?;
    let rows = s.draw(cfg.seed, domain::DATA, s.replications)?;
    let mut record = ResultRecord::new(cfg);
    let cols: Vec<Vec<f64>> = (0..k).map(|j| column(&rows, j)).collect();
    for (j, (label, _)) in s.family.iter().enumerate() {
        for (r, &v) in cols[j].iter().enumerate() {
            record.push_row(r, format!("zbar:{label}"), v);
        }
    }
    let r = s.replications as f64;
    let mut worst_se: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for i in 0..k {
        for j in i..k {
            let (a, b) = (&cols[i], &cols[j]);
            let emp = sample_covariance(a, b);
            let (ma, mb) = (a.iter().sum::<f64>() / r, b.iter().sum::<f64>() / r);
            let products: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
            let se = (sample_variance(&products) / r).sqrt();
            let target = analytic[(i, j)];
            let gap = (emp - target).abs();
            let in_se = if se > 0.0 { gap / se } else if gap == 0.0 { 0.0 } else { f64::INFINITY };
            worst_se = worst_se.max(in_se);
            if target != 0.0 {
                worst_rel = worst_rel.max(gap / target.abs());
            }
            let (li, lj) = (&s.family[i].0, &s.family[j].0);
            record.note(format!("empirical:{li}:{lj}"), emp);
            record.note(format!("analytic:{li}:{lj}"), target);
            record.note(format!("se:{li}:{lj}"), se);
        }
    }
    let min_eig = min_eigenvalue(&analytic);
    record.note("max_relative_error", worst_rel);
    record.note("max_se_multiple", worst_se);
    record.note("analytic_min_eigenvalue", min_eig);
    record.judge(
        "cov_entries",
        worst_se <= t.cov_se_multiple,
        worst_se,
        t.cov_se_multiple,
        format!("largest |Ŝ - Σ| in standard errors over {k}×{k} entries"),
    );
    record.judge("psd", min_eig >= t.psd_floor, min_eig, t.psd_floor, "smallest eigenvalue of the analytic matrix");
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentKind, FunctionFamily};
    use crate::harness::{replay, run_with_threads};

    fn base(kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(kind);
        cfg.generator = Some(GeneratorSpec::ar1(0.5, 400, 0));
        cfg.replications = Some(60);
        cfg.seed = 17;
        cfg
    }

    #[test]
    fn clt_small_run_is_sane_and_replays() {
        let mut cfg = base(ExperimentKind::Clt);
        cfg.moduli = Some(ModuliSection { n: 300, paths: 20, deltas: vec![0.2, 0.05], atomic_generator: None });
        let r = run_clt(&cfg).unwrap();
        assert!(r.summary["variance:le(0)"] > 0.2);
        assert!(r.criterion("psi_decay").is_some());
        assert!(replay(&r).unwrap());
        let threaded = run_with_threads(&cfg, 3).unwrap();
        assert_eq!(threaded.digest(), r.digest());
    }

    #[test]
    fn full_block_bootstrap_has_no_spread() {
        let mut cfg = base(ExperimentKind::Boot);
        cfg.n = Some(50);
        cfg.replications = Some(4);
        cfg.bootstrap.b = Some(50);
        cfg.bootstrap.replications = 10;
        cfg.bootstrap.mc_draws = 10;
        let r = run_boot(&cfg).unwrap();
        assert_eq!(r.summary["boot_var_median:le(0)"], 0.0);
    }

    #[test]
    fn cov_matches_iid_formula() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Cov);
        cfg.generator = Some(GeneratorSpec::iid(ReferenceDistribution::uniform(0.0, 1.0).unwrap(), 200, 0));
        cfg.family = FunctionFamily::Explicit {
            functions: vec!["left 1\n0.3 0 -1".into(), "left 0\n0.6 0 1\n0.9 0 -1".into()],
        };
        cfg.replications = Some(400);
        let r = run_cov(&cfg).unwrap();
        let off = r.summary["analytic:f0:f1"];
        assert!((off + 0.3 * 0.3).abs() < 1e-14, "{off}");
        assert!(r.passed(), "{:#?}", r.criteria);
    }

    #[test]
    fn single_member_cov_agrees_with_clt() {
        let cfg = base(ExperimentKind::Cov);
        let cov = run_cov(&cfg).unwrap();
        let mut clt_cfg = cfg.clone();
        clt_cfg.experiment = ExperimentKind::Clt;
        let clt = run_clt(&clt_cfg).unwrap();
        assert_eq!(cov.summary["empirical:le(0):le(0)"], clt.summary["variance:le(0)"]);
    }
}
