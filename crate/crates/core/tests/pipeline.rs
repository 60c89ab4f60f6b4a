//! End-to-end use of the public API: generate, integrate, resample, compare.

use bvproc::bootstrap::{mbb_resample, zbar_star, zbar_star_ibp, BlockBootstrapConfig};
use bvproc::empirical::{make_gn, zbar_direct, zbar_ibp};
use bvproc::limits::{limit_covariance_analytic, limit_covariance_estimate, CovarianceQuery};
use bvproc::stieltjes::integration_by_parts_check;
use bvproc::{BVFunction, GeneratorSpec, Knot};
use proptest::prelude::*;

fn test_function() -> BVFunction {
    BVFunction::new(0.2, [Knot::new(-1.0, 0.3, 0.1), Knot::new(0.0, -0.5, -0.4), Knot::step(1.5, 0.25)]).unwrap()
}

#[test]
fn ar1_routes_agree_on_generated_data() {
    let spec = GeneratorSpec::ar1(0.5, 500, 8);
    let xs = spec.generate().unwrap();
    let law = bvproc::generators::stationary_cdf(&spec).unwrap();
    let g = test_function();
    let direct = zbar_direct(&g, &xs, &law).unwrap();
    let ibp = zbar_ibp(&g, &make_gn(&xs, &law).unwrap()).unwrap();
    assert!((direct - ibp).abs() <= 1e-10 * (1.0 + direct.abs()), "{direct} vs {ibp}");
}

#[test]
fn bootstrap_routes_agree_on_resamples() {
    let xs = GeneratorSpec::ar1(0.3, 400, 2).generate().unwrap();
    let g = test_function();
    for seed in 0..5 {
        let star = mbb_resample(&xs, &BlockBootstrapConfig::new(8, seed)).unwrap();
        assert_eq!(star.len(), 400);
        let a = zbar_star(&g, &xs, &star).unwrap();
        let b = zbar_star_ibp(&g, &xs, &star).unwrap();
        assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn estimator_tracks_analytic_covariance() {
    let spec = GeneratorSpec::ar1(0.5, 200_000, 21);
    let xs = spec.generate().unwrap();
    let g = BVFunction::indicator_le(0.0).unwrap();
    let analytic = limit_covariance_analytic(&CovarianceQuery::new(g.clone(), g.clone(), spec)).unwrap();
    let est = limit_covariance_estimate(&g, &g, &xs, 40).unwrap();
    assert!(!est.degenerate);
    assert!((est.value / analytic - 1.0).abs() < 0.05, "{} vs {analytic}", est.value);
}

proptest! {
    #[test]
    fn ibp_residual_small_with_shared_jumps(shift in -2.0f64..-0.01, a in -1.0f64..1.0) {
        let f = test_function();
        let g = BVFunction::new(a, [Knot::new(shift, 0.2, 0.5), Knot::new(0.0, 0.0, -0.3), Knot::step(1.5, a)]).unwrap();
        prop_assert!(integration_by_parts_check(&f, &g).abs() <= 1e-10);
    }
}
