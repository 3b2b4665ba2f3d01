use qnls::certifier::sheared::shifted_membership_excess;
use qnls::certifier::{build_counterexample, product_norm, ratio_sweep, CounterexampleRegime, Phase, Quadrature};
use qnls::Error;

const REGIMES: [CounterexampleRegime; 3] = [
    CounterexampleRegime::AlphaHalf { beta: 0.0 },
    CounterexampleRegime::AlphaMid { alpha: 0.625 },
    CounterexampleRegime::AlphaSmall { alpha: 0.25, c: 4.0 },
];

// target minus a1 lands in a fixed dilate of a2, uniformly in N
#[test]
fn membership_excess_is_bounded_uniformly_in_n() {
    for regime in REGIMES {
        let excess: Vec<(f64, f64)> = [16.0, 64.0, 256.0, 1024.0]
            .iter()
            .map(|&n| {
                let f = build_counterexample(regime, n).unwrap();
                shifted_membership_excess(&f.a1, &f.a2, &f.target(), 9)
            })
            .collect();
        let (x0, e0) = excess[0];
        assert!(x0.is_finite() && e0.is_finite() && x0 <= 4.0 && e0 <= 4.0, "{}: {excess:?}", regime.label());
        for &(x, e) in &excess[1..] {
            assert!((x - x0).abs() <= 0.01 * x0 && (e - e0).abs() <= 0.01 * e0, "{}: {excess:?}", regime.label());
        }
    }
}

#[test]
fn sweep_rejects_short_or_non_dyadic_lists() {
    let q = Quadrature::new(4);
    let half = CounterexampleRegime::AlphaHalf { beta: 0.0 };
    assert!(ratio_sweep(half, -0.25, 0.5, &[64.0, 128.0, 256.0], q).is_err());
    assert!(ratio_sweep(half, -0.25, 0.5, &[64.0, 100.0, 256.0, 512.0], q).is_err());
}

#[test]
fn families_reject_wrong_alpha_and_small_n() {
    assert!(matches!(
        build_counterexample(CounterexampleRegime::AlphaMid { alpha: 0.3 }, 64.0),
        Err(Error::Regime(_))
    ));
    assert!(matches!(
        build_counterexample(CounterexampleRegime::AlphaSmall { alpha: 0.6, c: 4.0 }, 64.0),
        Err(Error::Regime(_))
    ));
    assert!(build_counterexample(CounterexampleRegime::AlphaHalf { beta: 0.0 }, 8.0).is_err());
    assert!(build_counterexample(CounterexampleRegime::AlphaSmallEndpoint { alpha: 0.25, m: 2 }, 32.0).is_err());
}

#[test]
fn record_ratio_is_product_norm_over_data_norms() {
    let q = Quadrature::new(4);
    let sweep = ratio_sweep(REGIMES[1], -0.75, 0.5, &[16.0, 32.0, 64.0, 128.0], q).unwrap();
    for r in &sweep.records {
        assert!(r.conv_min > 0.0);
        let f = build_counterexample(REGIMES[1], r.n).unwrap();
        let num = product_norm(&f.a1, &f.a2, -0.75, -0.5, Phase::schrodinger(), q);
        assert!((r.ratio - num / (r.xsb_u * r.xsb_v)).abs() <= 1e-12 * r.ratio);
    }
}
