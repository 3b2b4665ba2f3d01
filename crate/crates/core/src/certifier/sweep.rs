//! Scaling sweeps of the bilinear ratio over dyadic `N`.

use rayon::prelude::*;

use super::sets::Phase;
use super::sheared::{conv_lower_bound, product_norm, set_xsb_norm, Quadrature};
use super::{build_counterexample, CounterexampleRegime};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerFit};

/// Lattice size per direction used for `conv_min`.
pub const TARGET_NODES: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRecord {
    pub regime: &'static str,
    pub alpha: f64,
    pub s: f64,
    pub b: f64,
    pub n: f64,
    pub xsb_u: f64,
    pub xsb_v: f64,
    pub conv_min: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSweep {
    pub records: Vec<RatioRecord>,
    pub fit: PowerFit,
}

impl RatioSweep {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

/// One record per `N`, evaluated in parallel; the slope is the least-squares
/// fit of `log R` against `log N`.
pub fn ratio_sweep(regime: CounterexampleRegime, s: f64, b: f64, ns: &[f64], q: Quadrature) -> Result<RatioSweep> {
    if ns.len() < 4 {
        return Err(Error::Parameter(format!("ratio sweep needs at least 4 values of N, got {}", ns.len())));
    }
    if let Some(bad) = ns.iter().find(|n| !(**n >= 1.0) || n.log2().fract() != 0.0) {
        return Err(Error::Parameter(format!("ratio sweep needs dyadic N, got {bad}")));
    }
    let records = ns
        .par_iter()
        .map(|&n| ratio_record(regime, s, b, n, q))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = records.iter().map(|r| r.n).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let fit = fit_power_law(&xs, &ys)?;
    Ok(RatioSweep { records, fit })
}

pub fn ratio_record(regime: CounterexampleRegime, s: f64, b: f64, n: f64, q: Quadrature) -> Result<RatioRecord> {
    let family = build_counterexample(regime, n)?;
    let xsb_u = set_xsb_norm(&family.a1, s, b, q);
    let xsb_v = set_xsb_norm(&family.a2, s, b, q);
    let numerator = product_norm(&family.a1, &family.a2, s, b - 1.0, Phase::schrodinger(), q);
    let conv_min = conv_lower_bound(&family.a1, &family.a2, &family.target(), TARGET_NODES, q);
    Ok(RatioRecord {
        regime: regime.label(),
        alpha: regime.alpha(),
        s,
        b,
        n,
        xsb_u,
        xsb_v,
        conv_min,
        ratio: numerator / (xsb_u * xsb_v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NS: [f64; 5] = [64.0, 128.0, 256.0, 512.0, 1024.0];

    #[test]
    fn input_checks() {
        let r = CounterexampleRegime::AlphaHalf { beta: 0.0 };
        let q = Quadrature::new(4);
        assert!(ratio_sweep(r, 0.0, 0.5, &NS[..3], q).is_err());
        assert!(ratio_sweep(r, 0.0, 0.5, &[64.0, 100.0, 256.0, 512.0], q).is_err());
    }

    #[test]
    fn alpha_half_slope_tracks_minus_s() {
        let q = Quadrature::new(8);
        let r = CounterexampleRegime::AlphaHalf { beta: 0.0 };
        let neg = ratio_sweep(r, -0.25, 0.5, &NS, q).unwrap();
        assert!(neg.slope() >= 0.15, "{}", neg.slope());
        let zero = ratio_sweep(r, 0.0, 0.5, &NS, q).unwrap();
        assert!(zero.slope().abs() <= 0.1, "{}", zero.slope());
        let c0 = neg.records[0].conv_min;
        assert!(c0 > 0.0);
        for rec in &neg.records {
            assert!((rec.conv_min / c0 - 1.0).abs() < 0.2);
        }
    }

    #[test]
    fn alpha_mid_conv_scales_like_inverse_n() {
        let q = Quadrature::new(8);
        let sweep = ratio_sweep(CounterexampleRegime::AlphaMid { alpha: 0.625 }, -0.75, 0.5, &NS, q).unwrap();
        assert!(sweep.slope() >= 0.15, "{}", sweep.slope());
        let scaled: Vec<f64> = sweep.records.iter().map(|r| r.conv_min * r.n).collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(lo > 0.0 && hi / lo < 3.0, "{scaled:?}");
    }

    #[test]
    fn alpha_small_slope() {
        let q = Quadrature::new(8);
        let (s, b) = (-0.5, 0.5);
        let sweep = ratio_sweep(CounterexampleRegime::AlphaSmall { alpha: 0.25, c: 4.0 }, s, b, &NS, q).unwrap();
        let expected = 2.0 * (b - s) - 2.5;
        assert!((sweep.slope() - expected).abs() < 0.1, "{} vs {expected}", sweep.slope());
        assert!(sweep.records.iter().all(|r| r.conv_min > 0.0));
    }

    #[test]
    fn slopes_stable_under_refinement() {
        let r = CounterexampleRegime::AlphaHalf { beta: 0.0 };
        let coarse = ratio_sweep(r, -0.25, 0.5, &NS, Quadrature::new(8)).unwrap();
        let fine = ratio_sweep(r, -0.25, 0.5, &NS, Quadrature::new(16)).unwrap();
        assert!((coarse.slope() - fine.slope()).abs() <= 0.02);
    }
}
