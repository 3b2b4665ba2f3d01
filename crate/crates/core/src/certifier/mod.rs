//! Space-time counterexample families for the bilinear estimates and the
//! scaling of the ratio
//!
//! ```text
//! R(N) = ‖⟨ξ⟩^s ⟨τ − ξ²⟩^{b−1} (χ_{A₁} ∗ χ_{A₂})‖ / (‖χ_{A₁}‖_{X^{s,b}} ‖χ_{A₂}‖_{X_α^{s,b}})
//! ```
//!
//! Sets are stored in sheared coordinates (see [`sets::SpaceTimeSet`]); the
//! axis-aligned lattice in [`grid`] is the small-`N` reference.

pub mod grid;
pub mod sets;
pub mod sheared;
pub mod sweep;

pub use grid::SpaceTimeField;
pub use sets::{Phase, SpaceTimeSet};
pub use sheared::{conv_lower_bound, convolution_at, product_norm, set_xsb_norm, Quadrature};
pub use sweep::{ratio_sweep, RatioRecord, RatioSweep};

use crate::error::{Error, Result};

/// Default size of the output window constant in the small-α family.
pub const DEFAULT_SMALL_C: f64 = 4.0;

/// Which family to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CounterexampleRegime {
    /// `α = ½`, frequency half-widths `N^{−β}`.
    AlphaHalf { beta: f64 },
    /// `½ < α < 1`.
    AlphaMid { alpha: f64 },
    /// `0 < α < ½` with output window `[0, c]`.
    AlphaSmall { alpha: f64, c: f64 },
    /// `0 < α < ½`, the layered family at level `m`.
    AlphaSmallEndpoint { alpha: f64, m: u32 },
}

impl CounterexampleRegime {
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::AlphaHalf { .. } => 0.5,
            Self::AlphaMid { alpha } | Self::AlphaSmall { alpha, .. } | Self::AlphaSmallEndpoint { alpha, .. } => alpha,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::AlphaHalf { .. } => "alpha-half",
            Self::AlphaMid { .. } => "alpha-mid",
            Self::AlphaSmall { .. } => "alpha-small",
            Self::AlphaSmallEndpoint { .. } => "alpha-small-endpoint",
        }
    }

    fn validate(&self, n: f64) -> Result<()> {
        if !(n >= 16.0) || !n.is_finite() {
            return Err(Error::Parameter(format!("counterexample needs N >= 16, got {n}")));
        }
        match *self {
            Self::AlphaHalf { beta } if !(0.0..1.0).contains(&beta) => {
                Err(Error::Parameter(format!("beta must lie in [0, 1), got {beta}")))
            }
            Self::AlphaMid { alpha } if !(alpha > 0.5 && alpha < 1.0) => {
                Err(Error::Regime(format!("alpha-mid family needs 1/2 < alpha < 1, got {alpha}")))
            }
            Self::AlphaSmall { alpha, c } if !(alpha > 0.0 && alpha < 0.5) || !(c > 0.0) => Err(Error::Regime(format!(
                "alpha-small family needs 0 < alpha < 1/2 and C > 0, got alpha = {alpha}, C = {c}"
            ))),
            Self::AlphaSmallEndpoint { alpha, m } => {
                if !(alpha > 0.0 && alpha < 0.5) {
                    return Err(Error::Regime(format!("endpoint family needs 0 < alpha < 1/2, got {alpha}")));
                }
                if m == 0 || 4f64.powi(m as i32 + 1) > n {
                    return Err(Error::Parameter(format!("endpoint family needs m >= 1 and 4^(m+1) <= N, got m = {m}, N = {n}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `A₁`, `A₂` carry the two inputs, `A₃` the region where the convolution is
/// bounded below. The endpoint family also keeps the lower layers
/// `A_{1,j}`, `A_{2,j}` for `j < m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleFamily {
    pub regime: CounterexampleRegime,
    pub n: f64,
    pub a1: SpaceTimeSet,
    pub a2: SpaceTimeSet,
    pub a3: SpaceTimeSet,
    pub a1_layers: Vec<SpaceTimeSet>,
    pub a2_layers: Vec<SpaceTimeSet>,
}

impl CounterexampleFamily {
    /// Sub-region of `A₃` on which the convolution lower bound is taken.
    ///
    /// Outside `α = ½` the convolution degenerates on part of the boundary
    /// of `A₃` (the corners for the mid-α family, the frequency edge nearest
    /// zero or the open edge otherwise), so the bound is certified on the
    /// concentric half-size set.
    pub fn target(&self) -> SpaceTimeSet {
        match self.regime {
            CounterexampleRegime::AlphaHalf { .. } => self.a3.clone(),
            _ => shrink(&self.a3, 0.5),
        }
    }
}

/// Concentric copy with frequency width and every band scaled by `factor`.
pub fn shrink(set: &SpaceTimeSet, factor: f64) -> SpaceTimeSet {
    let (lo, hi) = set.xi_range();
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo) * factor);
    let bands = set
        .bands()
        .iter()
        .map(|&(a, b)| {
            let (m, w) = (0.5 * (a + b), 0.5 * (b - a) * factor);
            (m - w, m + w)
        })
        .collect();
    SpaceTimeSet::new(c - h, c + h, set.phase(), bands).expect("positive factor keeps the set non-empty")
}

pub fn build_counterexample(regime: CounterexampleRegime, n: f64) -> Result<CounterexampleFamily> {
    regime.validate(n)?;
    let neg = Phase::new(-1.0, 0.0);
    let family = |a1, a2, a3| CounterexampleFamily {
        regime,
        n,
        a1,
        a2,
        a3,
        a1_layers: Vec::new(),
        a2_layers: Vec::new(),
    };
    match regime {
        CounterexampleRegime::AlphaHalf { beta } => {
            let w = n.powf(-beta);
            Ok(family(
                SpaceTimeSet::centered(-n, w, neg, 1.0)?,
                SpaceTimeSet::centered(2.0 * n, w, Phase::new(0.5, 0.0), 1.0)?,
                SpaceTimeSet::centered(n, w, Phase::schrodinger(), 1.0)?,
            ))
        }
        CounterexampleRegime::AlphaMid { alpha } => {
            let c2 = 2.0 * n / (1.0 + (2.0 * alpha - 1.0).sqrt());
            let w = 1.0 / n;
            Ok(family(
                SpaceTimeSet::centered(-n, w, neg, 1.0)?,
                SpaceTimeSet::centered(c2, w, Phase::new(alpha, 0.0), 1.0)?,
                SpaceTimeSet::centered(c2 - n, w, Phase::schrodinger(), 1.0)?,
            ))
        }
        CounterexampleRegime::AlphaSmall { alpha, c } => {
            let w = 1.0 / n;
            let band2 = 1.0 + 1.5 * c;
            Ok(family(
                SpaceTimeSet::new(-n - w, -n, neg, vec![(-1.0, 1.0)])?,
                SpaceTimeSet::new(n, n + w, Phase::new(alpha, 0.0), vec![(-band2, band2)])?,
                SpaceTimeSet::new(-w, -0.5 * w, Phase::new(1.0, -(1.0 - alpha) * n * n), vec![(0.0, c)])?,
            ))
        }
        CounterexampleRegime::AlphaSmallEndpoint { alpha, m } => {
            let p = |e: i32| 4f64.powi(e);
            let m = m as i32;
            let w = p(m - 10) / n;
            let a2_phase = Phase::new(alpha, 0.0);
            let layer1 = |lo, hi| SpaceTimeSet::shell(-n - w, -n, neg, lo, hi);
            let layer2 = |lo, hi| SpaceTimeSet::shell(n, n + w, a2_phase, lo, hi);
            let mut out = family(
                layer1(p(m - 2), p(m + 2))?,
                layer2(p(m - 3), p(m - 2))?,
                SpaceTimeSet::new(
                    0.5 * w,
                    w,
                    Phase::new(1.0, -(1.0 - alpha) * n * n),
                    vec![(p(m - 1), p(m + 1))],
                )?,
            );
            for j in 0..m {
                out.a1_layers.push(layer1(p(j - 2), p(j - 1))?);
                out.a2_layers.push(layer2(p(j - 3), p(j - 2))?);
            }
            Ok(out)
        }
    }
}

/// `a_m Σ_{j≤m} a_j / Σ_{j≤m} a_j²` for `a_j = 1/(1+j)` (`j < m`) and
/// `a_m = 1`. Unbounded in `m`, which the endpoint estimate forbids.
pub fn endpoint_check(m: u64) -> f64 {
    let (mut lin, mut sq) = (1.0, 1.0);
    for j in 0..m {
        let a = 1.0 / (1.0 + j as f64);
        lin += a;
        sq += a * a;
    }
    lin / sq
}

/// Smallest `m <= m_max` with `endpoint_check(m) > threshold`, found in one
/// pass over the partial sums.
pub fn endpoint_first_exceeding(threshold: f64, m_max: u64) -> Option<u64> {
    let (mut lin, mut sq) = (1.0, 1.0);
    for m in 1..=m_max {
        let a = 1.0 / m as f64;
        lin += a;
        sq += a * a;
        if lin / sq > threshold {
            return Some(m);
        }
    }
    None
}
