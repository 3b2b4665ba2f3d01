//! Regions of the `(τ, ξ)` plane lying between graphs of a parabola.

use crate::error::{Error, Result};

/// The dispersion graph `φ(ξ) = curvature · ξ² + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub curvature: f64,
    pub offset: f64,
}

impl Phase {
    pub const fn new(curvature: f64, offset: f64) -> Self {
        Self { curvature, offset }
    }

    /// `τ = ξ²`
    pub const fn schrodinger() -> Self {
        Self::new(1.0, 0.0)
    }

    #[inline]
    pub fn at(&self, xi: f64) -> f64 {
        self.curvature * xi * xi + self.offset
    }
}

/// `{(τ, ξ) : ξ ∈ [xi_lo, xi_hi], τ − φ(ξ) ∈ ⋃ bands}`.
///
/// In the sheared coordinates `(ξ, η = τ − φ(ξ))` this is a finite union of
/// rectangles, which is how every quadrature below treats it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSet {
    xi_lo: f64,
    xi_hi: f64,
    phase: Phase,
    bands: Vec<(f64, f64)>,
}

impl SpaceTimeSet {
    pub fn new(xi_lo: f64, xi_hi: f64, phase: Phase, bands: Vec<(f64, f64)>) -> Result<Self> {
        if !(xi_hi > xi_lo) {
            return Err(Error::Parameter(format!("empty frequency interval [{xi_lo}, {xi_hi}]")));
        }
        if bands.is_empty() || bands.iter().any(|&(a, b)| !(b > a)) {
            return Err(Error::Parameter(format!("invalid modulation bands {bands:?}")));
        }
        Ok(Self {
            xi_lo,
            xi_hi,
            phase,
            bands,
        })
    }

    /// `|ξ − center| <= xi_half`, `|τ − φ(ξ)| <= eta_half`.
    pub fn centered(center: f64, xi_half: f64, phase: Phase, eta_half: f64) -> Result<Self> {
        Self::new(center - xi_half, center + xi_half, phase, vec![(-eta_half, eta_half)])
    }

    /// Modulation shell `lo <= |τ − φ(ξ)| < hi` over `[xi_lo, xi_hi]`.
    pub fn shell(xi_lo: f64, xi_hi: f64, phase: Phase, lo: f64, hi: f64) -> Result<Self> {
        Self::new(xi_lo, xi_hi, phase, vec![(-hi, -lo), (lo, hi)])
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.xi_lo, self.xi_hi)
    }

    pub fn xi_width(&self) -> f64 {
        self.xi_hi - self.xi_lo
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    /// Narrowest modulation band.
    pub fn min_band_width(&self) -> f64 {
        self.bands.iter().map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    /// Lebesgue measure (the shear preserves area).
    pub fn measure(&self) -> f64 {
        self.xi_width() * self.bands.iter().map(|(a, b)| b - a).sum::<f64>()
    }

    pub fn contains(&self, tau: f64, xi: f64) -> bool {
        if xi < self.xi_lo || xi > self.xi_hi {
            return false;
        }
        let eta = tau - self.phase.at(xi);
        self.bands.iter().any(|&(a, b)| eta >= a && eta <= b)
    }

    /// Smallest axis-aligned box `(tau_lo, tau_hi, xi_lo, xi_hi)` holding the set.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let (plo, phi) = quadratic_range(self.phase, self.xi_lo, self.xi_hi);
        let lo = self.bands.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
        let hi = self.bands.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
        (plo + lo, phi + hi, self.xi_lo, self.xi_hi)
    }
}

/// Range of `φ` over `[a, b]`.
pub fn quadratic_range(phase: Phase, a: f64, b: f64) -> (f64, f64) {
    let mut lo = phase.at(a).min(phase.at(b));
    let mut hi = phase.at(a).max(phase.at(b));
    if a < 0.0 && b > 0.0 {
        lo = lo.min(phase.offset);
        hi = hi.max(phase.offset);
    }
    (lo, hi)
}
