//! Quadrature in sheared coordinates `(ξ, η = τ − φ(ξ))`.
//!
//! For indicators of two sets the convolution at `(τ, ξ)` is
//!
//! ```text
//! ∫_{ξ₁ ∈ I₁ ∩ (ξ − I₂)} |{τ₁ : τ₁ − φ₁(ξ₁) ∈ B₁, τ − τ₁ − φ₂(ξ − ξ₁) ∈ B₂}| dξ₁
//! ```
//!
//! and the inner length is an explicit overlap of intervals, so only the
//! `ξ₁` integral needs quadrature. Widths of order `N⁻¹` and offsets of
//! order `N²` cost the same number of nodes.

use super::grid::bracket;
use super::sets::{Phase, SpaceTimeSet};

/// 8-point Gauss–Legendre nodes and weights on `[−1, 1]`.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite Gauss–Legendre rule with `panels` equal panels per interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    pub panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { panels: 16 }
    }
}

impl Quadrature {
    pub fn new(panels: usize) -> Self {
        Self { panels: panels.max(1) }
    }

    /// Twice as many panels.
    pub fn refined(self) -> Self {
        Self::new(self.panels * 2)
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let h = (b - a) / self.panels as f64;
        let mut acc = 0.0;
        for p in 0..self.panels {
            let mid = a + (p as f64 + 0.5) * h;
            let mut panel = 0.0;
            for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                panel += w * f(mid + 0.5 * h * x);
            }
            acc += panel * 0.5 * h;
        }
        acc
    }
}

/// `|[a₁, b₁] ∩ [c − b₂, c − a₂]|`.
#[inline]
fn overlap(c: f64, (a1, b1): (f64, f64), (a2, b2): (f64, f64)) -> f64 {
    (b1.min(c - a2) - a1.max(c - b2)).max(0.0)
}

/// `ξ₁` range `I₁ ∩ (ξ − I₂)` of the convolution at `ξ`.
fn inner_range(a1: &SpaceTimeSet, a2: &SpaceTimeSet, xi: f64) -> (f64, f64) {
    let (l1, h1) = a1.xi_range();
    let (l2, h2) = a2.xi_range();
    (l1.max(xi - h2), h1.min(xi - l2))
}

/// `(χ_{A₁} ∗ χ_{A₂})(τ, ξ)`.
pub fn convolution_at(a1: &SpaceTimeSet, a2: &SpaceTimeSet, tau: f64, xi: f64, q: Quadrature) -> f64 {
    let (lo, hi) = inner_range(a1, a2, xi);
    let (p1, p2) = (a1.phase(), a2.phase());
    q.integrate(lo, hi, |x1| {
        let c = tau - p1.at(x1) - p2.at(xi - x1);
        pair_overlap(a1, a2, c)
    })
}

fn pair_overlap(a1: &SpaceTimeSet, a2: &SpaceTimeSet, c: f64) -> f64 {
    let mut acc = 0.0;
    for &b1 in a1.bands() {
        for &b2 in a2.bands() {
            acc += overlap(c, b1, b2);
        }
    }
    acc
}

/// `‖⟨ξ⟩^s ⟨τ − φ(ξ)⟩^b χ_A‖_{L²}` with `φ` the set's own phase; the
/// integrand separates in sheared coordinates.
pub fn set_xsb_norm(set: &SpaceTimeSet, s: f64, b: f64, q: Quadrature) -> f64 {
    let (lo, hi) = set.xi_range();
    let xi_part = q.integrate(lo, hi, |xi| bracket(xi).powf(2.0 * s));
    let eta_part: f64 = set
        .bands()
        .iter()
        .map(|&(a, c)| q.integrate(a, c, |eta| bracket(eta).powf(2.0 * b)))
        .sum();
    (xi_part * eta_part).sqrt()
}

/// `‖⟨ξ⟩^s ⟨τ − φ_out(ξ)⟩^{e} (χ_{A₁} ∗ χ_{A₂})‖_{L²}` over the whole support
/// of the convolution.
pub fn product_norm(a1: &SpaceTimeSet, a2: &SpaceTimeSet, s: f64, e: f64, out: Phase, q: Quadrature) -> f64 {
    let (l1, h1) = a1.xi_range();
    let (l2, h2) = a2.xi_range();
    let (p1, p2) = (a1.phase(), a2.phase());
    let band_lo = a1.bands().iter().map(|b| b.0).fold(f64::INFINITY, f64::min)
        + a2.bands().iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let band_hi = a1.bands().iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max)
        + a2.bands().iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);

    let sq = q.integrate(l1 + l2, h1 + h2, |xi| {
        let (lo, hi) = inner_range(a1, a2, xi);
        if !(hi > lo) {
            return 0.0;
        }
        // D(ξ₁) = φ₁(ξ₁) + φ₂(ξ − ξ₁) − φ_out(ξ) is quadratic in ξ₁
        let base = out.at(xi);
        let shifted = Phase::new(
            p1.curvature + p2.curvature,
            p1.offset + p2.offset + p2.curvature * xi * xi - base,
        );
        let (dlo, dhi) = d_range(shifted, -2.0 * p2.curvature * xi, lo, hi);
        let weight_xi = bracket(xi).powf(2.0 * s);
        let inner = q.integrate(dlo + band_lo, dhi + band_hi, |eta| {
            let conv = q.integrate(lo, hi, |x1| {
                let d = p1.at(x1) + p2.at(xi - x1) - base;
                pair_overlap(a1, a2, eta - d)
            });
            bracket(eta).powf(2.0 * e) * conv * conv
        });
        weight_xi * inner
    });
    sq.sqrt()
}

/// Range over `[a, b]` of `k x² + m x + c` where `phase = (k, c)`.
fn d_range(phase: Phase, m: f64, a: f64, b: f64) -> (f64, f64) {
    let k = phase.curvature;
    let f = |x: f64| k * x * x + m * x + phase.offset;
    let (mut lo, mut hi) = (f(a).min(f(b)), f(a).max(f(b)));
    if k != 0.0 {
        let v = -m / (2.0 * k);
        if v > a && v < b {
            lo = lo.min(f(v));
            hi = hi.max(f(v));
        }
    }
    (lo, hi)
}

/// Minimum of `χ_{A₁} ∗ χ_{A₂}` over a `nodes × nodes` lattice (per band,
/// endpoints included) covering `A₃`.
pub fn conv_lower_bound(a1: &SpaceTimeSet, a2: &SpaceTimeSet, a3: &SpaceTimeSet, nodes: usize, q: Quadrature) -> f64 {
    let nodes = nodes.max(2);
    let (lo, hi) = a3.xi_range();
    let mut worst = f64::INFINITY;
    for i in 0..nodes {
        let xi = lo + (hi - lo) * i as f64 / (nodes - 1) as f64;
        let base = a3.phase().at(xi);
        for &(a, b) in a3.bands() {
            for j in 0..nodes {
                let eta = a + (b - a) * j as f64 / (nodes - 1) as f64;
                worst = worst.min(convolution_at(a1, a2, base + eta, xi, q));
            }
        }
    }
    worst
}

/// Largest excess of the shifted point `(τ − τ₁, ξ − ξ₁)` over the bounds
/// of `A₂`, for samples `(τ, ξ) ∈ A₃` and `(τ₁, ξ₁) ∈ A₁`, measured in
/// multiples of `A₂`'s half-widths (1 means on the boundary). `A₂` must have
/// a single band.
pub fn shifted_membership_excess(
    a1: &SpaceTimeSet,
    a2: &SpaceTimeSet,
    a3: &SpaceTimeSet,
    nodes: usize,
) -> (f64, f64) {
    let nodes = nodes.max(2);
    let lattice = |set: &SpaceTimeSet| -> Vec<(f64, f64)> {
        let (lo, hi) = set.xi_range();
        let mut pts = Vec::new();
        for i in 0..nodes {
            let xi = lo + (hi - lo) * i as f64 / (nodes - 1) as f64;
            for &(a, b) in set.bands() {
                for j in 0..nodes {
                    let eta = a + (b - a) * j as f64 / (nodes - 1) as f64;
                    pts.push((set.phase().at(xi) + eta, xi));
                }
            }
        }
        pts
    };
    let (xl, xh) = a2.xi_range();
    let (xc, xw) = (0.5 * (xl + xh), 0.5 * (xh - xl));
    let (bl, bh) = a2.bands()[0];
    let (ec, ew) = (0.5 * (bl + bh), 0.5 * (bh - bl));
    let mut worst = (0.0f64, 0.0f64);
    let targets = lattice(a3);
    for (t1, x1) in lattice(a1) {
        for &(t, x) in &targets {
            let (t2, x2) = (t - t1, x - x1);
            worst.0 = worst.0.max((x2 - xc).abs() / xw);
            worst.1 = worst.1.max((t2 - a2.phase().at(x2) - ec).abs() / ew);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::grid::SpaceTimeField;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let q = Quadrature::new(1);
        let v = q.integrate(-1.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        assert_eq!(q.integrate(1.0, 1.0, |_| 1.0), 0.0);
    }

    #[test]
    fn unit_square_norms() {
        let q = Quadrature::default();
        let sq = SpaceTimeSet::centered(0.0, 0.5, Phase::schrodinger(), 0.5).unwrap();
        assert!((set_xsb_norm(&sq, 0.0, 0.0, q) - 1.0).abs() < 1e-14);
        let sq3 = SpaceTimeSet::centered(3.0, 0.5, Phase::schrodinger(), 0.5).unwrap();
        let n = set_xsb_norm(&sq3, 1.0, 0.0, q);
        assert!((n / 10f64.sqrt() - 1.0).abs() < 0.02, "{n}");
    }

    #[test]
    fn convolution_of_flat_boxes() {
        // two unit squares on flat phases: the convolution is a pyramid of height 1 at the centre
        let flat = Phase::new(0.0, 0.0);
        let a = SpaceTimeSet::centered(0.0, 0.5, flat, 0.5).unwrap();
        let q = Quadrature::new(8);
        assert!((convolution_at(&a, &a, 0.0, 0.0, q) - 1.0).abs() < 1e-12);
        assert!((convolution_at(&a, &a, 0.5, 0.5, q) - 0.25).abs() < 1e-12);
        assert_eq!(convolution_at(&a, &a, 0.0, 1.5, q), 0.0);
        let far = SpaceTimeSet::centered(100.0, 0.5, flat, 0.5).unwrap();
        assert_eq!(conv_lower_bound(&a, &a, &far, 5, q), 0.0);
    }

    /// The sheared route against the rectangular lattice at small N.
    #[test]
    fn agrees_with_rectangular_lattice() {
        let n = 4.0;
        let a1 = SpaceTimeSet::centered(-n, 1.0, Phase::new(-1.0, 0.0), 1.0).unwrap();
        let a2 = SpaceTimeSet::centered(2.0 * n, 1.0, Phase::new(0.5, 0.0), 1.0).unwrap();
        let (s, b) = (-0.25, 0.5);
        let q = Quadrature::new(24);
        let sheared = product_norm(&a1, &a2, s, b - 1.0, Phase::schrodinger(), q);

        let h = 1.0 / 48.0;
        let f1 = SpaceTimeField::rasterize(&a1, h, h).unwrap();
        let f2 = SpaceTimeField::rasterize(&a2, h, h).unwrap();
        let conv = f1.convolve(&f2).unwrap();
        let lattice = conv.xsb_norm(s, b - 1.0, Phase::schrodinger());
        assert!((sheared / lattice - 1.0).abs() < 0.03, "{sheared} vs {lattice}");

        let n1 = set_xsb_norm(&a1, s, b, q);
        let l1 = f1.xsb_norm(s, b, a1.phase());
        assert!((n1 / l1 - 1.0).abs() < 0.03, "{n1} vs {l1}");

        // pointwise convolution at the centre of the target
        let c_sheared = convolution_at(&a1, &a2, n * n, n, q);
        let i = ((n * n - conv.tau0) / h).round() as usize;
        let j = ((n - conv.xi0) / h).round() as usize;
        let c_lattice = conv.get(i, j).re;
        assert!((c_sheared - c_lattice).abs() < 0.05 * c_sheared, "{c_sheared} vs {c_lattice}");
    }
}
