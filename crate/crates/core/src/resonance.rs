//! Resonance functions of the system and their algebra:
//!
//! ```text
//! h₃ = ξ₁² − αξ₂² + ξ₃²                         on ξ₁ + ξ₂ + ξ₃ = 0
//! h₄ = ξ₁² − ξ₂² + αξ₃² − αξ₄² = −ξ₁₂ g          on ξ₁ + … + ξ₄ = 0
//! ```
//!
//! with `ξᵢⱼ = ξᵢ + ξⱼ`. Also the alternating-square identity and the
//! classification of quadruples against the non-resonance set Ω(θ).

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::LabRng;

/// Frequencies on the hyperplane `Σ ξⱼ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTuple(Vec<f64>);

impl GammaTuple {
    pub fn new(xi: Vec<f64>) -> Result<Self> {
        let sum: f64 = xi.iter().sum();
        let scale = xi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if sum.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) && sum != 0.0 {
            return Err(Error::OffHyperplane { sum });
        }
        Ok(Self(xi))
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Largest `|ξⱼ|`.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |a, x| a.max(x.abs()))
    }
}

fn checked<const K: usize>(xi: [f64; K]) -> Result<[f64; K]> {
    GammaTuple::new(xi.to_vec())?;
    Ok(xi)
}

/// `ξ₁² − αξ₂² + ξ₃²`.
pub fn h3(xi: [f64; 3], alpha: f64) -> Result<f64> {
    let [a, b, c] = checked(xi)?;
    Ok(a * a - alpha * b * b + c * c)
}

/// Closed forms of `h₃` restricted to the hyperplane, as a function of
/// `(ξ₁, ξ₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum H3Factorization {
    /// `α < ½`: `lead (ξ₁ − shift ξ₃)² + remainder ξ₃²`, positive definite.
    SumOfSquares { lead: f64, shift: f64, remainder: f64 },
    /// `α = ½`: `lead (ξ₁ − ξ₃)²`.
    DoubleRoot { lead: f64, root: f64 },
    /// `α > ½`: `lead (ξ₁ − r₊ ξ₃)(ξ₁ − r₋ ξ₃)`.
    Roots { lead: f64, r_plus: f64, r_minus: f64 },
}

impl H3Factorization {
    pub fn evaluate(&self, xi1: f64, xi3: f64) -> f64 {
        match *self {
            H3Factorization::SumOfSquares { lead, shift, remainder } => {
                lead * (xi1 - shift * xi3).powi(2) + remainder * xi3 * xi3
            }
            H3Factorization::DoubleRoot { lead, root } => lead * (xi1 - root * xi3).powi(2),
            H3Factorization::Roots { lead, r_plus, r_minus } => lead * (xi1 - r_plus * xi3) * (xi1 - r_minus * xi3),
        }
    }
}

pub fn h3_factor(alpha: f64) -> Result<H3Factorization> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let lead = 1.0 - alpha;
    Ok(if alpha < 0.5 {
        H3Factorization::SumOfSquares {
            lead,
            shift: alpha / lead,
            remainder: (1.0 - 2.0 * alpha) / lead,
        }
    } else if alpha == 0.5 {
        H3Factorization::DoubleRoot { lead, root: 1.0 }
    } else {
        let d = (2.0 * alpha - 1.0).sqrt();
        H3Factorization::Roots {
            lead,
            r_plus: (alpha + d) / lead,
            r_minus: (alpha - d) / lead,
        }
    })
}

/// `g = 2αξ₂₃ + (1 − α)(ξ₂ − ξ₁)`, the cofactor in `h₄ = −ξ₁₂ g`.
fn g_value(x: [f64; 4], alpha: f64) -> f64 {
    2.0 * alpha * (x[1] + x[2]) + (1.0 - alpha) * (x[1] - x[0])
}

/// The three equivalent forms of `g` on the hyperplane:
///
/// ```text
/// 2αξ₂₃ + (1−α)(ξ₂ − ξ₁)
/// −2αξ₁₄ − 2(1−α)ξ₁ − (1−α)ξ₃₄
/// −2ξ₁ − 2αξ₄ − (1−α)ξ₃₄
/// ```
pub fn g_forms(xi: [f64; 4], alpha: f64) -> Result<[f64; 3]> {
    let x = checked(xi)?;
    let b = 1.0 - alpha;
    Ok([
        g_value(x, alpha),
        -2.0 * alpha * (x[0] + x[3]) - 2.0 * b * x[0] - b * (x[2] + x[3]),
        -2.0 * x[0] - 2.0 * alpha * x[3] - b * (x[2] + x[3]),
    ])
}

/// `(h₄, g)` with `h₄ = −ξ₁₂ g`.
pub fn h4_and_g(xi: [f64; 4], alpha: f64) -> Result<(f64, f64)> {
    let x = checked(xi)?;
    let g = g_value(x, alpha);
    Ok((-(x[0] + x[1]) * g, g))
}

/// The modulation combination for the slot pattern `(u, ū, v, v̄)`:
/// `ξ₁² − ξ₂² + αξ₃² − αξ₄²`.
pub fn h4_direct(xi: [f64; 4], alpha: f64) -> Result<f64> {
    let x = checked(xi)?;
    Ok(x[0] * x[0] - x[1] * x[1] + alpha * (x[2] * x[2] - x[3] * x[3]))
}

/// Both sides of `Σⱼ (−1)ʲ ξⱼ² = −2 ξ₁₂ ξ₁₄` (with `j = 1..4`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauIdentity {
    pub alternating_sum: f64,
    pub factored: f64,
}

pub fn tau_identity(xi: [f64; 4]) -> Result<TauIdentity> {
    let x = checked(xi)?;
    Ok(TauIdentity {
        alternating_sum: -x[0] * x[0] + x[1] * x[1] - x[2] * x[2] + x[3] * x[3],
        factored: -2.0 * (x[0] + x[1]) * (x[0] + x[3]),
    })
}

/// Which pair sum is small in case 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallPair {
    Xi12,
    Xi14,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaLabel {
    /// `|ξ₁₂|, |ξ₁₄| >= θ N_m`
    Omega,
    /// both pair sums below `θ N_m`
    Case1,
    /// the small pair sum is at most `θ / N_m`
    Case2_1,
    /// the small pair sum is at least `θ`
    Case2_2,
    /// the small pair sum lies strictly between `θ / N_m` and `θ`
    Case2_3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaClass {
    pub label: OmegaLabel,
    pub n_max: f64,
    /// Set in the case-2 labels.
    pub small_pair: Option<SmallPair>,
}

/// Places a quadruple in Ω(θ) or one of the complementary cases, with
/// `N_m = max |ξⱼ|`.
pub fn omega_membership(xi: [f64; 4], theta: f64) -> Result<OmegaClass> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("theta must lie in (0, 1), got {theta}")));
    }
    let x = checked(xi)?;
    let n_max = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let p12 = (x[0] + x[1]).abs();
    let p14 = (x[0] + x[3]).abs();
    let threshold = theta * n_max;
    let (s12, s14) = (p12 < threshold, p14 < threshold);
    let (label, small_pair) = match (s12, s14) {
        (false, false) => (OmegaLabel::Omega, None),
        (true, true) => (OmegaLabel::Case1, None),
        (true, false) | (false, true) => {
            let (p, which) = if s12 { (p12, SmallPair::Xi12) } else { (p14, SmallPair::Xi14) };
            let label = if p <= theta / n_max {
                OmegaLabel::Case2_1
            } else if p >= theta {
                OmegaLabel::Case2_2
            } else {
                OmegaLabel::Case2_3
            };
            (label, Some(which))
        }
    };
    Ok(OmegaClass {
        label,
        n_max,
        small_pair,
    })
}

/// A uniformly random `K`-tuple on the hyperplane: the first `K − 1`
/// entries uniform in `[−scale, scale]`, the last fixed by the constraint.
pub fn random_gamma_tuple<const K: usize>(rng: &mut LabRng, scale: f64) -> [f64; K] {
    let mut x = [0.0; K];
    let mut sum = 0.0;
    for v in x.iter_mut().take(K - 1) {
        *v = rng.gen_range(-scale..=scale);
        sum += *v;
    }
    x[K - 1] = -sum;
    x
}

/// `min h₃ / (ξ₁² + ξ₂² + ξ₃²)` over `samples` random triples.
pub fn h3_coercivity_constant(alpha: f64, samples: usize, rng: &mut LabRng) -> f64 {
    (0..samples)
        .map(|_| {
            let x = random_gamma_tuple::<3>(rng, 1.0);
            let norm = x.iter().map(|v| v * v).sum::<f64>();
            (x[0] * x[0] - alpha * x[1] * x[1] + x[2] * x[2]) / norm
        })
        .fold(f64::INFINITY, f64::min)
}

/// Counts of positive and negative `h₃` over `samples` random triples.
pub fn h3_sign_census(alpha: f64, samples: usize, rng: &mut LabRng) -> (usize, usize) {
    let mut pos = 0;
    let mut neg = 0;
    for _ in 0..samples {
        let x = random_gamma_tuple::<3>(rng, 1.0);
        let h = x[0] * x[0] - alpha * x[1] * x[1] + x[2] * x[2];
        if h > 0.0 {
            pos += 1;
        } else if h < 0.0 {
            neg += 1;
        }
    }
    (pos, neg)
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_gap(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// One line of [`resonance_audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub check: &'static str,
    pub alpha: f64,
    pub samples: usize,
    /// Largest relative discrepancy between the two sides (0 for pure measurements).
    pub max_rel_error: f64,
    /// Measured quantity: the coercivity constant, the fraction of negative
    /// `h₃`, or 0 for identities.
    pub value: f64,
}

/// Checks every closed form on `samples` random hyperplane tuples of scale 10
/// and records the sign structure of `h₃`.
pub fn resonance_audit(alpha: f64, samples: usize, seed: u64) -> Result<Vec<AuditRow>> {
    let factor = h3_factor(alpha)?;
    let mut rng = crate::rng::seeded(seed);
    let sq = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let (mut e_h3, mut e_h4, mut e_g, mut e_tau) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let x3 = random_gamma_tuple::<3>(&mut rng, 10.0);
        e_h3 = e_h3.max(relative_gap(h3(x3, alpha)?, factor.evaluate(x3[0], x3[2]), sq(&x3)));
        let x4 = random_gamma_tuple::<4>(&mut rng, 10.0);
        let (h4, _) = h4_and_g(x4, alpha)?;
        e_h4 = e_h4.max(relative_gap(h4, h4_direct(x4, alpha)?, sq(&x4)));
        let g = g_forms(x4, alpha)?;
        let l1 = x4.iter().map(|v| v.abs()).sum::<f64>();
        e_g = e_g.max(relative_gap(g[1], g[0], l1)).max(relative_gap(g[2], g[0], l1));
        let t = tau_identity(x4)?;
        e_tau = e_tau.max(relative_gap(t.alternating_sum, t.factored, sq(&x4)));
    }
    let coercivity = h3_coercivity_constant(alpha, samples, &mut rng);
    let (_, neg) = h3_sign_census(alpha, samples, &mut rng);
    let row = |check, max_rel_error, value| AuditRow {
        check,
        alpha,
        samples,
        max_rel_error,
        value,
    };
    Ok(vec![
        row("h3_factorization", e_h3, 0.0),
        row("h4_factorization", e_h4, 0.0),
        row("g_rewrites", e_g, 0.0),
        row("tau_identity", e_tau, 0.0),
        row("h3_coercivity", 0.0, coercivity),
        row("h3_negative_fraction", 0.0, neg as f64 / samples.max(1) as f64),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn hyperplane_is_enforced() {
        assert!(GammaTuple::new(vec![1.0, 2.0, -3.0]).is_ok());
        assert!(GammaTuple::new(vec![0.0; 4]).is_ok());
        assert!(matches!(h3([1.0, 1.0, 1.0], 0.3), Err(Error::OffHyperplane { .. })));
        assert!(h4_and_g([1.0, 0.0, 0.0, 0.0], 0.3).is_err());
        assert!(tau_identity([1.0, 1.0, 1.0, 1.0]).is_err());
        assert_eq!(GammaTuple::new(vec![2.0, -5.0, 3.0]).unwrap().max_abs(), 5.0);
    }

    #[test]
    fn h3_examples() {
        assert_eq!(h3([1.0, -2.0, 1.0], 0.5).unwrap(), 0.0);
        assert_eq!(h3([0.0, 0.0, 0.0], 0.3).unwrap(), 0.0);
    }

    #[test]
    fn h3_factorizations() {
        let mut rng = seeded(1);
        for &alpha in &[0.1, 0.25, 0.4, 0.5, 0.55, 0.625, 0.9] {
            let f = h3_factor(alpha).unwrap();
            for _ in 0..10_000 {
                let x = random_gamma_tuple::<3>(&mut rng, 10.0);
                let direct = h3(x, alpha).unwrap();
                let scale = x.iter().map(|v| v * v).sum::<f64>();
                assert!((direct - f.evaluate(x[0], x[2])).abs() <= 1e-12 * scale, "alpha {alpha} at {x:?}");
            }
        }
        match h3_factor(0.625).unwrap() {
            H3Factorization::Roots { lead, r_plus, r_minus } => {
                assert!((lead - 0.375).abs() < 1e-15);
                assert!((r_plus - 3.0).abs() < 1e-14 && (r_minus - 1.0 / 3.0).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        match h3_factor(0.25).unwrap() {
            H3Factorization::SumOfSquares { lead, shift, remainder } => {
                assert!((lead - 0.75).abs() < 1e-15);
                assert!((shift - 1.0 / 3.0).abs() < 1e-15);
                assert!((remainder - 2.0 / 3.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(h3_factor(0.5).unwrap(), H3Factorization::DoubleRoot { root, .. } if root == 1.0));
        if let H3Factorization::Roots { r_plus, r_minus, .. } = h3_factor(0.5 + 1e-12).unwrap() {
            assert!((r_plus - 1.0).abs() < 1e-5 && (r_minus - 1.0).abs() < 1e-5);
        } else {
            panic!("expected roots");
        }
        assert!(h3_factor(1.0).is_err());
    }

    #[test]
    fn coercivity_and_resonance() {
        let mut rng = seeded(2);
        assert!(h3_coercivity_constant(0.25, 10_000, &mut rng) > 0.0);
        let (pos, neg) = h3_sign_census(0.625, 10_000, &mut rng);
        assert!(pos > 0 && neg > 0);
    }

    #[test]
    fn h4_and_g_identities() {
        assert_eq!(h4_and_g([0.0; 4], 0.3).unwrap(), (0.0, 0.0));
        assert_eq!(h4_and_g([2.0, -2.0, 5.0, -5.0], 0.3).unwrap().0, 0.0);
        let g = g_forms([1.0, 2.0, 3.0, -6.0], 0.5).unwrap();
        assert!(g.iter().all(|v| (v - 5.5).abs() < 1e-14), "{g:?}");
        let mut rng = seeded(3);
        for &alpha in &[0.1, 0.25, 0.625] {
            for _ in 0..10_000 {
                let x = random_gamma_tuple::<4>(&mut rng, 10.0);
                let (h4, _) = h4_and_g(x, alpha).unwrap();
                let direct = h4_direct(x, alpha).unwrap();
                let scale = x.iter().map(|v| v * v).sum::<f64>();
                assert!((h4 - direct).abs() <= 1e-12 * scale);
                let g = g_forms(x, alpha).unwrap();
                let gs = x.iter().map(|v| v.abs()).sum::<f64>();
                assert!(g.iter().all(|v| (v - g[0]).abs() <= 1e-12 * gs));
            }
        }
    }

    #[test]
    fn tau_identity_examples() {
        let t = tau_identity([1.0, -1.0, 2.0, -2.0]).unwrap();
        assert_eq!((t.alternating_sum, t.factored), (0.0, 0.0));
        let t = tau_identity([1.0, 1.0, 1.0, -3.0]).unwrap();
        assert_eq!((t.alternating_sum, t.factored), (8.0, 8.0));
        let mut rng = seeded(4);
        for _ in 0..10_000 {
            let x = random_gamma_tuple::<4>(&mut rng, 10.0);
            let t = tau_identity(x).unwrap();
            let scale = x.iter().map(|v| v * v).sum::<f64>();
            assert!(relative_gap(t.alternating_sum, t.factored, scale) < 1e-12);
        }
    }

    #[test]
    fn audit_rows() {
        let rows = resonance_audit(0.25, 2000, 9).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows[..4].iter().all(|r| r.max_rel_error < 1e-12));
        assert!(rows[4].value > 0.0 && rows[5].value == 0.0);
        let rows = resonance_audit(0.625, 2000, 9).unwrap();
        assert!(rows[4].value < 0.0 && rows[5].value > 0.0);
        assert!(resonance_audit(1.5, 10, 0).is_err());
    }

    #[test]
    fn omega_classification() {
        let n = 50.0;
        let c = omega_membership([n, n, -n, -n], 0.1).unwrap();
        assert_eq!(c.label, OmegaLabel::Case2_1);
        assert_eq!(c.small_pair, Some(SmallPair::Xi14));
        assert_eq!(c.n_max, n);

        assert_eq!(omega_membership([10.0, 3.0, -20.0, 7.0], 0.1).unwrap().label, OmegaLabel::Omega);

        // |ξ₁₂| = θ/(2N_m)
        let theta = 0.2;
        let nm = 40.0;
        let p = theta / (2.0 * nm);
        let c = omega_membership([nm, -nm + p, 10.0, -10.0 - p], theta).unwrap();
        assert_eq!(c.label, OmegaLabel::Case2_1);
        assert_eq!(c.small_pair, Some(SmallPair::Xi12));

        let c = omega_membership([nm, -nm + 1.0, 10.0, -11.0], theta).unwrap();
        assert_eq!(c.label, OmegaLabel::Case2_2);
        let c = omega_membership([nm, -nm + 0.1, 10.0, -10.1], theta).unwrap();
        assert_eq!(c.label, OmegaLabel::Case2_3);
        let c = omega_membership([nm, -nm, nm, -nm], theta).unwrap();
        assert_eq!(c.label, OmegaLabel::Case1);
        assert!(omega_membership([1.0, -1.0, 0.0, 0.0], 1.5).is_err());
    }

    #[test]
    fn classification_partitions_random_tuples() {
        let mut rng = seeded(5);
        for _ in 0..10_000 {
            let x = random_gamma_tuple::<4>(&mut rng, 20.0);
            let c = omega_membership(x, 0.3).unwrap();
            let p12 = (x[0] + x[1]).abs();
            let p14 = (x[0] + x[3]).abs();
            let t = 0.3 * c.n_max;
            let expect_omega = p12 >= t && p14 >= t;
            assert_eq!(c.label == OmegaLabel::Omega, expect_omega);
            assert_eq!(c.small_pair.is_some(), (p12 < t) != (p14 < t));
        }
    }
}
