//! Multilinear sums over the hyperplane `ξ₁ + … + ξₖ = 0`,
//!
//! ```text
//! Λₖ(M; f₁, …, fₖ) = (dξ/2π)^{k-1} Σ_{ξ₁+…+ξₖ=0} M(ξ₁, …, ξₖ) f̂₁(ξ₁) ⋯ f̂ₖ(ξₖ)
//! ```
//!
//! together with elongation of multipliers and the two conserved quantities.
//! The weight is chosen so that `Λ₂(1; u, ū) = ‖u‖²` and `Λₖ(1; …)` is the
//! spatial integral of the product.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::FieldPair;
use crate::spectral::{convolve, SpectralField};

type EvalFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A complex function of `arity` frequencies, meant to be evaluated on the
/// hyperplane only.
#[derive(Clone)]
pub struct Multiplier {
    arity: usize,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier").field("arity", &self.arity).finish()
    }
}

impl Multiplier {
    pub fn new(arity: usize, eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Result<Self> {
        if arity < 2 {
            return Err(Error::Parameter(format!("multiplier arity must be >= 2, got {arity}")));
        }
        Ok(Self {
            arity,
            eval: Arc::new(eval),
        })
    }

    pub fn constant(arity: usize, value: Complex64) -> Result<Self> {
        Self::new(arity, move |_| value)
    }

    /// Real-valued convenience constructor.
    pub fn real(arity: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::new(arity, move |xi| Complex64::new(eval(xi), 0.0))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        debug_assert_eq!(xi.len(), self.arity);
        debug_assert!(
            xi.iter().sum::<f64>().abs() <= 1e-9 * xi.iter().fold(1.0f64, |a, x| a.max(x.abs())),
            "multiplier evaluated off the hyperplane: {xi:?}"
        );
        (self.eval)(xi)
    }

    /// `X_j^k(M)`: replaces argument `j` (1-based) by the sum of `k + 1`
    /// consecutive frequencies, giving a multiplier of arity `arity + k`.
    pub fn elongate(&self, j: usize, k: usize) -> Result<Self> {
        if j == 0 || j > self.arity {
            return Err(Error::Parameter(format!(
                "elongation slot {j} outside 1..={}",
                self.arity
            )));
        }
        let inner = self.eval.clone();
        let arity = self.arity;
        Self::new(arity + k, move |xi| {
            let mut reduced = Vec::with_capacity(arity);
            reduced.extend_from_slice(&xi[..j - 1]);
            reduced.push(xi[j - 1..j + k].iter().sum());
            reduced.extend_from_slice(&xi[j + k..]);
            inner(&reduced)
        })
    }

    /// Pointwise product with another multiplier of the same arity.
    pub fn times(&self, other: &Multiplier) -> Result<Self> {
        if other.arity != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: other.arity,
            });
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::new(self.arity, move |xi| a(xi) * b(xi))
    }
}

/// Which argument slots enter conjugated: a conjugated slot contributes
/// `conj(f̂(-ξ))`, the transform of `f̄`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugationPattern(Vec<bool>);

impl ConjugationPattern {
    pub fn new(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    /// No conjugated slot.
    pub fn plain(arity: usize) -> Self {
        Self(vec![false; arity])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.0
    }
}

/// Coefficient of field `f` in slot with conjugation flag `conj`, mode `k`.
#[inline]
fn slot_coeff(f: &SpectralField, conj: bool, k: i64) -> Complex64 {
    if conj {
        f.conj_at_mode(k)
    } else {
        f.at_mode(k)
    }
}

/// `Λₖ(M; f₁, …, fₖ)` by direct summation over resolved modes, the last
/// frequency being eliminated by the hyperplane constraint.
///
/// Parallel over the first frequency; partial sums are combined in index
/// order, so the result does not depend on the thread count.
pub fn lambda_k(m: &Multiplier, fields: &[&SpectralField], pattern: &ConjugationPattern) -> Result<Complex64> {
    let k = m.arity();
    if fields.len() != k {
        return Err(Error::Arity {
            expected: k,
            got: fields.len(),
        });
    }
    if pattern.len() != k {
        return Err(Error::Arity {
            expected: k,
            got: pattern.len(),
        });
    }
    for f in &fields[1..] {
        fields[0].same_grid(f)?;
    }
    let grid = fields[0].grid();
    let kmax = grid.kmax();
    let dxi = grid.dxi();
    let flags = pattern.flags();

    // per-slot coefficient tables over resolved modes, index = mode + kmax
    let tables: Vec<Vec<Complex64>> = fields
        .iter()
        .zip(flags)
        .map(|(f, &c)| (-kmax..=kmax).map(|q| slot_coeff(f, c, q)).collect())
        .collect();
    let modes: Vec<i64> = (-kmax..=kmax).collect();

    let partials: Vec<Complex64> = modes
        .par_iter()
        .map(|&k1| {
            let c1 = tables[0][(k1 + kmax) as usize];
            if c1 == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let mut xi = vec![0.0; k];
            xi[0] = k1 as f64 * dxi;
            let mut acc = Complex64::new(0.0, 0.0);
            inner_sum(m, &tables, kmax, dxi, 1, k1, c1, &mut xi, &mut acc);
            acc
        })
        .collect();
    let total: Complex64 = partials.iter().sum();
    Ok(total * grid.measure().powi(k as i32 - 1))
}

#[allow(clippy::too_many_arguments)]
fn inner_sum(
    m: &Multiplier,
    tables: &[Vec<Complex64>],
    kmax: i64,
    dxi: f64,
    slot: usize,
    partial_modes: i64,
    partial_prod: Complex64,
    xi: &mut [f64],
    acc: &mut Complex64,
) {
    let k = tables.len();
    if slot == k - 1 {
        let last = -partial_modes;
        if last.abs() > kmax {
            return;
        }
        let c = tables[slot][(last + kmax) as usize];
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        xi[slot] = last as f64 * dxi;
        *acc += m.eval(xi) * partial_prod * c;
        return;
    }
    // remaining slots after this one can absorb at most (k - 1 - slot) * kmax
    let reach = (k - 1 - slot) as i64 * kmax;
    let lo = (-kmax).max(-partial_modes - reach);
    let hi = kmax.min(-partial_modes + reach);
    for q in lo..=hi {
        let c = tables[slot][(q + kmax) as usize];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        xi[slot] = q as f64 * dxi;
        inner_sum(m, tables, kmax, dxi, slot + 1, partial_modes + q, partial_prod * c, xi, acc);
    }
}

/// `½‖u‖² + ‖v‖²`.
pub fn mass(state: &FieldPair) -> f64 {
    0.5 * state.u.l2_norm_sq() + state.v.l2_norm_sq()
}

/// `½Λ₂(1; u, ū) + Λ₂(1; v, v̄)`.
pub fn mass_lambda_form(state: &FieldPair) -> Result<f64> {
    let one = Multiplier::constant(2, Complex64::new(1.0, 0.0))?;
    let pat = ConjugationPattern::new(vec![false, true]);
    let mu = lambda_k(&one, &[&state.u, &state.u], &pat)?;
    let mv = lambda_k(&one, &[&state.v, &state.v], &pat)?;
    Ok(0.5 * mu.re + mv.re)
}

/// `Re ∫ v̄ u² dx`, from the dealiased square of `u`.
pub fn cubic_term(state: &FieldPair) -> Result<f64> {
    let u2 = convolve(&state.u, &state.u)?;
    Ok(u2.inner(&state.v)?.re)
}

/// `‖∂ₓu‖² + α‖∂ₓv‖² + Re ∫ v̄ u² dx`.
pub fn energy(state: &FieldPair) -> Result<f64> {
    Ok(state.u.derivative_norm_sq() + state.alpha() * state.v.derivative_norm_sq() + cubic_term(state)?)
}

/// `−Λ₂(ξ₁ξ₂; u, ū) − αΛ₂(ξ₁ξ₂; v, v̄) + Re Λ₃(1; u, v̄, u)`.
pub fn energy_lambda_form(state: &FieldPair) -> Result<f64> {
    let xx = Multiplier::real(2, |xi| xi[0] * xi[1])?;
    let pat = ConjugationPattern::new(vec![false, true]);
    let ku = lambda_k(&xx, &[&state.u, &state.u], &pat)?;
    let kv = lambda_k(&xx, &[&state.v, &state.v], &pat)?;
    let one = Multiplier::constant(3, Complex64::new(1.0, 0.0))?;
    let cubic = lambda_k(
        &one,
        &[&state.u, &state.v, &state.u],
        &ConjugationPattern::new(vec![false, true, false]),
    )?;
    Ok(-ku.re - state.alpha() * kv.re + cubic.re)
}
