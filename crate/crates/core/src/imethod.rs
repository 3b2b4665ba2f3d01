//! The smoothed frequency cutoff `I`, the modified masses
//!
//! ```text
//! E₂ = ½‖Iu‖² + ‖Iv‖²
//! E₃ = E₂ + Im Λ₃(σ₃; u, v̄, u),   σ₃ = (m₁² − m₂²) / (−i h₃)
//! ```
//!
//! and the identities
//!
//! ```text
//! dE₂/dt = Im Λ₃(m₂² − m₁²; u, v̄, u)
//! dE₃/dt = Im R₄′ − ½ Im R₄″
//! ```
//!
//! checked along computed trajectories, plus the increment sweep over `N`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{strang_evolve, FieldPair, InitialData, StrangConfig, Trajectory};
use crate::fit::{fit_power_law, PowerFit};
use crate::functionals::{lambda_k, ConjugationPattern, Multiplier};
use crate::spectral::{FourierGrid, SpectralField};

/// `m(ξ) = 1` for `|ξ| <= N`, `(N/|ξ|)^ρ` for `|ξ| >= 2N`, and
/// `exp(−ρ s(t) ln t)` with `t = |ξ|/N` in between, where `s` is the quintic
/// smoothstep ramp (C², monotone, `s(1) = 0`, `s(2) = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IMultiplier {
    cutoff: f64,
    rho: f64,
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

impl IMultiplier {
    pub fn new(cutoff: f64, rho: f64) -> Result<Self> {
        if !(cutoff >= 1.0 && cutoff.is_finite()) {
            return Err(Error::Parameter(format!("cutoff N must be >= 1, got {cutoff}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Parameter(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { cutoff, rho })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let t = xi.abs() / self.cutoff;
        if t <= 1.0 {
            1.0
        } else if t >= 2.0 {
            t.powf(-self.rho)
        } else {
            (-self.rho * smoothstep(t - 1.0) * t.ln()).exp()
        }
    }

    pub fn eval_sq(&self, xi: f64) -> f64 {
        let m = self.eval(xi);
        m * m
    }

    /// `m²` tabulated on mode numbers `-reach..=reach` of `grid`.
    fn table_sq(&self, grid: &FourierGrid, reach: i64) -> ModeTable {
        ModeTable {
            dxi: grid.dxi(),
            reach,
            values: (-reach..=reach)
                .map(|k| self.eval_sq(grid.frequency_of_mode(k)))
                .collect(),
        }
    }
}

/// Lookup of a function of grid frequencies by mode number.
struct ModeTable {
    dxi: f64,
    reach: i64,
    values: Vec<f64>,
}

impl ModeTable {
    #[inline]
    fn mode(&self, xi: f64) -> i64 {
        (xi / self.dxi).round() as i64
    }

    #[inline]
    fn get(&self, xi: f64) -> f64 {
        self.values[(self.mode(xi) + self.reach) as usize]
    }
}

fn require_nonresonant(alpha: f64) -> Result<()> {
    if alpha >= 0.5 {
        return Err(Error::Regime(format!(
            "the corrected mass needs alpha < 1/2 (non-resonant h3), got alpha = {alpha}"
        )));
    }
    Ok(())
}

/// Scales every coefficient of both components by `m(ξ)`.
pub fn apply_i(state: &FieldPair, im: &IMultiplier) -> FieldPair {
    let mut out = state.clone();
    out.u = state.u.map_diagonal(|xi| Complex64::new(im.eval(xi), 0.0));
    out.v = state.v.map_diagonal(|xi| Complex64::new(im.eval(xi), 0.0));
    out
}

fn apply_i_field(f: &SpectralField, im: &IMultiplier) -> SpectralField {
    f.map_diagonal(|xi| Complex64::new(im.eval(xi), 0.0))
}

/// `½‖Iu‖² + ‖Iv‖²`.
pub fn modified_mass_e2(state: &FieldPair, im: &IMultiplier) -> f64 {
    0.5 * apply_i_field(&state.u, im).l2_norm_sq() + apply_i_field(&state.v, im).l2_norm_sq()
}

#[inline]
fn h3(alpha: f64, x1: f64, x2: f64, x3: f64) -> f64 {
    x1 * x1 - alpha * x2 * x2 + x3 * x3
}

/// `σ₃ = (m(ξ₁)² − m(ξ₂)²)/(−i h₃)` with `σ₃(0, 0, 0) = 0`.
pub fn sigma3_eval(im: &IMultiplier, alpha: f64, xi1: f64, xi2: f64, xi3: f64) -> Result<Complex64> {
    require_nonresonant(alpha)?;
    let d = h3(alpha, xi1, xi2, xi3);
    if d == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::new(0.0, (im.eval_sq(xi1) - im.eval_sq(xi2)) / d))
}

/// `σ₃` as a 3-multiplier for the pattern `(u, v̄, u)`.
pub fn sigma3_multiplier(im: &IMultiplier, alpha: f64) -> Result<Multiplier> {
    require_nonresonant(alpha)?;
    let im = *im;
    Multiplier::new(3, move |xi| {
        let d = h3(alpha, xi[0], xi[1], xi[2]);
        if d == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, (im.eval_sq(xi[0]) - im.eval_sq(xi[1])) / d)
        }
    })
}

fn pattern_uvbar_u() -> ConjugationPattern {
    ConjugationPattern::new(vec![false, true, false])
}

/// `Im Λ₃(σ₃; u, v̄, u)`, the cubic correction in `E₃`.
pub fn e3_correction(state: &FieldPair, im: &IMultiplier) -> Result<f64> {
    let sigma = sigma3_multiplier(im, state.alpha())?;
    Ok(lambda_k(&sigma, &[&state.u, &state.v, &state.u], &pattern_uvbar_u())?.im)
}

/// `E₂ + Im Λ₃(σ₃; u, v̄, u)`.
pub fn modified_mass_e3(state: &FieldPair, im: &IMultiplier) -> Result<f64> {
    Ok(modified_mass_e2(state, im) + e3_correction(state, im)?)
}

/// `Im Λ₃(m₂² − m₁²; u, v̄, u)`, the right side of the `E₂` identity.
pub fn e2_derivative_identity(state: &FieldPair, im: &IMultiplier) -> Result<f64> {
    let im = *im;
    let m = Multiplier::real(3, move |xi| im.eval_sq(xi[1]) - im.eval_sq(xi[0]))?;
    Ok(lambda_k(&m, &[&state.u, &state.v, &state.u], &pattern_uvbar_u())?.im)
}

fn r4_prime_value(m1: f64, m23: f64, m4: f64, alpha: f64, x1: f64, x4: f64, x23: f64) -> f64 {
    let num = m1 + m23 - 2.0 * m4;
    let den = x1 * x1 - alpha * x4 * x4 + x23 * x23;
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn r4_second_value(m1: f64, m24: f64, alpha: f64, x1: f64, x24: f64, x3: f64) -> f64 {
    let num = m1 - m24;
    let den = x1 * x1 - alpha * x24 * x24 + x3 * x3;
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// The two quartic multipliers
///
/// ```text
/// R₄′: (m₁² + m₂₃² − 2m₄²)/(ξ₁² − αξ₄² + ξ₂₃²)   pattern (u, ū, v, v̄)
/// R₄″: (m₁² − m₂₄²)/(ξ₁² − αξ₂₄² + ξ₃²)         pattern (u, ū, u, ū)
/// ```
///
/// For `α < ½` both denominators vanish only at the origin, where the
/// numerators vanish too; the value there is 0.
pub fn r4_multipliers(im: &IMultiplier, alpha: f64) -> Result<(Multiplier, Multiplier)> {
    require_nonresonant(alpha)?;
    let im = *im;
    let prime = Multiplier::real(4, move |x| {
        let x23 = x[1] + x[2];
        r4_prime_value(im.eval_sq(x[0]), im.eval_sq(x23), im.eval_sq(x[3]), alpha, x[0], x[3], x23)
    })?;
    let second = Multiplier::real(4, move |x| {
        let x24 = x[1] + x[3];
        r4_second_value(im.eval_sq(x[0]), im.eval_sq(x24), alpha, x[0], x24, x[2])
    })?;
    Ok((prime, second))
}

/// [`r4_multipliers`] restricted to tuples whose inner pair sum (`ξ₂₃` for
/// R₄′, `ξ₂₄` for R₄″) is a resolved mode of `grid`. With this restriction
/// the `E₃` identity is exact for the Galerkin-truncated flow.
pub fn r4_multipliers_on(im: &IMultiplier, alpha: f64, grid: &FourierGrid) -> Result<(Multiplier, Multiplier)> {
    require_nonresonant(alpha)?;
    let kmax = grid.kmax();
    let table = std::sync::Arc::new(im.table_sq(grid, 2 * kmax));
    let t1 = table.clone();
    let prime = Multiplier::real(4, move |x| {
        let x23 = x[1] + x[2];
        if t1.mode(x23).abs() > kmax {
            return 0.0;
        }
        r4_prime_value(t1.get(x[0]), t1.get(x23), t1.get(x[3]), alpha, x[0], x[3], x23)
    })?;
    let t2 = table;
    let second = Multiplier::real(4, move |x| {
        let x24 = x[1] + x[3];
        if t2.mode(x24).abs() > kmax {
            return 0.0;
        }
        r4_second_value(t2.get(x[0]), t2.get(x24), alpha, x[0], x24, x[2])
    })?;
    Ok((prime, second))
}

/// `Im R₄′ − ½ Im R₄″` on the grid of `state`.
pub fn e3_derivative_identity(state: &FieldPair, im: &IMultiplier) -> Result<f64> {
    let (prime, second) = r4_multipliers_on(im, state.alpha(), state.grid())?;
    let (u, v) = (&state.u, &state.v);
    let rp = lambda_k(&prime, &[u, u, v, v], &ConjugationPattern::new(vec![false, true, false, true]))?;
    let rs = lambda_k(&second, &[u, u, u, u], &ConjugationPattern::new(vec![false, true, false, true]))?;
    Ok(rp.im - 0.5 * rs.im)
}

/// Which modified mass to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModifiedMass {
    E2,
    E3,
}

/// One interior sample of a derivative-identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub time: f64,
    /// Central difference of the modified mass.
    pub derivative: f64,
    /// Multiplier form of the derivative.
    pub identity: f64,
    pub residual: f64,
}

/// Central-difference derivative of `E₂` or `E₃` at every interior sample,
/// compared with its multiplier form. Samples must be equally spaced.
pub fn derivative_residuals(
    trajectory: &Trajectory,
    im: &IMultiplier,
    which: ModifiedMass,
) -> Result<Vec<ResidualPoint>> {
    let samples = trajectory.samples();
    if samples.len() < 3 {
        return Err(Error::Parameter(format!(
            "central differences need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if which == ModifiedMass::E3 {
        require_nonresonant(samples[0].alpha())?;
    }
    let h = samples[1].time - samples[0].time;
    if samples
        .windows(2)
        .any(|w| ((w[1].time - w[0].time) - h).abs() > 1e-9 * h)
    {
        return Err(Error::Parameter("samples are not equally spaced".into()));
    }
    let value = |s: &FieldPair| -> Result<f64> {
        match which {
            ModifiedMass::E2 => Ok(modified_mass_e2(s, im)),
            ModifiedMass::E3 => modified_mass_e3(s, im),
        }
    };
    let values = samples.iter().map(value).collect::<Result<Vec<f64>>>()?;
    (1..samples.len() - 1)
        .map(|i| {
            let derivative = (values[i + 1] - values[i - 1]) / (2.0 * h);
            let identity = match which {
                ModifiedMass::E2 => e2_derivative_identity(&samples[i], im)?,
                ModifiedMass::E3 => e3_derivative_identity(&samples[i], im)?,
            };
            Ok(ResidualPoint {
                time: samples[i].time,
                derivative,
                identity,
                residual: (derivative - identity).abs(),
            })
        })
        .collect()
}

/// Parameters of the one-window increment sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub length: f64,
    pub n: usize,
    pub alpha: f64,
    pub rho: f64,
    pub cutoffs: Vec<f64>,
    pub dt: f64,
    /// Window length δ.
    pub window: f64,
    pub data: InitialData,
    pub seed: u64,
    pub nonlinear: bool,
}

/// One row of the sweep, for one cutoff `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub cutoff: f64,
    pub rho: f64,
    pub alpha: f64,
    pub dt: f64,
    pub n: usize,
    pub length: f64,
    /// `|E₂(δ) − E₂(0)|`
    pub e2_increment: f64,
    /// `|E₃(δ) − E₃(0)|`
    pub e3_increment: f64,
    /// `|E₃(0) − E₂(0)|`
    pub e3_minus_e2: f64,
    /// `|E₃(0) − E₂(0)| / (‖Iu₀‖² ‖Iv₀‖)`
    pub e3_minus_e2_normalized: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    /// Fit of the normalised `|E₃ − E₂|` against `N`; γ is minus the slope.
    pub gamma_fit: Option<PowerFit>,
    /// Fit of the `E₃` increment against `N`; the decay exponent is minus the slope.
    pub beta_fit: Option<PowerFit>,
}

impl SweepReport {
    pub fn gamma(&self) -> Option<f64> {
        self.gamma_fit.map(|f| -f.slope)
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta_fit.map(|f| -f.slope)
    }
}

/// Evolves the configured data over one window `[0, δ]` and records the
/// `E₂`/`E₃` increments for every cutoff. The trajectory does not depend on
/// `N`, so it is computed once; the cutoffs are evaluated in parallel.
pub fn almost_conservation_sweep(config: &SweepConfig) -> Result<SweepReport> {
    require_nonresonant(config.alpha)?;
    let grid = FourierGrid::new(config.length, config.n)?;
    let initial = config.data.build(&grid, config.alpha, config.seed)?;
    let mut strang = StrangConfig::new(config.dt, usize::MAX);
    strang.nonlinear = config.nonlinear;
    let traj = strang_evolve(&initial, config.window, strang, |_| {})?;
    let start = &traj.samples()[0];
    let end = traj.last().expect("trajectory keeps its first sample");

    let records = config
        .cutoffs
        .par_iter()
        .map(|&cutoff| -> Result<SweepRecord> {
            let im = IMultiplier::new(cutoff, config.rho)?;
            let e2_0 = modified_mass_e2(start, &im);
            let e2_1 = modified_mass_e2(end, &im);
            let c0 = e3_correction(start, &im)?;
            let c1 = e3_correction(end, &im)?;
            let iu = apply_i_field(&start.u, &im).l2_norm();
            let iv = apply_i_field(&start.v, &im).l2_norm();
            let scale = iu * iu * iv;
            Ok(SweepRecord {
                cutoff,
                rho: config.rho,
                alpha: config.alpha,
                dt: config.dt,
                n: config.n,
                length: config.length,
                e2_increment: (e2_1 - e2_0).abs(),
                e3_increment: ((e2_1 + c1) - (e2_0 + c0)).abs(),
                e3_minus_e2: c0.abs(),
                e3_minus_e2_normalized: if scale > 0.0 { c0.abs() / scale } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let ns: Vec<f64> = records.iter().map(|r| r.cutoff).collect();
    let gamma_fit = fit_power_law(&ns, &records.iter().map(|r| r.e3_minus_e2_normalized).collect::<Vec<_>>()).ok();
    let beta_fit = fit_power_law(&ns, &records.iter().map(|r| r.e3_increment).collect::<Vec<_>>()).ok();
    Ok(SweepReport {
        records,
        gamma_fit,
        beta_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::mass;
    use crate::rng::seeded;
    use crate::spectral::{dyadic_blocks, Dyadic};
    use rand::Rng;
    use std::f64::consts::PI;

    fn im(n: f64, rho: f64) -> IMultiplier {
        IMultiplier::new(n, rho).unwrap()
    }

    #[test]
    fn branch_values() {
        let m = im(16.0, 0.5);
        assert_eq!(m.eval(0.0), 1.0);
        assert_eq!(m.eval(-16.0), 1.0);
        assert!((m.eval(64.0) - 0.5).abs() < 1e-15);
        assert!((m.eval(32.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m.eval(100.0) - (16.0f64 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(m.eval(-40.0), m.eval(40.0));
        assert!(IMultiplier::new(0.5, 0.5).is_err());
        assert!(IMultiplier::new(4.0, 0.0).is_err());
    }

    #[test]
    fn profile_is_smooth_and_nonincreasing() {
        for &rho in &[0.1, 0.5, 0.6] {
            let m = im(8.0, rho);
            let xs: Vec<f64> = (0..20_000).map(|i| i as f64 * 1e-3 * 2.0).collect();
            assert!(xs.windows(2).all(|w| m.eval(w[1]) <= m.eval(w[0])));
            // C¹ across the junctions: one-sided slopes agree
            for &x0 in &[8.0, 16.0] {
                let h = 1e-6;
                let left = (m.eval(x0) - m.eval(x0 - h)) / h;
                let right = (m.eval(x0 + h) - m.eval(x0)) / h;
                assert!((left - right).abs() < 1e-4, "rho {rho} at {x0}: {left} {right}");
            }
        }
    }

    #[test]
    fn log_derivative_bound_on_blend() {
        for &rho in &[0.25, 0.5] {
            let n = 16.0;
            let m = im(n, rho);
            let h = 1e-5;
            let worst = (1..1000)
                .map(|i| n * (1.0 + i as f64 / 1000.0))
                .map(|x| ((m.eval(x + h) - m.eval(x - h)) / (2.0 * h)).abs() * x / m.eval(x))
                .fold(0.0, f64::max);
            assert!(worst < 4.0 * rho, "rho {rho}: {worst}");
        }
    }

    /// `m(ξ)⟨ξ⟩^ρ` is non-decreasing up to `N` and quasi-monotone beyond:
    /// an exact ramp with the stated limits cannot be monotone on `[N, ∞)`
    /// because `(N/|ξ|)^ρ ⟨ξ⟩^ρ` itself decreases.
    #[test]
    fn weighted_profile_quasi_monotone() {
        let rho = 0.5;
        let n = 16.0;
        let m = im(n, rho);
        let f = |x: f64| m.eval(x) * (1.0 + x * x).powf(rho / 2.0);
        let xs: Vec<f64> = (0..4000).map(|i| (i as f64 * 0.002).exp() - 1.0).collect();
        let low: Vec<f64> = xs.iter().copied().filter(|&x| x <= n).collect();
        assert!(low.windows(2).all(|w| f(w[1]) >= f(w[0])));
        let mut running_max: f64 = 0.0;
        let mut worst: f64 = 1.0;
        for &x in &xs {
            running_max = running_max.max(f(x));
            worst = worst.max(running_max / f(x));
        }
        assert!(worst <= 2f64.powf(rho), "quasi-monotonicity constant {worst}");
    }

    fn state(grid: &FourierGrid, band: i64, amp: f64, alpha: f64, seed: u64) -> FieldPair {
        InitialData::Gaussian { band, s: 0.0, norm: amp }
            .build(grid, alpha, seed)
            .unwrap()
    }

    #[test]
    fn apply_i_properties() {
        let g = FourierGrid::new(2.0 * PI, 64).unwrap();
        let low = state(&g, 8, 1.0, 0.25, 1);
        let m = im(8.0, 0.5);
        assert_eq!(apply_i(&low, &m), low);
        let st = state(&g, 31, 1.0, 0.25, 2);
        let i_st = apply_i(&st, &m);
        assert!(i_st.u.l2_norm() <= st.u.l2_norm());
        for b in dyadic_blocks(&g) {
            let a = apply_i(&st, &m).u.dyadic_project(b);
            let mut p = st.clone();
            p.u = st.u.dyadic_project(b);
            assert_eq!(a, apply_i(&p, &m).u);
        }
        let _ = Dyadic::from_exponent(0);
    }

    #[test]
    fn e2_e3_reduce_to_mass() {
        let g = FourierGrid::new(2.0 * PI, 64).unwrap();
        let zero = FieldPair::zeros(&g, 0.25).unwrap();
        let m = im(8.0, 0.5);
        assert_eq!(modified_mass_e2(&zero, &m), 0.0);
        assert_eq!(modified_mass_e3(&zero, &m).unwrap(), 0.0);

        let low = state(&g, 8, 1.3, 0.25, 3);
        assert!((modified_mass_e2(&low, &m) - mass(&low)).abs() < 1e-13);
        assert_eq!(modified_mass_e3(&low, &m).unwrap(), modified_mass_e2(&low, &m));

        let full = state(&g, 31, 1.3, 0.25, 4);
        let big = im(64.0, 0.5);
        assert!((modified_mass_e2(&full, &big) - mass(&full)).abs() < 1e-13);
        assert_eq!(modified_mass_e3(&full, &big).unwrap(), modified_mass_e2(&full, &big));
    }

    #[test]
    fn sigma3_regime_and_values() {
        let m = im(8.0, 0.5);
        assert_eq!(sigma3_eval(&m, 0.25, 0.0, 0.0, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(sigma3_eval(&m, 0.25, 3.0, -5.0, 2.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(sigma3_eval(&m, 0.5, 1.0, -2.0, 1.0), Err(Error::Regime(_))));
        assert!(matches!(sigma3_multiplier(&m, 0.7), Err(Error::Regime(_))));
        assert!(matches!(r4_multipliers(&m, 0.5), Err(Error::Regime(_))));
        let s = sigma3_eval(&m, 0.25, 40.0, -30.0, -10.0).unwrap();
        let h = 1600.0 - 0.25 * 900.0 + 100.0;
        assert!((s.im - (m.eval_sq(40.0) - m.eval_sq(30.0)) / h).abs() < 1e-15);
        assert_eq!(s.re, 0.0);
    }

    /// Mean-value bound for σ₃ when the third frequency is small.
    #[test]
    fn sigma3_mean_value_bound() {
        let alpha = 0.25;
        let mut rng = seeded(11);
        for &n in &[8.0, 32.0] {
            let m = im(n, 0.5);
            let mut worst: f64 = 0.0;
            for _ in 0..10_000 {
                let x1: f64 = rng.gen_range(n..16.0 * n) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let x3: f64 = rng.gen_range(-n / 8.0..n / 8.0);
                if x3 == 0.0 {
                    continue;
                }
                let x2 = -x1 - x3;
                let s = sigma3_eval(&m, alpha, x1, x2, x3).unwrap().norm();
                let ratio = s * h3(alpha, x1, x2, x3) / (m.eval(x1) * m.eval(x2) * m.eval(x3) * x3.abs());
                worst = worst.max(ratio);
            }
            assert!(worst.is_finite() && worst < 1.0, "N {n}: {worst}");
        }
    }

    #[test]
    fn r4_numerators_vanish_below_cutoff_and_denominators_are_coercive() {
        let m = im(64.0, 0.5);
        let (p, s) = r4_multipliers(&m, 0.25).unwrap();
        assert_eq!(p.eval(&[3.0, -10.0, 4.0, 3.0]), Complex64::new(0.0, 0.0));
        assert_eq!(s.eval(&[3.0, -10.0, 4.0, 3.0]), Complex64::new(0.0, 0.0));
        assert_eq!(p.eval(&[0.0; 4]), Complex64::new(0.0, 0.0));

        let mut rng = seeded(12);
        let alpha = 0.25;
        let mut worst = f64::INFINITY;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let x4 = -(x[0] + x[1] + x[2]);
            let den = x[0] * x[0] - alpha * (x[1] + x4).powi(2) + x[2] * x[2];
            worst = worst.min(den / (x[1] * x[1]).max(x4 * x4).max(1e-300));
            assert!(den > 0.0);
        }
        assert!(worst > 0.0);
    }

    #[test]
    fn masked_multipliers_agree_inside_band() {
        let g = FourierGrid::new(2.0 * PI, 32).unwrap();
        let m = im(4.0, 0.5);
        let (p, s) = r4_multipliers(&m, 0.25).unwrap();
        let (pm, sm) = r4_multipliers_on(&m, 0.25, &g).unwrap();
        let t = [7.0, -3.0, 5.0, -9.0];
        assert!((p.eval(&t) - pm.eval(&t)).norm() < 1e-14);
        assert!((s.eval(&t) - sm.eval(&t)).norm() < 1e-14);
        let far = [-15.0, 15.0, 14.0, -14.0];
        assert_eq!(pm.eval(&far), Complex64::new(0.0, 0.0));
        let far2 = [-14.0, 15.0, -15.0, 14.0];
        assert_eq!(sm.eval(&far2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn residuals_of_zero_trajectory_vanish() {
        let g = FourierGrid::new(2.0 * PI, 32).unwrap();
        let zero = FieldPair::zeros(&g, 0.25).unwrap();
        let traj = strang_evolve(&zero, 0.04, StrangConfig::new(0.01, 1), |_| {}).unwrap();
        let m = im(4.0, 0.5);
        for which in [ModifiedMass::E2, ModifiedMass::E3] {
            let r = derivative_residuals(&traj, &m, which).unwrap();
            assert_eq!(r.len(), 3);
            assert!(r.iter().all(|p| p.residual == 0.0));
        }
        let short = strang_evolve(&zero, 0.01, StrangConfig::new(0.01, 1), |_| {}).unwrap();
        assert!(derivative_residuals(&short, &m, ModifiedMass::E2).is_err());
    }

    fn max_residual(st: &FieldPair, m: &IMultiplier, which: ModifiedMass, dt: f64, stride: usize, steps: usize) -> f64 {
        let traj = strang_evolve(st, dt * (stride * steps) as f64, StrangConfig::new(dt, stride), |_| {}).unwrap();
        derivative_residuals(&traj, m, which)
            .unwrap()
            .iter()
            .map(|p| p.residual)
            .fold(0.0, f64::max)
    }

    #[test]
    fn e2_identity_second_order() {
        let g = FourierGrid::new(2.0 * PI, 32).unwrap();
        let st = state(&g, 8, 3.0, 0.25, 5);
        let m = im(2.0, 0.5);
        let r1 = max_residual(&st, &m, ModifiedMass::E2, 2e-3, 5, 4);
        let r2 = max_residual(&st, &m, ModifiedMass::E2, 1e-3, 5, 4);
        let order = (r1 / r2).log2();
        assert!((1.7..2.5).contains(&order), "order {order} ({r1:e}, {r2:e})");
    }

    #[test]
    fn e3_identity_second_order() {
        let g = FourierGrid::new(2.0 * PI, 16).unwrap();
        let st = state(&g, 4, 3.0, 0.25, 6);
        let m = im(2.0, 0.5);
        // sample every step: with a coarser stride the difference-quotient and
        // splitting errors can cancel and mimic a higher order
        let r1 = max_residual(&st, &m, ModifiedMass::E3, 2e-3, 1, 8);
        let r2 = max_residual(&st, &m, ModifiedMass::E3, 1e-3, 1, 8);
        let order = (r1 / r2).log2();
        assert!((1.7..2.5).contains(&order), "order {order} ({r1:e}, {r2:e})");
    }

    #[test]
    fn sweep_linear_only_has_no_increments() {
        let cfg = SweepConfig {
            length: 2.0 * PI,
            n: 64,
            alpha: 0.25,
            rho: 0.5,
            cutoffs: vec![2.0, 4.0, 8.0],
            dt: 1e-2,
            window: 0.2,
            data: InitialData::Gaussian { band: 16, s: 0.0, norm: 1.0 },
            seed: 9,
            nonlinear: false,
        };
        let rep = almost_conservation_sweep(&cfg).unwrap();
        // the free flow preserves E₂; the cubic correction in E₃ rotates
        for r in &rep.records {
            assert!(r.e2_increment < 1e-12, "{r:?}");
        }
        let mut bad = cfg.clone();
        bad.alpha = 0.6;
        assert!(matches!(almost_conservation_sweep(&bad), Err(Error::Regime(_))));
    }
}
