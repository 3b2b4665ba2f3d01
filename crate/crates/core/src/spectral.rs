//! Periodic Fourier grid and spectral fields.
//!
//! The real line is approximated by a torus of length `L` sampled at `n`
//! points `x_j = -L/2 + j dx`. Spectral coefficients are stored in natural
//! order, index `i` holding mode `k = i - n/2`, i.e. frequency `ξ_k = 2πk/L`.
//!
//! Normalisation: the forward transform carries the `dx` weight,
//! `f̂(ξ_k) = dx Σ_j f(x_j) e^{-i x_j ξ_k}`, and the inverse carries
//! `dξ/2π = 1/L`. With this choice
//! `dx Σ|f(x_j)|² = (dξ/2π) Σ|f̂(ξ_k)|²` holds exactly.
//!
//! The Nyquist mode `k = -n/2` has no partner `+n/2`, so it is not a resolved
//! frequency: conjugation and the hyperplane sums of [`crate::functionals`]
//! ignore it and the evolution keeps it at zero.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded_forward: Arc<dyn Fft<f64>>,
    padded_inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid of `n` points on a box of length `L`.
#[derive(Clone)]
pub struct FourierGrid {
    length: f64,
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid")
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for FourierGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl FourierGrid {
    /// Builds a grid; `n` must be a power of two no smaller than 8 and `L > 0`.
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Grid(format!("box length must be positive, got {length}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "mode count must be a power of two >= 8, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let padded = 3 * n / 2;
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            padded_forward: planner.plan_fft_forward(padded),
            padded_inverse: planner.plan_fft_inverse(padded),
        };
        Ok(Self {
            length,
            n,
            plans: Arc::new(plans),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Quadrature weight of the hyperplane measure per free frequency, `dξ/2π`.
    pub fn measure(&self) -> f64 {
        1.0 / self.length
    }

    /// Integer mode number stored at natural-order index `idx`.
    pub fn mode(&self, idx: usize) -> i64 {
        idx as i64 - (self.n / 2) as i64
    }

    /// Natural-order index of mode `k`, if it is stored.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if (-half..half).contains(&k) {
            Some((k + half) as usize)
        } else {
            None
        }
    }

    /// Largest resolved mode number; resolved modes are `|k| <= kmax`.
    pub fn kmax(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    pub fn is_resolved(&self, k: i64) -> bool {
        k.abs() <= self.kmax()
    }

    pub fn frequency_of_mode(&self, k: i64) -> f64 {
        k as f64 * self.dxi()
    }

    pub fn frequency(&self, idx: usize) -> f64 {
        self.frequency_of_mode(self.mode(idx))
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.frequency(i)).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n)
            .map(|j| -0.5 * self.length + j as f64 * dx)
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Places natural-order coefficients onto an FFT buffer of length `m >= n`
/// (zero padding), applying the `(-1)^k` phase of the centred sample grid.
fn to_fft_order(grid: &FourierGrid, coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (idx, c) in coeffs.iter().enumerate() {
        let k = grid.mode(idx);
        buf[k.rem_euclid(m as i64) as usize] = c * parity(k);
    }
    buf
}

fn from_fft_order(grid: &FourierGrid, buf: &[Complex64], weight: f64) -> Vec<Complex64> {
    let m = buf.len() as i64;
    (0..grid.n())
        .map(|idx| {
            let k = grid.mode(idx);
            buf[k.rem_euclid(m) as usize] * (weight * parity(k))
        })
        .collect()
}

/// Direction of [`transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Physical samples to spectral coefficients.
    Forward,
    /// Spectral coefficients to physical samples.
    Inverse,
}

/// Transforms a length-`n` array in the given direction.
pub fn transform(grid: &FourierGrid, data: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    grid.check_len(data.len())?;
    match direction {
        Direction::Forward => Ok(SpectralField::from_samples(grid, data)?.coeffs),
        Direction::Inverse => Ok(SpectralField::from_coeffs(grid, data.to_vec())?.to_samples()),
    }
}

/// Which Sobolev weight [`SpectralField::weighted_norm`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// `⟨ξ⟩ = (1 + ξ²)^{1/2}`.
    Inhomogeneous,
    /// `|ξ|`; the zero mode is dropped when `s < 0`.
    Homogeneous,
}

/// A dyadic frequency scale `2^p`, `p >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dyadic(u32);

impl Dyadic {
    pub fn from_exponent(p: u32) -> Self {
        Dyadic(p)
    }

    /// Accepts only exact powers of two no smaller than one.
    pub fn new(value: f64) -> Result<Self> {
        if value >= 1.0 && value.is_finite() {
            let p = value.log2().round();
            if (2f64.powf(p) - value).abs() <= 1e-12 * value {
                return Ok(Dyadic(p as u32));
            }
        }
        Err(Error::Parameter(format!("{value} is not a dyadic number >= 1")))
    }

    pub fn exponent(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        2f64.powi(self.0 as i32)
    }

    /// Whether `|ξ|` falls in this block: `[N, 2N)`, or `[0, 2)` for `N = 1`.
    pub fn contains(self, xi: f64) -> bool {
        let a = xi.abs();
        let lo = if self.0 == 0 { 0.0 } else { self.value() };
        a >= lo && a < 2.0 * self.value()
    }
}

/// Dyadic blocks needed to cover every frequency of the grid.
pub fn dyadic_blocks(grid: &FourierGrid) -> Vec<Dyadic> {
    let max = grid.frequencies().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut out = vec![Dyadic(0)];
    while 2.0 * out.last().unwrap().value() <= max {
        let next = out.last().unwrap().0 + 1;
        out.push(Dyadic(next));
    }
    out
}

/// Spectral coefficients of one field on a [`FourierGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: FourierGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &FourierGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_coeffs(grid: &FourierGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.check_len(coeffs.len())?;
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Builds coefficients mode by mode from `f(k)`.
    pub fn from_modes(grid: &FourierGrid, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let coeffs = (0..grid.n()).map(|i| f(grid.mode(i))).collect();
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Forward transform of physical samples at the grid positions.
    pub fn from_samples(grid: &FourierGrid, samples: &[Complex64]) -> Result<Self> {
        grid.check_len(samples.len())?;
        let mut buf = samples.to_vec();
        grid.plans.forward.process(&mut buf);
        Ok(Self {
            grid: grid.clone(),
            coeffs: from_fft_order(grid, &buf, grid.dx()),
        })
    }

    /// Forward transform of samples on the 3/2-padded grid, truncated to the
    /// stored modes.
    pub(crate) fn from_padded_samples(grid: &FourierGrid, samples: &[Complex64]) -> Self {
        debug_assert_eq!(samples.len(), 3 * grid.n() / 2);
        let mut buf = samples.to_vec();
        grid.plans.padded_forward.process(&mut buf);
        let dx = grid.length() / buf.len() as f64;
        Self {
            grid: grid.clone(),
            coeffs: from_fft_order(grid, &buf, dx),
        }
    }

    /// Inverse transform to the grid positions.
    pub fn to_samples(&self) -> Vec<Complex64> {
        let mut buf = to_fft_order(&self.grid, &self.coeffs, self.grid.n());
        self.grid.plans.inverse.process(&mut buf);
        let w = 1.0 / self.grid.length();
        buf.iter().map(|z| z * w).collect()
    }

    /// Samples of the same trigonometric polynomial on the 3/2-padded grid.
    pub(crate) fn to_padded_samples(&self) -> Vec<Complex64> {
        let m = 3 * self.grid.n() / 2;
        let mut buf = to_fft_order(&self.grid, &self.coeffs, m);
        self.grid.plans.padded_inverse.process(&mut buf);
        let w = 1.0 / self.grid.length();
        buf.iter().map(|z| z * w).collect()
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `k`, zero when `k` is not stored.
    pub fn at_mode(&self, k: i64) -> Complex64 {
        self.grid
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Coefficient of the conjugate field at mode `k`: `conj(f̂(-k))`, and zero
    /// for the unresolved Nyquist mode.
    pub fn conj_at_mode(&self, k: i64) -> Complex64 {
        if self.grid.is_resolved(k) {
            self.at_mode(-k).conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Multiplies every coefficient by `m(ξ_k)`.
    pub fn map_diagonal(&self, mut m: impl FnMut(f64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(self.grid.frequency(i)))
            .collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + a * other`; panics on grid mismatch.
    pub fn axpy(&self, a: Complex64, other: &SpectralField) -> Self {
        assert_eq!(self.grid, other.grid, "axpy across grids");
        Self {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + a * y)
                .collect(),
        }
    }

    /// Zeroes the unresolved Nyquist mode.
    pub fn project_resolved(&mut self) {
        self.coeffs[0] = Complex64::new(0.0, 0.0);
    }

    /// `(dξ/2π) Σ f̂ ḡ`, equal to `∫ f ḡ dx`.
    pub fn inner(&self, other: &SpectralField) -> Result<Complex64> {
        self.same_grid(other)?;
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.measure())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.measure()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `‖∂ₓ f‖²`.
    pub fn derivative_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.frequency(i).powi(2) * c.norm_sqr())
            .sum::<f64>()
            * self.grid.measure()
    }

    /// `((dξ/2π) Σ w(ξ)^{2s} |f̂(ξ)|²)^{1/2}` with `w = ⟨ξ⟩` or `|ξ|`.
    pub fn weighted_norm(&self, s: f64, weight: Weight) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.frequency(i);
            let w = match weight {
                Weight::Inhomogeneous => (1.0 + xi * xi).powf(s),
                Weight::Homogeneous => {
                    if xi == 0.0 && s < 0.0 {
                        continue;
                    }
                    xi.abs().powf(2.0 * s)
                }
            };
            acc += w * c.norm_sqr();
        }
        (acc * self.grid.measure()).sqrt()
    }

    /// Keeps the modes of dyadic block `block` and zeroes the rest.
    pub fn dyadic_project(&self, block: Dyadic) -> Self {
        self.map_diagonal(|xi| {
            if block.contains(xi) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Spectrum of the pointwise product `f·g`, computed on the 3/2-padded grid so
/// that no quadratic aliasing reaches the stored modes.
pub fn convolve(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.same_grid(g)?;
    Ok(pointwise_product(f, g, |a, b| a * b))
}

/// Dealiased spectrum of `op(f(x), g(x))` for a bilinear pointwise `op`.
pub(crate) fn pointwise_product(
    f: &SpectralField,
    g: &SpectralField,
    op: impl Fn(Complex64, Complex64) -> Complex64,
) -> SpectralField {
    let fp = f.to_padded_samples();
    let gp = g.to_padded_samples();
    let prod: Vec<Complex64> = fp.iter().zip(&gp).map(|(a, b)| op(*a, *b)).collect();
    SpectralField::from_padded_samples(f.grid(), &prod)
}
