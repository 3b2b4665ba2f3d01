//! Samples on an axis-aligned `(τ, ξ)` lattice. Only practical for small
//! `N`; it serves as the reference for the sheared quadrature.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::sets::{Phase, SpaceTimeSet};
use crate::error::{Error, Result};

/// Samples `f(τ₀ + i dτ, ξ₀ + j dξ)` for `i < n_tau`, `j < n_xi`, stored
/// row-major in `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub tau0: f64,
    pub xi0: f64,
    pub dtau: f64,
    pub dxi: f64,
    n_tau: usize,
    n_xi: usize,
    data: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn zeros(tau0: f64, xi0: f64, dtau: f64, dxi: f64, n_tau: usize, n_xi: usize) -> Result<Self> {
        if !(dtau > 0.0 && dxi > 0.0) || n_tau == 0 || n_xi == 0 {
            return Err(Error::Parameter("space-time grid needs positive steps and sizes".into()));
        }
        Ok(Self {
            tau0,
            xi0,
            dtau,
            dxi,
            n_tau,
            n_xi,
            data: vec![Complex64::new(0.0, 0.0); n_tau * n_xi],
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_tau, self.n_xi)
    }

    pub fn tau(&self, i: usize) -> f64 {
        self.tau0 + i as f64 * self.dtau
    }

    pub fn xi(&self, j: usize) -> f64 {
        self.xi0 + j as f64 * self.dxi
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n_xi + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.n_xi + j] = value;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    /// Indicator of `set` sampled at the nodes of a lattice with steps
    /// `(dtau, dxi)` aligned to the origin and covering the bounding box.
    /// Requires at least 8 nodes across the frequency width and across the
    /// narrowest modulation band.
    pub fn rasterize(set: &SpaceTimeSet, dtau: f64, dxi: f64) -> Result<Self> {
        check_resolution(set, dtau, dxi)?;
        let (tlo, thi, xlo, xhi) = set.bounding_box();
        let i0 = (tlo / dtau).floor() as i64;
        let i1 = (thi / dtau).ceil() as i64;
        let j0 = (xlo / dxi).floor() as i64;
        let j1 = (xhi / dxi).ceil() as i64;
        let mut f = Self::zeros(
            i0 as f64 * dtau,
            j0 as f64 * dxi,
            dtau,
            dxi,
            (i1 - i0 + 1) as usize,
            (j1 - j0 + 1) as usize,
        )?;
        for i in 0..f.n_tau {
            for j in 0..f.n_xi {
                if set.contains(f.tau(i), f.xi(j)) {
                    f.set(i, j, Complex64::new(1.0, 0.0));
                }
            }
        }
        Ok(f)
    }

    /// `(Σ ⟨ξ⟩^{2s} ⟨τ − φ(ξ)⟩^{2b} |f|² dτ dξ)^{1/2}`.
    pub fn xsb_norm(&self, s: f64, b: f64, phase: Phase) -> f64 {
        self.weighted_l2(|tau, xi| bracket(xi).powf(2.0 * s) * bracket(tau - phase.at(xi)).powf(2.0 * b))
    }

    /// `(Σ w(τ, ξ) |f|² dτ dξ)^{1/2}`.
    pub fn weighted_l2(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n_tau {
            for j in 0..self.n_xi {
                let v = self.get(i, j);
                if v.norm_sqr() > 0.0 {
                    acc += w(self.tau(i), self.xi(j)) * v.norm_sqr();
                }
            }
        }
        (acc * self.dtau * self.dxi).sqrt()
    }

    /// Riemann-sum convolution `Σ f(q) g(p − q) dτ dξ`, computed with
    /// zero-padded FFTs. Both fields must share the lattice steps.
    pub fn convolve(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_steps(other)?;
        let (nt, nx) = (self.n_tau + other.n_tau - 1, self.n_xi + other.n_xi - 1);
        let (pt, px) = (nt.next_power_of_two(), nx.next_power_of_two());
        let mut a = pad(self, pt, px);
        let mut b = pad(other, pt, px);
        let mut planner = FftPlanner::<f64>::new();
        fft2(&mut a, pt, px, &mut planner, false);
        fft2(&mut b, pt, px, &mut planner, false);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        fft2(&mut a, pt, px, &mut planner, true);
        let scale = self.dtau * self.dxi / (pt * px) as f64;
        let mut out = Self::zeros(self.tau0 + other.tau0, self.xi0 + other.xi0, self.dtau, self.dxi, nt, nx)?;
        for i in 0..nt {
            for j in 0..nx {
                out.set(i, j, a[i * px + j] * scale);
            }
        }
        Ok(out)
    }

    /// The same convolution by the direct double sum.
    pub fn convolve_direct(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_steps(other)?;
        let (nt, nx) = (self.n_tau + other.n_tau - 1, self.n_xi + other.n_xi - 1);
        let mut out = Self::zeros(self.tau0 + other.tau0, self.xi0 + other.xi0, self.dtau, self.dxi, nt, nx)?;
        for i1 in 0..self.n_tau {
            for j1 in 0..self.n_xi {
                let f = self.get(i1, j1);
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for i2 in 0..other.n_tau {
                    for j2 in 0..other.n_xi {
                        let k = (i1 + i2) * nx + j1 + j2;
                        out.data[k] += f * other.get(i2, j2);
                    }
                }
            }
        }
        for v in &mut out.data {
            *v *= self.dtau * self.dxi;
        }
        Ok(out)
    }

    fn check_steps(&self, other: &SpaceTimeField) -> Result<()> {
        if (self.dtau - other.dtau).abs() > 1e-12 * self.dtau || (self.dxi - other.dxi).abs() > 1e-12 * self.dxi {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

pub(crate) fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

pub(crate) fn check_resolution(set: &SpaceTimeSet, dtau: f64, dxi: f64) -> Result<()> {
    let need_xi = set.xi_width() / 8.0;
    let need_tau = set.min_band_width() / 8.0;
    if dxi > need_xi || dtau > need_tau {
        return Err(Error::Resolution(format!(
            "need dξ <= {need_xi:.3e} and dτ <= {need_tau:.3e} (8 samples per width), got dξ = {dxi:.3e}, dτ = {dtau:.3e}"
        )));
    }
    Ok(())
}

fn pad(f: &SpaceTimeField, pt: usize, px: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); pt * px];
    for i in 0..f.n_tau {
        out[i * px..i * px + f.n_xi].copy_from_slice(&f.data[i * f.n_xi..(i + 1) * f.n_xi]);
    }
    out
}

fn fft2(data: &mut [Complex64], rows: usize, cols: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let row_plan = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    for row in data.chunks_mut(cols) {
        row_plan.process(row);
    }
    let col_plan = if inverse { planner.plan_fft_inverse(rows) } else { planner.plan_fft_forward(rows) };
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for j in 0..cols {
        for i in 0..rows {
            column[i] = data[i * cols + j];
        }
        col_plan.process(&mut column);
        for i in 0..rows {
            data[i * cols + j] = column[i];
        }
    }
}
