//! Strang-split time integration of
//!
//! ```text
//! u_t = i u_xx   - i v ū
//! v_t = i α v_xx - i u²/2
//! ```
//!
//! The linear part is diagonal in Fourier space and applied exactly. The
//! quadratic part is advanced by classical RK4 on the Galerkin-truncated
//! system: every stage evaluates the products on the 3/2-padded grid and
//! projects back onto the resolved modes, so the discrete system conserves
//! mass and energy in the same hyperplane-sum form used by
//! [`crate::functionals`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::{complex_normal, LabRng};
use crate::spectral::{pointwise_product, FourierGrid, SpectralField, Weight};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// State `(u, v)` of the system at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: SpectralField,
    pub v: SpectralField,
    pub time: f64,
    alpha: f64,
}

impl FieldPair {
    pub fn new(u: SpectralField, v: SpectralField, alpha: f64) -> Result<Self> {
        u.same_grid(&v)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self {
            u,
            v,
            time: 0.0,
            alpha,
        })
    }

    pub fn zeros(grid: &FourierGrid, alpha: f64) -> Result<Self> {
        Self::new(SpectralField::zeros(grid), SpectralField::zeros(grid), alpha)
    }

    pub fn at_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &FourierGrid {
        self.u.grid()
    }

    fn with_fields(&self, u: SpectralField, v: SpectralField) -> Self {
        Self {
            u,
            v,
            time: self.time,
            alpha: self.alpha,
        }
    }

    /// Componentwise `self - other`, keeping `self.time`.
    pub fn difference(&self, other: &FieldPair) -> FieldPair {
        let m1 = Complex64::new(-1.0, 0.0);
        self.with_fields(self.u.axpy(m1, &other.u), self.v.axpy(m1, &other.v))
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Exact free evolution over time `t`:
/// `û ← e^{-itξ²} û`, `v̂ ← e^{-iαtξ²} v̂`.
pub fn linear_flow(state: &FieldPair, t: f64) -> FieldPair {
    let alpha = state.alpha;
    let u = state.u.map_diagonal(|xi| Complex64::from_polar(1.0, -t * xi * xi));
    let v = state
        .v
        .map_diagonal(|xi| Complex64::from_polar(1.0, -alpha * t * xi * xi));
    let mut out = state.with_fields(u, v);
    out.time = state.time + t;
    out
}

/// Dealiased right-hand side of the quadratic part: `(-i P(v ū), -i/2 P(u²))`.
fn nonlinear_rhs(u: &SpectralField, v: &SpectralField) -> (SpectralField, SpectralField) {
    let mut du = pointwise_product(v, u, |a, b| -I * a * b.conj());
    let mut dv = pointwise_product(u, u, |a, b| -0.5 * I * a * b);
    du.project_resolved();
    dv.project_resolved();
    (du, dv)
}

/// One classical RK4 step of length `dt` for the quadratic part alone.
pub fn nonlinear_substep(state: &FieldPair, dt: f64) -> FieldPair {
    let h = Complex64::new(dt, 0.0);
    let half = h * 0.5;
    let (u0, v0) = (&state.u, &state.v);
    let (k1u, k1v) = nonlinear_rhs(u0, v0);
    let (k2u, k2v) = nonlinear_rhs(&u0.axpy(half, &k1u), &v0.axpy(half, &k1v));
    let (k3u, k3v) = nonlinear_rhs(&u0.axpy(half, &k2u), &v0.axpy(half, &k2v));
    let (k4u, k4v) = nonlinear_rhs(&u0.axpy(h, &k3u), &v0.axpy(h, &k3v));
    let sixth = h / 6.0;
    let third = h / 3.0;
    let u = u0
        .axpy(sixth, &k1u)
        .axpy(third, &k2u)
        .axpy(third, &k3u)
        .axpy(sixth, &k4u);
    let v = v0
        .axpy(sixth, &k1v)
        .axpy(third, &k2v)
        .axpy(third, &k3v)
        .axpy(sixth, &k4v);
    let mut out = state.with_fields(u, v);
    out.u.project_resolved();
    out.v.project_resolved();
    out
}

/// Step size, sampling stride and whether the quadratic coupling is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrangConfig {
    pub dt: f64,
    /// Keep every `stride`-th step (the first and last states are always kept).
    pub stride: usize,
    pub nonlinear: bool,
}

impl StrangConfig {
    pub fn new(dt: f64, stride: usize) -> Self {
        Self {
            dt,
            stride: stride.max(1),
            nonlinear: true,
        }
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }
}

/// Sampled states of one run, in strictly increasing time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<FieldPair>,
    dt: f64,
    nonlinear: bool,
}

impl Trajectory {
    /// Assembles a trajectory from externally produced states.
    pub fn from_samples(samples: Vec<FieldPair>, dt: f64) -> Result<Self> {
        if samples.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::Parameter("sample times must increase strictly".into()));
        }
        Ok(Self {
            samples,
            dt,
            nonlinear: true,
        })
    }

    pub fn samples(&self) -> &[FieldPair] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Formal order of the splitting.
    pub fn order(&self) -> u32 {
        2
    }

    pub fn is_nonlinear(&self) -> bool {
        self.nonlinear
    }

    pub fn last(&self) -> Option<&FieldPair> {
        self.samples.last()
    }

    /// The stored sample at time `t`.
    pub fn state_at(&self, t: f64) -> Result<&FieldPair> {
        let tol = 1e-6 * self.dt.max(f64::MIN_POSITIVE);
        self.samples
            .iter()
            .find(|s| (s.time - t).abs() <= tol)
            .ok_or(Error::OutsideTrajectory(t))
    }
}

/// Evolves `state` to `final_time` with half-linear / nonlinear / half-linear
/// steps of size `config.dt`. `observer` sees every stored sample.
///
/// Aborts when the state stops being finite or `‖u‖` exceeds 10⁶ times its
/// initial value.
pub fn strang_evolve(
    state: &FieldPair,
    final_time: f64,
    config: StrangConfig,
    mut observer: impl FnMut(&FieldPair),
) -> Result<Trajectory> {
    let dt = config.dt;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if !(final_time >= 0.0) {
        return Err(Error::Parameter(format!("final time must be >= 0, got {final_time}")));
    }
    let steps = ((final_time / dt) - 1e-9).ceil().max(0.0) as usize;
    let t0 = state.time;
    let guard = 1e6 * state.u.l2_norm();
    let mut current = state.clone();
    let mut samples = vec![current.clone()];
    observer(&current);
    for step in 1..=steps {
        current = linear_flow(&current, 0.5 * dt);
        if config.nonlinear {
            current = nonlinear_substep(&current, dt);
        }
        current = linear_flow(&current, 0.5 * dt);
        current.time = t0 + step as f64 * dt;

        if !current.is_finite() {
            return Err(Error::BlowUp {
                time: current.time,
                reason: "non-finite coefficients (instability or blow-up)".into(),
            });
        }
        if guard > 0.0 && current.u.l2_norm() > guard {
            return Err(Error::BlowUp {
                time: current.time,
                reason: "‖u‖ exceeded 1e6 times its initial value".into(),
            });
        }
        if step % config.stride == 0 || step == steps {
            observer(&current);
            samples.push(current.clone());
        }
    }
    Ok(Trajectory {
        samples,
        dt,
        nonlinear: config.nonlinear,
    })
}

/// Splits the state at time `t` into the free evolution of the time-`reference`
/// data and the Duhamel remainder. Both times must be stored samples.
pub fn linear_nonlinear_split(
    trajectory: &Trajectory,
    reference: f64,
    t: f64,
) -> Result<(FieldPair, FieldPair)> {
    if t < reference {
        return Err(Error::Parameter(format!(
            "split time {t} precedes reference time {reference}"
        )));
    }
    let base = trajectory.state_at(reference)?;
    let full = trajectory.state_at(t)?;
    let linear = linear_flow(base, full.time - base.time);
    let nonlinear = full.difference(&linear);
    Ok((linear, nonlinear))
}

/// Complex Gaussian coefficients on `1 <= |k| <= kmax` (and `k = 0`), zero
/// elsewhere, rescaled so that the inhomogeneous `H^s` norm equals `norm`.
pub fn gaussian_data(grid: &FourierGrid, kmax: i64, s: f64, norm: f64, rng: &mut LabRng) -> SpectralField {
    let kmax = kmax.min(grid.kmax());
    let mut f = SpectralField::from_modes(grid, |k| {
        if k.abs() <= kmax && grid.is_resolved(k) {
            complex_normal(rng)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    normalize(&mut f, s, norm);
    f
}

/// Deterministic power-law spectrum `⟨ξ⟩^{-decay}` on `|k| <= kmax`, with
/// optional random phases, rescaled to `‖f‖_{H^s} = norm`.
pub fn power_law_data(
    grid: &FourierGrid,
    kmax: i64,
    decay: f64,
    s: f64,
    norm: f64,
    phases: Option<&mut LabRng>,
) -> SpectralField {
    let kmax = kmax.min(grid.kmax());
    let mut phase_rng = phases;
    let mut f = SpectralField::from_modes(grid, |k| {
        let xi = grid.frequency_of_mode(k);
        let amp = (1.0 + xi * xi).powf(-0.5 * decay);
        // draw for every mode so the stream does not depend on kmax
        let phase = match phase_rng.as_deref_mut() {
            Some(r) => {
                let z = complex_normal(r);
                z / z.norm()
            }
            None => Complex64::new(1.0, 0.0),
        };
        if k.abs() <= kmax {
            phase * amp
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    normalize(&mut f, s, norm);
    f
}

/// Recipe for the initial pair `(u₀, v₀)`; both components get the same
/// spectral shape and independent randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// [`gaussian_data`] on `|k| <= band`.
    Gaussian { band: i64, s: f64, norm: f64 },
    /// [`power_law_data`] on `|k| <= band`, with random phases if requested.
    PowerLaw {
        band: i64,
        decay: f64,
        s: f64,
        norm: f64,
        random_phases: bool,
    },
}

impl InitialData {
    pub fn build(&self, grid: &FourierGrid, alpha: f64, seed: u64) -> Result<FieldPair> {
        let mut rng = crate::rng::seeded(seed);
        let (u, v) = match *self {
            InitialData::Gaussian { band, s, norm } => {
                let u = gaussian_data(grid, band, s, norm, &mut rng);
                let v = gaussian_data(grid, band, s, norm, &mut rng);
                (u, v)
            }
            InitialData::PowerLaw {
                band,
                decay,
                s,
                norm,
                random_phases,
            } => {
                if random_phases {
                    let u = power_law_data(grid, band, decay, s, norm, Some(&mut rng));
                    let v = power_law_data(grid, band, decay, s, norm, Some(&mut rng));
                    (u, v)
                } else {
                    let u = power_law_data(grid, band, decay, s, norm, None);
                    let v = power_law_data(grid, band, decay, s, norm, None);
                    (u, v)
                }
            }
        };
        FieldPair::new(u, v, alpha)
    }
}

/// Final-state differences `‖S_h(T) − S_{h/2}(T)‖` for `h = dt, dt/2, …`
/// (`levels` halvings), as `(h, difference)` pairs.
pub fn self_convergence(state: &FieldPair, final_time: f64, dt: f64, levels: usize) -> Result<Vec<(f64, f64)>> {
    let finals = (0..=levels)
        .map(|l| {
            let h = dt / (1usize << l) as f64;
            let traj = strang_evolve(state, final_time, StrangConfig::new(h, usize::MAX), |_| {})?;
            Ok(traj.last().expect("trajectory keeps its first sample").clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finals
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let d = w[0].difference(&w[1]);
            let h = dt / (1usize << l) as f64;
            (h, (d.u.l2_norm_sq() + d.v.l2_norm_sq()).sqrt())
        })
        .collect())
}

/// Observed orders `log₂(e_l / e_{l+1})` of consecutive differences.
pub fn observed_orders(differences: &[(f64, f64)]) -> Vec<f64> {
    differences.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect()
}

fn normalize(f: &mut SpectralField, s: f64, norm: f64) {
    let current = f.weighted_norm(s, Weight::Inhomogeneous);
    if current > 0.0 {
        let a = norm / current;
        for c in f.coeffs_mut() {
            *c *= a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::mass;
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn grid() -> FourierGrid {
        FourierGrid::new(2.0 * PI, 64).unwrap()
    }

    fn small_state(amp: f64, seed: u64, alpha: f64) -> FieldPair {
        let g = grid();
        let mut rng = seeded(seed);
        let u = gaussian_data(&g, 8, 0.0, amp, &mut rng);
        let v = gaussian_data(&g, 8, 0.0, amp, &mut rng);
        FieldPair::new(u, v, alpha).unwrap()
    }

    #[test]
    fn rejects_bad_alpha_and_grids() {
        let g = grid();
        assert!(FieldPair::zeros(&g, 1.0).is_err());
        assert!(FieldPair::zeros(&g, 0.0).is_err());
        let other = FourierGrid::new(1.0, 64).unwrap();
        assert!(FieldPair::new(SpectralField::zeros(&g), SpectralField::zeros(&other), 0.3).is_err());
    }

    #[test]
    fn linear_flow_single_mode_phase() {
        let g = grid();
        let u = SpectralField::from_modes(&g, |k| if k == 2 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        let st = FieldPair::new(u, SpectralField::zeros(&g), 0.25).unwrap();
        let t = 0.37;
        let out = linear_flow(&st, t);
        let c = out.u.at_mode(2);
        assert!((c - Complex64::from_polar(1.0, -4.0 * t)).norm() < 1e-15);
        assert_eq!(linear_flow(&st, 0.0).u, st.u);
    }

    #[test]
    fn linear_flow_is_isometry() {
        let st = small_state(1.0, 1, 0.4);
        let out = linear_flow(&st, 3.21);
        assert!((out.u.l2_norm() - st.u.l2_norm()).abs() < 1e-13 * st.u.l2_norm());
        assert!((out.v.l2_norm() - st.v.l2_norm()).abs() < 1e-13 * st.v.l2_norm());
        assert!((mass(&out) - mass(&st)).abs() < 1e-13);
    }

    #[test]
    fn zero_state_stays_zero() {
        let st = FieldPair::zeros(&grid(), 0.3).unwrap();
        assert_eq!(nonlinear_substep(&st, 0.1).u, st.u);
        let traj = strang_evolve(&st, 0.5, StrangConfig::new(0.01, 10), |_| {}).unwrap();
        for s in traj.samples() {
            assert!(s.u.l2_norm() == 0.0 && s.v.l2_norm() == 0.0);
        }
    }

    /// Constant fields only occupy mode 0, where the Galerkin system is the
    /// pointwise ODE; its density ½|u|² + |v|² is conserved exactly, so RK4
    /// drift must scale like dt⁵.
    #[test]
    fn rk4_density_drift_is_fifth_order() {
        let g = grid();
        let l = g.length();
        let c = Complex64::new(0.8, 0.3);
        let d = Complex64::new(-0.2, 0.5);
        let st = FieldPair::new(
            SpectralField::from_modes(&g, |k| if k == 0 { c * l } else { Complex64::new(0.0, 0.0) }),
            SpectralField::from_modes(&g, |k| if k == 0 { d * l } else { Complex64::new(0.0, 0.0) }),
            0.3,
        )
        .unwrap();
        let density = |s: &FieldPair| {
            let u = s.u.at_mode(0) / l;
            let v = s.v.at_mode(0) / l;
            0.5 * u.norm_sqr() + v.norm_sqr()
        };
        let d0 = density(&st);
        let drift = |dt: f64| (density(&nonlinear_substep(&st, dt)) - d0).abs();
        let (a, b) = (drift(0.1), drift(0.05));
        let order = (a / b).log2();
        assert!(order > 4.5, "order {order}, drifts {a:e} {b:e}");

        // agreement with a 100x finer RK4 integration
        let mut fine = st.clone();
        for _ in 0..100 {
            fine = nonlinear_substep(&fine, 0.001);
        }
        let coarse = nonlinear_substep(&st, 0.1);
        let err = (coarse.v.at_mode(0) - fine.v.at_mode(0)).norm() / l;
        assert!(err < 1e-5, "err {err:e}");
    }

    #[test]
    fn constant_u_seeds_v_at_second_order() {
        let g = grid();
        let l = g.length();
        let c = Complex64::new(0.6, -0.4);
        let st = FieldPair::new(
            SpectralField::from_modes(&g, |k| if k == 0 { c * l } else { Complex64::new(0.0, 0.0) }),
            SpectralField::zeros(&g),
            0.3,
        )
        .unwrap();
        for &dt in &[0.1, 0.05, 0.025] {
            let v = nonlinear_substep(&st, dt).v.at_mode(0) / l;
            let lead = -I * c * c * dt * 0.5;
            let err = (v - lead).norm();
            assert!(err < 0.2 * dt.powi(3), "dt {dt}: {err:e}");
        }
    }

    #[test]
    fn small_data_tracks_linear_flow() {
        // deviation from the free flow is quadratic in the amplitude
        let dev = |eps: f64| {
            let st = small_state(eps, 4, 0.3);
            let traj = strang_evolve(&st, 1.0, StrangConfig::new(1e-2, 10), |_| {}).unwrap();
            traj.samples()
                .iter()
                .map(|s| {
                    let lin = linear_flow(&st, s.time);
                    s.difference(&lin).u.l2_norm() + s.difference(&lin).v.l2_norm()
                })
                .fold(0.0, f64::max)
        };
        let (a, b) = (dev(1e-2), dev(5e-3));
        let ratio = a / b;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn final_time_and_sampling() {
        let st = small_state(0.1, 2, 0.3);
        let mut seen = 0;
        let traj = strang_evolve(&st, 0.1, StrangConfig::new(0.003, 5), |_| seen += 1).unwrap();
        let last = traj.last().unwrap().time;
        assert!(last >= 0.1 - 1e-12 && last < 0.1 + 0.003);
        assert_eq!(seen, traj.samples().len());
        assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn blow_up_guard_fires() {
        let g = grid();
        let mut rng = seeded(3);
        let u = gaussian_data(&g, 8, 0.0, 1e3, &mut rng);
        let v = gaussian_data(&g, 8, 0.0, 1e3, &mut rng);
        let st = FieldPair::new(u, v, 0.3).unwrap();
        let res = strang_evolve(&st, 10.0, StrangConfig::new(0.5, 1), |_| {});
        assert!(matches!(res, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn split_identities() {
        let st = small_state(0.5, 5, 0.3);
        let traj = strang_evolve(&st, 0.2, StrangConfig::new(1e-3, 20), |_| {}).unwrap();
        let t_ref = traj.samples()[2].time;
        let (lin, nl) = linear_nonlinear_split(&traj, t_ref, t_ref).unwrap();
        assert_eq!(nl.u.l2_norm() + nl.v.l2_norm(), 0.0);
        assert_eq!(lin.u, traj.samples()[2].u);

        let t = traj.samples()[6].time;
        let (lin, nl) = linear_nonlinear_split(&traj, t_ref, t).unwrap();
        let full = traj.state_at(t).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert!(lin.u.axpy(one, &nl.u).axpy(-one, &full.u).l2_norm() < 1e-14);

        assert!(matches!(
            linear_nonlinear_split(&traj, t_ref, 5.0),
            Err(Error::OutsideTrajectory(_))
        ));
        assert!(linear_nonlinear_split(&traj, t, t_ref).is_err());
    }

    #[test]
    fn split_of_linear_evolution_is_pure_linear() {
        let st = small_state(0.5, 6, 0.3);
        let traj = strang_evolve(&st, 0.5, StrangConfig::new(1e-2, 10).linear_only(), |_| {}).unwrap();
        let t = traj.last().unwrap().time;
        let (lin, nl) = linear_nonlinear_split(&traj, 0.0, t).unwrap();
        let full = traj.last().unwrap();
        assert!(nl.u.l2_norm() < 1e-12 * full.u.l2_norm());
        assert!(lin.difference(full).v.l2_norm() < 1e-12 * full.v.l2_norm());
    }

    #[test]
    fn duhamel_part_is_quadratic_in_amplitude() {
        let nl_norm = |eps: f64| {
            let st = small_state(eps, 7, 0.3);
            let traj = strang_evolve(&st, 0.4, StrangConfig::new(1e-3, 100), |_| {}).unwrap();
            let series: Vec<f64> = traj
                .times()
                .iter()
                .map(|&t| {
                    let (_, nl) = linear_nonlinear_split(&traj, 0.0, t).unwrap();
                    nl.u.l2_norm() + nl.v.l2_norm()
                })
                .collect();
            series
        };
        let a = nl_norm(1e-2);
        let b = nl_norm(5e-3);
        assert_eq!(a[0], 0.0);
        // grows from zero
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        let r = a.last().unwrap() / b.last().unwrap();
        assert!((r - 4.0).abs() < 0.1, "ratio {r}");
    }
}
