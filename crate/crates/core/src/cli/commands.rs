//! One function per subcommand: resolve parameters, call the library, write
//! the tables.

use std::path::Path;

use super::config::{parse_bool, parse_real, parse_real_list};
use super::output::{col, real, write_table, Column, WrittenFile};
use super::{parse_from_str, CertifyArgs, EvolveArgs, PlanArgs, ResonanceArgs, Resolver, SweepArgs};
use crate::certifier::{self, endpoint_check, endpoint_first_exceeding, CounterexampleRegime, Quadrature};
use crate::error::{Error, Result};
use crate::evolution::{observed_orders, self_convergence, strang_evolve, FieldPair, InitialData, StrangConfig};
use crate::functionals::{energy, mass};
use crate::imethod::{almost_conservation_sweep, SweepConfig};
use crate::planner::{choose_n_mid_alpha, choose_n_small_alpha, GwpPlan, Margins, Regime};
use crate::resonance::resonance_audit;
use crate::spectral::FourierGrid;

pub type CommandOutput = (Vec<WrittenFile>, Vec<(String, String)>, String);

pub const SIMULATE_COLUMNS: &[Column] = &[
    col("time", "sample time"),
    col("mass", "M = ||u||^2 + 2||v||^2"),
    col("energy", "H = ||u_x||^2 + alpha ||v_x||^2 + Re of the cubic coupling"),
    col("u_l2", "||u(t)||_L2"),
    col("v_l2", "||v(t)||_L2"),
];

pub const CONSERVE_COLUMNS: &[Column] = &[
    col("time", "sample time, increasing"),
    col("mass", "M(t)"),
    col("energy", "H(t)"),
    col("mass_drift", "|M(t) - M(0)| / |M(0)|"),
    col("energy_drift", "|H(t) - H(0)| / |H(0)|"),
];

pub const ORDER_COLUMNS: &[Column] = &[
    col("dt", "coarse step h of the pair (h, h/2)"),
    col("self_difference", "L2 distance of the final states computed with h and h/2"),
    col("observed_order", "log2 of the ratio of consecutive self differences"),
];

pub const SWEEP_COLUMNS: &[Column] = &[
    col("N", "cutoff of the multiplier I"),
    col("rho", "smoothing order of I"),
    col("alpha", "dispersion ratio"),
    col("dt", "time step"),
    col("n", "grid points"),
    col("L", "period"),
    col("e2_increment", "|E2(delta) - E2(0)|"),
    col("e3_increment", "|E3(delta) - E3(0)|"),
    col("e3_minus_e2", "|E3(0) - E2(0)|"),
    col("e3_minus_e2_normalized", "|E3(0) - E2(0)| / (||Iu0||^2 ||Iv0||)"),
];

pub const FIT_COLUMNS: &[Column] = &[
    col("quantity", "gamma (decay of e3_minus_e2_normalized) or increment_decay (decay of e3_increment)"),
    col("exponent", "minus the fitted log-log slope against N"),
    col("r_squared", "coefficient of determination of the fit"),
    col("points", "number of cutoffs used"),
];

pub const CERTIFY_COLUMNS: &[Column] = &[
    col("regime", "counterexample family"),
    col("alpha", "dispersion ratio"),
    col("s", "Sobolev index"),
    col("b", "modulation index"),
    col("N", "frequency scale"),
    col("xsb_u", "X^{s,b} norm of the first indicator, own phase"),
    col("xsb_v", "X_alpha^{s,b} norm of the second indicator, own phase"),
    col("conv_min", "minimum of the indicator convolution over the target set"),
    col("ratio", "||<xi>^s <tau - xi^2>^{b-1} (conv)|| / (xsb_u xsb_v)"),
    col("slope", "least-squares slope of log ratio against log N (same on every row)"),
];

pub const ENDPOINT_COLUMNS: &[Column] = &[
    col("m", "level"),
    col("endpoint_ratio", "a_m sum a_j / sum a_j^2 with a_j = 1/(1+j), a_m = 1"),
];

pub const RESONANCE_COLUMNS: &[Column] = &[
    col("check", "h3_factorization, h4_factorization, g_rewrites, tau_identity, h3_coercivity or h3_negative_fraction"),
    col("alpha", "dispersion ratio"),
    col("samples", "random hyperplane tuples"),
    col("max_rel_error", "largest relative discrepancy of an identity (0 for measurements)"),
    col("value", "coercivity constant min h3/sum xi^2, or fraction of negative h3 (0 for identities)"),
];

pub const PLAN_COLUMNS: &[Column] = &[
    col("regime", "small-alpha or mid-alpha"),
    col("rho", "smoothing order"),
    col("T0", "target time"),
    col("theta", "window exponent (mid-alpha; empty otherwise)"),
    col("beta", "decay exponent 2 min (3 - 2 rho) (small-alpha; empty otherwise)"),
    col("log2_N", "log2 of the chosen cutoff"),
    col("log2_lambda", "log2 of the scaling parameter"),
    col("log2_window", "log2 of the window length"),
    col("log2_iterations", "log2 of the number of windows"),
    col("slack", "exponent margin by which decay beats growth"),
];

fn usize_or_auto(s: &str) -> std::result::Result<Option<usize>, String> {
    if s.trim() == "auto" {
        Ok(None)
    } else {
        parse_from_str::<usize>(s).map(Some)
    }
}

struct Evolve {
    state: FieldPair,
    dt: f64,
    final_time: f64,
    stride: usize,
}

fn evolve_setup(a: &EvolveArgs, r: &mut Resolver) -> Result<Evolve> {
    let n: usize = r.value("n", &a.n, "256", parse_from_str)?;
    let length = r.value("L", &a.length, "32pi", parse_real)?;
    let alpha = r.value("alpha", &a.alpha, "0.25", parse_real)?;
    let dt = r.value("dt", &a.dt, "1e-3", parse_real)?;
    let final_time = r.value("T", &a.final_time, "1", parse_real)?;
    let stride: usize = r.value("stride", &a.stride, "10", parse_from_str)?;
    let amplitude = r.value("amplitude", &a.amplitude, "0.1", parse_real)?;
    let band = r.value("band", &a.band, "auto", usize_or_auto)?.unwrap_or(n / 8);
    let seed: u64 = r.value("seed", &a.seed, "0", parse_from_str)?;
    let grid = FourierGrid::new(length, n)?;
    let data = InitialData::Gaussian {
        band: band as i64,
        s: 0.0,
        norm: amplitude,
    };
    Ok(Evolve {
        state: data.build(&grid, alpha, seed)?,
        dt,
        final_time,
        stride,
    })
}

fn invariants(e: &Evolve) -> Result<Vec<(f64, f64, f64, f64, f64)>> {
    let traj = strang_evolve(&e.state, e.final_time, StrangConfig::new(e.dt, e.stride), |_| {})?;
    traj.samples()
        .iter()
        .map(|p| Ok((p.time, mass(p), energy(p)?, p.u.l2_norm(), p.v.l2_norm())))
        .collect()
}

pub fn simulate(a: &EvolveArgs, r: &mut Resolver, dir: &Path) -> Result<CommandOutput> {
    let e = evolve_setup(a, r)?;
    let rows = invariants(&e)?;
    let file = write_table(
        &dir.join("simulate.csv"),
        SIMULATE_COLUMNS,
        rows.iter().map(|&(t, m, h, u, v)| Ok(vec![real(t), real(m), real(h), real(u), real(v)])),
    )?;
    let report = format!("simulate: {} samples up to t = {}\n", file.rows, e.final_time);
    Ok((vec![file], Vec::new(), report))
}

pub fn conserve(a: &EvolveArgs, r: &mut Resolver, dir: &Path) -> Result<CommandOutput> {
    let e = evolve_setup(a, r)?;
    let rows = invariants(&e)?;
    let (m0, h0) = (rows[0].1, rows[0].2);
    let rel = |x: f64, x0: f64| (x - x0).abs() / x0.abs().max(f64::MIN_POSITIVE);
    let max_mass = rows.iter().map(|r| rel(r.1, m0)).fold(0.0, f64::max);
    let max_energy = rows.iter().map(|r| rel(r.2, h0)).fold(0.0, f64::max);
    let drift = write_table(
        &dir.join("conserve.csv"),
        CONSERVE_COLUMNS,
        rows.iter()
            .map(|&(t, m, h, _, _)| Ok(vec![real(t), real(m), real(h), real(rel(m, m0)), real(rel(h, h0))])),
    )?;

    let diffs = self_convergence(&e.state, e.final_time, e.dt, 2)?;
    let order = observed_orders(&diffs)[0];
    let conv = write_table(
        &dir.join("conserve_order.csv"),
        ORDER_COLUMNS,
        diffs.iter().map(|&(h, d)| Ok(vec![real(h), real(d), real(order)])),
    )?;
    let summary = vec![
        ("max_mass_drift".to_string(), real(max_mass)),
        ("max_energy_drift".to_string(), real(max_energy)),
        ("observed_order".to_string(), real(order)),
    ];
    let report = format!("conserve: max mass drift {max_mass:.3e}, max energy drift {max_energy:.3e}, observed order {order:.3}\n");
    Ok((vec![drift, conv], summary, report))
}

pub fn imethod_sweep(a: &SweepArgs, r: &mut Resolver, dir: &Path) -> Result<CommandOutput> {
    let n: usize = r.value("n", &a.n, "1024", parse_from_str)?;
    let length = r.value("L", &a.length, "2pi", parse_real)?;
    let alpha = r.value("alpha", &a.alpha, "0.25", parse_real)?;
    let rho = r.value("rho", &a.rho, "0.5", parse_real)?;
    let cutoffs = r.value("N", &a.cutoffs, "8,16,32,64", parse_real_list)?;
    let dt = r.value("dt", &a.dt, "1e-5", parse_real)?;
    let window = r.value("delta", &a.delta, "0.1", parse_real)?;
    let kind: String = r.value("data", &a.data, "power-law", parse_from_str)?;
    let decay = r.value("decay", &a.decay, "1", parse_real)?;
    let s = r.value("s", &a.s, "0", parse_real)?;
    let norm = r.value("amplitude", &a.amplitude, "1", parse_real)?;
    let band = r.value("band", &a.band, "auto", usize_or_auto)?.unwrap_or(n / 4) as i64;
    let linear = r.value("linear", &a.linear, "false", parse_bool)?;
    let seed: u64 = r.value("seed", &a.seed, "0", parse_from_str)?;
    let data = match kind.as_str() {
        "gaussian" => InitialData::Gaussian { band, s, norm },
        "power-law" => InitialData::PowerLaw {
            band,
            decay,
            s,
            norm,
            random_phases: true,
        },
        other => {
            return Err(Error::Config {
                location: "data".into(),
                message: format!("expected `gaussian` or `power-law`, got `{other}`"),
            })
        }
    };
    let report = almost_conservation_sweep(&SweepConfig {
        length,
        n,
        alpha,
        rho,
        cutoffs,
        dt,
        window,
        data,
        seed,
        nonlinear: !linear,
    })?;
    let sweep = write_table(
        &dir.join("imethod_sweep.csv"),
        SWEEP_COLUMNS,
        report.records.iter().map(|x| {
            Ok(vec![
                real(x.cutoff),
                real(x.rho),
                real(x.alpha),
                real(x.dt),
                x.n.to_string(),
                real(x.length),
                real(x.e2_increment),
                real(x.e3_increment),
                real(x.e3_minus_e2),
                real(x.e3_minus_e2_normalized),
            ])
        }),
    )?;
    let fits: Vec<(&str, _)> = [("gamma", report.gamma_fit), ("increment_decay", report.beta_fit)]
        .into_iter()
        .filter_map(|(q, f)| f.map(|f| (q, f)))
        .collect();
    let fit = write_table(
        &dir.join("imethod_fit.csv"),
        FIT_COLUMNS,
        fits.iter()
            .map(|(q, f)| Ok(vec![q.to_string(), real(-f.slope), real(f.r_squared), f.points.to_string()])),
    )?;
    let mut text = String::from("imethod-sweep:\n");
    let mut summary = Vec::new();
    for (q, f) in &fits {
        text.push_str(&format!("  {q:<16} exponent {:>8.4}  R^2 {:.4}\n", -f.slope, f.r_squared));
        summary.push((q.to_string(), real(-f.slope)));
    }
    Ok((vec![sweep, fit], summary, text))
}

fn parse_regime(s: &str) -> std::result::Result<String, String> {
    match s.trim() {
        r @ ("alpha-half" | "alpha-mid" | "alpha-small" | "alpha-small-endpoint") => Ok(r.to_string()),
        other => Err(format!(
            "expected alpha-half, alpha-mid, alpha-small or alpha-small-endpoint, got `{other}`"
        )),
    }
}

pub fn certify(a: &CertifyArgs, r: &mut Resolver, dir: &Path) -> Result<CommandOutput> {
    let name = r.value("regime", &a.regime, "alpha-half", parse_regime)?;
    let regime = match name.as_str() {
        "alpha-half" => CounterexampleRegime::AlphaHalf {
            beta: r.value("beta", &a.beta, "0", parse_real)?,
        },
        "alpha-mid" => CounterexampleRegime::AlphaMid {
            alpha: r.value("alpha", &a.alpha, "0.625", parse_real)?,
        },
        "alpha-small" => CounterexampleRegime::AlphaSmall {
            alpha: r.value("alpha", &a.alpha, "0.25", parse_real)?,
            c: r.value("C", &a.c, "4", parse_real)?,
        },
        _ => CounterexampleRegime::AlphaSmallEndpoint {
            alpha: r.value("alpha", &a.alpha, "0.25", parse_real)?,
            m: r.value("m", &a.m, "1", parse_from_str)?,
        },
    };
    let s = r.value("s", &a.s, "-0.25", parse_real)?;
    let b = r.value("b", &a.b, "0.5", parse_real)?;
    let ns = r.value("N", &a.ns, "64,128,256,512,1024", parse_real_list)?;
    let panels: usize = r.value("panels", &a.panels, "16", parse_from_str)?;
    let sweep = certifier::ratio_sweep(regime, s, b, &ns, Quadrature::new(panels))?;
    let slope = sweep.slope();
    let mut files = vec![write_table(
        &dir.join("certify.csv"),
        CERTIFY_COLUMNS,
        sweep.records.iter().map(|x| {
            Ok(vec![
                x.regime.to_string(),
                real(x.alpha),
                real(x.s),
                real(x.b),
                real(x.n),
                real(x.xsb_u),
                real(x.xsb_v),
                real(x.conv_min),
                real(x.ratio),
                real(slope),
            ])
        }),
    )?];
    let mut summary = vec![
        ("slope".to_string(), real(slope)),
        ("r_squared".to_string(), real(sweep.fit.r_squared)),
    ];
    let mut report = format!("certify {}: slope {slope:.4} (R^2 {:.4})\n", regime.label(), sweep.fit.r_squared);
    if let CounterexampleRegime::AlphaSmallEndpoint { .. } = regime {
        let levels: Vec<u64> = (0..=20).map(|k| 1u64 << k).collect();
        files.push(write_table(
            &dir.join("endpoint.csv"),
            ENDPOINT_COLUMNS,
            levels.iter().map(|&m| Ok(vec![m.to_string(), real(endpoint_check(m))])),
        )?);
        let first = endpoint_first_exceeding(5.0, 1_000_000);
        let shown = first.map(|m| m.to_string()).unwrap_or_else(|| "none".into());
        summary.push(("first_m_ratio_above_5".to_string(), shown.clone()));
        report.push_str(&format!("endpoint ratio first exceeds 5 at m = {shown}\n"));
    }
    Ok((files, summary, report))
}

pub fn resonance_check(a: &ResonanceArgs, r: &mut Resolver, dir: &Path) -> Result<CommandOutput> {
    let alphas = r.value("alpha", &a.alpha, "0.25,0.5,0.625", parse_real_list)?;
    let samples: usize = r.value("samples", &a.samples, "10000", parse_from_str)?;
    let seed: u64 = r.value("seed", &a.seed, "0", parse_from_str)?;
    let mut rows = Vec::new();
    for &alpha in &alphas {
        rows.extend(resonance_audit(alpha, samples, seed)?);
    }
    let file = write_table(
        &dir.join("resonance.csv"),
        RESONANCE_COLUMNS,
        rows.iter().map(|x| {
            Ok(vec![
                x.check.to_string(),
                real(x.alpha),
                x.samples.to_string(),
                real(x.max_rel_error),
                real(x.value),
            ])
        }),
    )?;
    let mut report = String::from("resonance-check:\n");
    for x in &rows {
        report.push_str(&format!(
            "  alpha {:<6} {:<22} max rel error {:.2e}  value {:.6}\n",
            x.alpha, x.check, x.max_rel_error, x.value
        ));
    }
    Ok((vec![file], Vec::new(), report))
}

fn parse_plan_regime(s: &str) -> std::result::Result<Regime, String> {
    match s.trim() {
        "small-alpha" => Ok(Regime::SmallAlpha),
        "mid-alpha" => Ok(Regime::MidAlpha),
        other => Err(format!("expected small-alpha or mid-alpha, got `{other}`")),
    }
}

pub fn plan(a: &PlanArgs, r: &mut Resolver, dir: &Path) -> Result<CommandOutput> {
    let regime = r.value("regime", &a.regime, "small-alpha", parse_plan_regime)?;
    let default_rho = if regime == Regime::SmallAlpha { "0.5" } else { "0.2" };
    let rho = r.value("rho", &a.rho, default_rho, parse_real)?;
    let t0 = r.value("T0", &a.t0, "10", parse_real)?;
    let d = Margins::default();
    let margins = Margins {
        eps: r.value("eps", &a.eps, &d.eps.to_string(), parse_real)?,
        eps_prime: r.value("eps_prime", &a.eps_prime, &d.eps_prime.to_string(), parse_real)?,
        eps_second: r.value("eps_second", &a.eps_second, &d.eps_second.to_string(), parse_real)?,
        margin: r.value("margin", &a.margin, &d.margin.to_string(), parse_real)?,
        delta: r.value("delta", &a.delta, &d.delta.to_string(), parse_real)?,
        budget_constant: r.value("C", &a.c, &d.budget_constant.to_string(), parse_real)?,
        eps0: r.value("eps0", &a.eps0, &d.eps0.to_string(), parse_real)?,
    };
    let p = match regime {
        Regime::SmallAlpha => choose_n_small_alpha(rho, t0, margins)?,
        Regime::MidAlpha => {
            let theta = r.value("theta", &a.theta, "0.1", parse_real)?;
            choose_n_mid_alpha(rho, t0, theta, margins)?
        }
    };
    let file = write_table(&dir.join("plan.csv"), PLAN_COLUMNS, std::iter::once(Ok(plan_row(&p))))?;
    let report = plan_text(&p);
    let summary = vec![("log2_N".to_string(), p.n_log2.to_string()), ("slack".to_string(), real(p.slack))];
    Ok((vec![file], summary, report))
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::SmallAlpha => "small-alpha",
        Regime::MidAlpha => "mid-alpha",
    }
}

fn plan_row(p: &GwpPlan) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(real).unwrap_or_default();
    vec![
        regime_name(p.regime).to_string(),
        real(p.rho),
        real(p.t0),
        opt(p.theta),
        opt(p.beta),
        p.n_log2.to_string(),
        real(p.lambda_log2),
        real(p.window_log2),
        real(p.iterations_log2),
        real(p.slack),
    ]
}

/// Aligned two-column rendering of a plan.
pub fn plan_text(p: &GwpPlan) -> String {
    let row = plan_row(p);
    let width = PLAN_COLUMNS.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (c, v) in PLAN_COLUMNS.iter().zip(&row) {
        let v = if v.is_empty() { "-" } else { v.as_str() };
        s.push_str(&format!("{:<width$}  {v}\n", c.name));
    }
    s
}
