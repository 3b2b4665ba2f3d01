//! Exponent bookkeeping for the global iteration.
//!
//! Small dispersion ratio (`α < ½`): rescale by `λ = N^{2ρ/(3−2ρ)+ε}`,
//! iterate windows of length δ, each costing `C N^{−(β−ε′)}` of modified
//! mass with `β = 2 ∧ (3 − 2ρ)`; pick the smallest dyadic `N` with
//! `N^{β−ε′} ≥ margin λ² T₀`.
//!
//! Middle range (`½ < α < 1`): windows of length `μ = N^θ` and the budget
//! `T₀ N^{4ρ/(3−2ρ)+ε″} / N^{7/15−ε′}`.
//!
//! All comparisons are done on base-2 logarithms so that plans with
//! astronomically large `N` stay representable.

use crate::error::{Error, Result};

const LARGEST_EXPONENT: u32 = 1 << 16;

/// Slack constants replacing the `≪` and `±` of the exponent arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    /// ε in the exponent of λ.
    pub eps: f64,
    /// ε′ lost from the decay exponent.
    pub eps_prime: f64,
    /// ε″ added to the growth exponent (middle range).
    pub eps_second: f64,
    /// Factor behind `≪`.
    pub margin: f64,
    /// Local window length δ (small-α scheme).
    pub delta: f64,
    /// Constant `C` of the per-window increment.
    pub budget_constant: f64,
    /// Total increment allowed over all windows, ε₀.
    pub eps0: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Self {
            eps: 0.01,
            eps_prime: 0.01,
            eps_second: 0.01,
            margin: 100.0,
            delta: 1.0,
            budget_constant: 1.0,
            eps0: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SmallAlpha,
    MidAlpha,
}

/// A feasible choice of the iteration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GwpPlan {
    pub regime: Regime,
    pub rho: f64,
    pub t0: f64,
    pub margins: Margins,
    /// `N = 2^{n_log2}`.
    pub n_log2: u32,
    pub lambda_log2: f64,
    /// Set for the small-α scheme.
    pub beta: Option<f64>,
    /// Set for the middle range.
    pub theta: Option<f64>,
    /// `log₂` of the window length (δ or μ).
    pub window_log2: f64,
    /// `log₂ m`, the number of windows.
    pub iterations_log2: f64,
    /// Exponent by which the decay beats the growth.
    pub slack: f64,
}

impl GwpPlan {
    pub fn n(&self) -> f64 {
        2f64.powi(self.n_log2 as i32)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_log2.exp2()
    }

    pub fn window(&self) -> f64 {
        self.window_log2.exp2()
    }

    pub fn iterations(&self) -> f64 {
        self.iterations_log2.exp2()
    }

    /// Re-substitutes the plan into its defining inequalities.
    pub fn check(&self) -> Result<()> {
        let c = match self.regime {
            Regime::SmallAlpha => small_alpha_conditions(self.rho, self.t0, &self.margins, self.n_log2)?,
            Regime::MidAlpha => {
                let theta = self.theta.expect("middle-range plans carry theta");
                mid_alpha_conditions(self.rho, self.t0, theta, &self.margins, self.n_log2)?
            }
        };
        if !c.holds() {
            return Err(Error::Parameter(format!("plan violates its inequalities: {c:?}")));
        }
        if self.slack <= 0.0 {
            return Err(Error::Parameter(format!("non-positive slack {}", self.slack)));
        }
        Ok(())
    }
}

/// `2 ∧ (3 − 2ρ)` for `0 < ρ < 5/8`.
pub fn beta(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.625) {
        return Err(Error::Regime(format!("beta needs 0 < rho < 5/8, got rho = {rho}")));
    }
    Ok(2f64.min(3.0 - 2.0 * rho))
}

/// `λ = N^{exponent}` and the rescaled bound `N^{2ρ} λ^{−(3−2ρ)} ‖u₀‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalePlan {
    pub lambda: f64,
    /// `2ρ/(3−2ρ) + ε`.
    pub lambda_exponent: f64,
    /// Power of `N` in the rescaled bound, `−ε(3−2ρ)`.
    pub bound_exponent: f64,
    pub rescaled_bound: f64,
}

pub fn scale_plan(rho: f64, n: f64, eps: f64, initial_norm: f64) -> Result<ScalePlan> {
    beta(rho)?;
    if eps < 0.0 {
        return Err(Error::Parameter(format!("eps must be >= 0, got {eps}")));
    }
    if !(n >= 1.0) {
        return Err(Error::Parameter(format!("N must be >= 1, got {n}")));
    }
    let lambda_exponent = 2.0 * rho / (3.0 - 2.0 * rho) + eps;
    let lambda = n.powf(lambda_exponent);
    let bound_exponent = 2.0 * rho - (3.0 - 2.0 * rho) * lambda_exponent;
    Ok(ScalePlan {
        lambda,
        lambda_exponent,
        bound_exponent,
        rescaled_bound: n.powf(2.0 * rho) / lambda.powf(3.0 - 2.0 * rho) * initial_norm * initial_norm,
    })
}

/// Both sides (in `log₂`) of each defining inequality at `N = 2^j`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Conditions {
    /// `log₂` of decay ≥ `log₂` of growth.
    decay: f64,
    growth: f64,
    /// `log₂` of the accumulated increment ≤ `log₂ ε₀`.
    budget: f64,
    budget_cap: f64,
}

impl Conditions {
    fn holds(&self) -> bool {
        self.decay >= self.growth && self.budget <= self.budget_cap
    }
}

fn check_margins(m: &Margins, t0: f64) -> Result<()> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::Parameter(format!("target time must be positive, got {t0}")));
    }
    if m.eps < 0.0 || m.eps_prime < 0.0 || m.eps_second < 0.0 {
        return Err(Error::Parameter("exponent margins must be >= 0".into()));
    }
    if !(m.margin > 0.0 && m.delta > 0.0 && m.budget_constant > 0.0 && m.eps0 > 0.0) {
        return Err(Error::Parameter("margin, delta, budget constant and eps0 must be positive".into()));
    }
    Ok(())
}

fn lambda_exponent(rho: f64, eps: f64) -> f64 {
    2.0 * rho / (3.0 - 2.0 * rho) + eps
}

/// `log₂ ⌈x⌉` given `log₂ x`.
fn log2_ceil(x_log2: f64) -> f64 {
    if x_log2 > 52.0 {
        x_log2
    } else {
        x_log2.exp2().ceil().max(1.0).log2()
    }
}

fn small_alpha_conditions(rho: f64, t0: f64, m: &Margins, j: u32) -> Result<Conditions> {
    let b = beta(rho)?;
    let n = j as f64;
    let lam = lambda_exponent(rho, m.eps) * n;
    let decay = (b - m.eps_prime) * n;
    let growth = m.margin.log2() + 2.0 * lam + t0.log2();
    let iterations = log2_ceil(2.0 * lam + t0.log2() - m.delta.log2());
    Ok(Conditions {
        decay,
        growth,
        budget: iterations + m.budget_constant.log2() - decay,
        budget_cap: m.eps0.log2(),
    })
}

fn smallest_exponent(cond: impl Fn(u32) -> Result<Conditions>) -> Result<u32> {
    for j in 0..=LARGEST_EXPONENT {
        if cond(j)?.holds() {
            return Ok(j);
        }
    }
    Err(Error::Parameter(format!("no dyadic N up to 2^{LARGEST_EXPONENT} satisfies the plan")))
}

/// Smallest dyadic `N` for the small-α scheme.
pub fn choose_n_small_alpha(rho: f64, t0: f64, margins: Margins) -> Result<GwpPlan> {
    let b = beta(rho)?;
    check_margins(&margins, t0)?;
    let slack = b - margins.eps_prime - 2.0 * lambda_exponent(rho, margins.eps);
    if slack <= 0.0 {
        return Err(Error::Regime(format!("no slack at rho = {rho}: exponent {slack}")));
    }
    let j = smallest_exponent(|j| small_alpha_conditions(rho, t0, &margins, j))?;
    let lam = lambda_exponent(rho, margins.eps) * j as f64;
    Ok(GwpPlan {
        regime: Regime::SmallAlpha,
        rho,
        t0,
        margins,
        n_log2: j,
        lambda_log2: lam,
        beta: Some(b),
        theta: None,
        window_log2: margins.delta.log2(),
        iterations_log2: log2_ceil(2.0 * lam + t0.log2() - margins.delta.log2()),
        slack,
    })
}

/// Powers of `N` in `μ³/N`, `μ^{k−½}/N^{k/2}`, `μ^{k+½}/N^{(k+1)/2}`
/// (largest over `k = 1..=k_max`) and in the cap `μ^{½}/N^{⅓}`, for `μ = N^θ`.
pub fn window_budget_exponents(theta: f64, k_max: u32) -> (f64, f64) {
    let mut worst = 3.0 * theta - 1.0;
    for k in 1..=k_max {
        let k = k as f64;
        worst = worst.max((k - 0.5) * theta - 0.5 * k);
        worst = worst.max((k + 0.5) * theta - 0.5 * (k + 1.0));
    }
    (worst, 0.5 * theta - 1.0 / 3.0)
}

fn mid_alpha_conditions(rho: f64, t0: f64, theta: f64, m: &Margins, j: u32) -> Result<Conditions> {
    check_mid(rho, theta)?;
    let n = j as f64;
    let decay = (7.0 / 15.0 - m.eps_prime) * n;
    let growth = m.margin.log2() + t0.log2() + (4.0 * rho / (3.0 - 2.0 * rho) + m.eps_second) * n;
    Ok(Conditions {
        decay,
        growth,
        // the accumulated increment T₀ N^{…}/N^{7/15−} is the growth term without the margin
        budget: growth - m.margin.log2() + m.budget_constant.log2() - decay,
        budget_cap: m.eps0.log2(),
    })
}

fn check_mid(rho: f64, theta: f64) -> Result<()> {
    if !(rho >= 0.0 && rho < 0.25) {
        return Err(Error::Regime(format!("the middle-range scheme needs 0 <= rho < 1/4, got rho = {rho}")));
    }
    if !(theta > 0.0 && theta < 2.0 / 15.0) {
        return Err(Error::Parameter(format!("window theta must lie in (0, 2/15), got {theta}")));
    }
    Ok(())
}

/// Smallest dyadic `N` for the middle-range scheme with `μ = N^θ`.
pub fn choose_n_mid_alpha(rho: f64, t0: f64, theta: f64, margins: Margins) -> Result<GwpPlan> {
    check_mid(rho, theta)?;
    check_margins(&margins, t0)?;
    let slack = 7.0 / 15.0 - margins.eps_prime - 4.0 * rho / (3.0 - 2.0 * rho) - margins.eps_second;
    if slack <= 0.0 {
        return Err(Error::Regime(format!("no slack at rho = {rho}: exponent {slack}")));
    }
    let (worst, cap) = window_budget_exponents(theta, 16);
    if worst >= cap {
        return Err(Error::Parameter(format!(
            "window budget fails at theta = {theta}: exponent {worst} vs {cap}"
        )));
    }
    let j = smallest_exponent(|j| mid_alpha_conditions(rho, t0, theta, &margins, j))?;
    let lam = lambda_exponent(rho, margins.eps) * j as f64;
    let window_log2 = theta * j as f64;
    Ok(GwpPlan {
        regime: Regime::MidAlpha,
        rho,
        t0,
        margins,
        n_log2: j,
        lambda_log2: lam,
        beta: None,
        theta: Some(theta),
        window_log2,
        iterations_log2: log2_ceil(2.0 * lam + t0.log2() - window_log2),
        slack,
    })
}
