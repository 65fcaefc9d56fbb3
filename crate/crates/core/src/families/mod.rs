//! Coefficient triples `(α, φ, γ)` and their admissibility audits.
//!
//! Every built-in family is expressed through the single rate
//! `x = (m-1)·M·K`, which carries units of 1/time.

mod closed_form;
mod conditions;
mod sampled;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use conditions::{
    check_admissibility, check_gamma_system, default_grid, full_audit, log_grid, ConditionMargin,
    ConditionReport, RatioMode, DEFAULT_SLACK,
};
pub use sampled::SampledTriple;

/// Exponent `m` of the porous medium equation and manifold dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmeParameters {
    m: f64,
    n: usize,
}

impl PmeParameters {
    pub fn new(m: f64, n: usize) -> Result<Self> {
        if !(m.is_finite() && m > 1.0) {
            return Err(LabError::domain(format!("exponent m must be > 1, got {m}")));
        }
        if n == 0 {
            return Err(LabError::domain("dimension n must be at least 1"));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n(m-1)`, the combination that appears throughout the estimates.
    pub fn nm1(&self) -> f64 {
        self.n as f64 * (self.m - 1.0)
    }

    /// Constant of the Ricci-flow estimate, `n(m-1)/(n(m-1)+1)`.
    pub fn a(&self) -> f64 {
        let q = self.nm1();
        q / (q + 1.0)
    }

    /// Euclidean Aronson–Bénilan constant `n(m-1)/(n(m-1)+2)`.
    pub fn a_euclidean(&self) -> f64 {
        let q = self.nm1();
        q / (q + 2.0)
    }
}

/// Ricci bound `K`, pressure bound `M` and time horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEnv {
    pub k: f64,
    pub m_bound: f64,
    pub horizon: f64,
}

impl FlowEnv {
    pub fn new(k: f64, m_bound: f64, horizon: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(LabError::domain(format!("Ricci bound K must be >= 0, got {k}")));
        }
        if !(m_bound.is_finite() && m_bound > 0.0) {
            return Err(LabError::domain(format!("pressure bound M must be > 0, got {m_bound}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(LabError::domain(format!("time horizon T must be > 0, got {horizon}")));
        }
        Ok(Self { k, m_bound, horizon })
    }

    /// The rate `(m-1)·M·K`.
    pub fn rate(&self, pme: &PmeParameters) -> f64 {
        (pme.m() - 1.0) * self.m_bound * self.k
    }
}

/// Which closed form (or table) a triple follows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// Constant `α > 1`, `γ = t^θ` with `θ ∈ (0, 2]`.
    LiYau { alpha: f64, theta: f64 },
    /// `α = e^{2xt}`, `φ = n(m-1)e^{4xt}/t`, `γ = t e^{2xt}`.
    Hamilton,
    /// The hyperbolic family; `α` stays in `(1, 2)`.
    LiXu,
    /// `α = 1 + c·x·t`; `c = 1` is the variant that satisfies every inequality.
    LinearLiXu { c: f64 },
    /// Tabulated values, interpolated monotonically.
    Sampled(SampledTriple),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::LiYau { .. } => "li-yau",
            Family::Hamilton => "hamilton",
            Family::LiXu => "li-xu",
            Family::LinearLiXu { .. } => "linear-li-xu",
            Family::Sampled(_) => "sampled",
        }
    }

    /// The `(5.2)` ratio that bounds this family's time weight.
    pub fn default_ratio_mode(&self) -> RatioMode {
        match self {
            Family::LiXu => RatioMode::Alpha4,
            _ => RatioMode::Plain,
        }
    }
}

/// A coefficient family bound to concrete PME parameters and flow bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionTriple {
    family: Family,
    env: FlowEnv,
    pme: PmeParameters,
}

/// Values and first derivatives of a triple at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleSample {
    pub t: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl FunctionTriple {
    pub fn new(family: Family, env: FlowEnv, pme: PmeParameters) -> Result<Self> {
        match &family {
            Family::LiYau { alpha, theta } => {
                if !(alpha.is_finite() && *alpha > 1.0) {
                    return Err(LabError::domain(format!("Li-Yau alpha must be > 1, got {alpha}")));
                }
                if !(theta.is_finite() && *theta > 0.0 && *theta <= 2.0) {
                    return Err(LabError::domain(format!(
                        "Li-Yau theta must lie in (0, 2], got {theta}"
                    )));
                }
            }
            Family::LinearLiXu { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(LabError::domain(format!("linear Li-Xu slope c must be > 0, got {c}")));
                }
            }
            Family::LiXu | Family::Hamilton | Family::Sampled(_) => {}
        }
        Ok(Self { family, env, pme })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn env(&self) -> &FlowEnv {
        &self.env
    }

    pub fn pme(&self) -> &PmeParameters {
        &self.pme
    }

    pub fn rate(&self) -> f64 {
        self.env.rate(&self.pme)
    }

    /// Evaluates the triple and its analytic derivatives at `t > 0`.
    pub fn eval(&self, t: f64) -> Result<TripleSample> {
        if !(t.is_finite() && t > 0.0) {
            return Err(LabError::domain(format!("triples are defined for t > 0, got t = {t}")));
        }
        let x = self.rate();
        let nm1 = self.pme.nm1();
        let sample = match &self.family {
            Family::LiYau { alpha, theta } => closed_form::li_yau(t, x, nm1, *alpha, *theta),
            Family::Hamilton => closed_form::hamilton(t, x, nm1),
            Family::LiXu => {
                if x <= 0.0 {
                    return Err(LabError::domain(
                        "Li-Xu family needs (m-1)MK > 0 (set a positive Ricci bound K)",
                    ));
                }
                closed_form::li_xu(t, x, nm1)
            }
            Family::LinearLiXu { c } => closed_form::linear_li_xu(t, x, nm1, *c),
            Family::Sampled(table) => table.eval(t)?,
        };
        Ok(sample)
    }
}

/// Evaluates a triple; free-function form of [`FunctionTriple::eval`].
pub fn eval_triple(triple: &FunctionTriple, t: f64) -> Result<TripleSample> {
    triple.eval(t)
}

/// Largest gap between the analytic derivatives and second-order central
/// differences of the values, over the interior of `t_grid`.
///
/// The central difference at `t` uses the step `h` (not the grid spacing),
/// so the result measures the analytic derivatives, not the grid.
pub fn derivative_consistency(triple: &FunctionTriple, t_grid: &[f64], h: f64) -> Result<f64> {
    if t_grid.len() < 3 {
        return Err(LabError::usage("derivative_consistency needs at least 3 grid points"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(LabError::usage("time grid must be positive and strictly increasing"));
    }
    if !(h > 0.0 && h < t_grid[0]) {
        return Err(LabError::usage("finite-difference step must be positive and below the first grid time"));
    }
    let mut worst = 0.0_f64;
    for &t in t_grid {
        let s = triple.eval(t)?;
        let lo = triple.eval(t - h)?;
        let hi = triple.eval(t + h)?;
        let fd = |a: f64, b: f64| (b - a) / (2.0 * h);
        worst = worst
            .max((s.alpha_prime - fd(lo.alpha, hi.alpha)).abs())
            .max((s.phi_prime - fd(lo.phi, hi.phi)).abs())
            .max((s.gamma_prime - fd(lo.gamma, hi.gamma)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triple(family: Family, x: f64) -> FunctionTriple {
        // m = 2, M = 1 so that x = K
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let env = FlowEnv::new(x, 1.0, 10.0).unwrap();
        FunctionTriple::new(family, env, pme).unwrap()
    }

    #[test]
    fn parameters_validate() {
        assert!(PmeParameters::new(1.0, 1).is_err());
        assert!(PmeParameters::new(2.0, 0).is_err());
        let p = PmeParameters::new(2.0, 1).unwrap();
        assert_eq!(p.a(), 0.5);
        assert!(FlowEnv::new(-1.0, 1.0, 1.0).is_err());
        assert!(FlowEnv::new(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn a_constant_in_unit_interval() {
        for m in [1.01, 1.5, 2.0, 4.0, 10.0] {
            for n in 1..=5 {
                let a = PmeParameters::new(m, n).unwrap().a();
                assert!(a > 0.0 && a < 1.0);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_time() {
        let tr = triple(Family::Hamilton, 1.0);
        assert!(matches!(tr.eval(0.0), Err(LabError::Domain(_))));
        assert!(tr.eval(-1.0).is_err());
    }

    #[test]
    fn hamilton_at_unit_rate() {
        let s = triple(Family::Hamilton, 1.0).eval(1.0).unwrap();
        let e2 = 7.389_056_098_930_65_f64;
        assert_relative_eq!(s.alpha, e2, max_relative = 1e-14);
        assert_relative_eq!(s.gamma, e2, max_relative = 1e-14);
    }

    #[test]
    fn linear_li_xu_small_time() {
        let tr = triple(Family::LinearLiXu { c: 1.0 }, 3.0);
        let s = tr.eval(1e-9).unwrap();
        assert!((s.alpha - 1.0).abs() < 1e-8);
        assert!(s.gamma.abs() < 1e-8);
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(tr.eval(t).unwrap().alpha_prime, 3.0);
        }
    }

    #[test]
    fn li_yau_gamma_linear() {
        let s = triple(Family::LiYau { alpha: 2.0, theta: 1.0 }, 1.0).eval(0.5).unwrap();
        assert_eq!(s.gamma, 0.5);
        assert_eq!(s.gamma_prime, 1.0);
        assert_eq!(s.alpha_prime, 0.0);
    }

    #[test]
    fn li_xu_limits() {
        let tr = triple(Family::LiXu, 1.0);
        assert!((tr.eval(1e-8).unwrap().alpha - 1.0).abs() < 1e-7);
        assert!((tr.eval(40.0).unwrap().alpha - 2.0).abs() < 1e-12);
        assert!((tr.eval(400.0).unwrap().alpha - 2.0).abs() < 1e-15);
    }

    #[test]
    fn li_xu_needs_positive_rate() {
        let tr = triple(Family::LiXu, 0.0);
        assert!(tr.eval(1.0).is_err());
    }

    #[test]
    fn derivative_check_usage() {
        let tr = triple(Family::Hamilton, 1.0);
        assert!(derivative_consistency(&tr, &[0.1, 0.2], 1e-4).is_err());
        assert!(derivative_consistency(&tr, &[0.2, 0.1, 0.3], 1e-4).is_err());
    }

    #[test]
    fn constant_alpha_has_exact_zero_derivative_error() {
        let tr = triple(Family::LiYau { alpha: 2.0, theta: 1.0 }, 0.0);
        let grid: Vec<f64> = (5..=20).map(|i| i as f64 * 0.1).collect();
        // φ = 2/t: central-difference error 2h²/t⁴ ≤ 3.2e-7 on [0.5, 2]
        let err = derivative_consistency(&tr, &grid, 1e-4).unwrap();
        assert!(err < 4e-7, "{err}");
        let s = tr.eval(0.3).unwrap();
        assert_eq!(s.alpha_prime, 0.0);
    }
}
