use serde::{Deserialize, Serialize};

use super::{FunctionTriple, TripleSample};
use crate::error::{LabError, Result};

/// Default relative slack absorbing rounding in the margin checks.
pub const DEFAULT_SLACK: f64 = 1e-12;

/// Which ratio bound of the `γ` system is audited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioMode {
    /// `γα⁴/(α-1)`
    Alpha4,
    /// `γ/(α-1)`
    Plain,
}

impl RatioMode {
    fn ratio(self, s: &TripleSample) -> f64 {
        let base = s.gamma / (s.alpha - 1.0);
        match self {
            RatioMode::Alpha4 => base * s.alpha.powi(4),
            RatioMode::Plain => base,
        }
    }
}

/// Worst case of one inequality over the audited grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMargin {
    pub name: String,
    /// Smallest margin in absolute units.
    pub min_margin: f64,
    pub t_at_min: f64,
    /// Smallest margin divided by the magnitude of its terms.
    pub min_relative: f64,
    /// First grid time at which the inequality failed, if any.
    pub first_violation: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub mode: RatioMode,
    /// Empirical `C₂`; `None` when the ratio is unbounded on the grid.
    pub sup: Option<f64>,
    pub t_at_sup: Option<f64>,
    pub singular_at: Option<f64>,
}

/// Per-inequality worst-case margins over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub family: String,
    pub grid_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub margins: Vec<ConditionMargin>,
    pub ratio: Option<RatioSummary>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ConditionReport {
    pub fn margin(&self, name: &str) -> Option<&ConditionMargin> {
        self.margins.iter().find(|m| m.name == name)
    }

    pub fn violated(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .margins
            .iter()
            .filter(|m| !m.passed)
            .map(|m| match m.first_violation {
                Some(t) => format!("{} (first at t = {t:.6e}, worst {:.3e})", m.name, m.min_margin),
                None => m.name.clone(),
            })
            .collect();
        if let Some(r) = &self.ratio {
            if r.sup.is_none() {
                out.push(format!(
                    "ratio bound unbounded (singular at t = {:.6e})",
                    r.singular_at.unwrap_or(f64::NAN)
                ));
            }
        }
        out
    }

    /// Merges two reports on the same grid into one verdict.
    pub fn merged(mut self, other: ConditionReport) -> ConditionReport {
        self.margins.extend(other.margins);
        if self.ratio.is_none() {
            self.ratio = other.ratio;
        }
        self.notes.extend(other.notes);
        self.passed = self.passed && other.passed;
        self
    }
}

/// `count` log-uniform points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// 200 log-uniform points on `[10⁻³T, T]`.
pub fn default_grid(horizon: f64) -> Vec<f64> {
    log_grid(1e-3 * horizon, horizon, 200)
}

struct Tracker {
    name: &'static str,
    strict: bool,
    min_margin: f64,
    t_at_min: f64,
    min_relative: f64,
    first_violation: Option<f64>,
}

impl Tracker {
    fn new(name: &'static str, strict: bool) -> Self {
        Self {
            name,
            strict,
            min_margin: f64::INFINITY,
            t_at_min: f64::NAN,
            min_relative: f64::INFINITY,
            first_violation: None,
        }
    }

    /// Records `margin = Σ terms`; `scale` is the magnitude of those terms.
    fn record(&mut self, t: f64, margin: f64, scale: f64, slack: f64) {
        let relative = if scale > 0.0 { margin / scale } else { margin };
        self.record_relative(t, margin, relative, slack);
    }

    /// Records `margin = w (a + b)` with `w > 0` factored out, so the
    /// relative margin stays finite when the products overflow.
    fn record_weighted(&mut self, t: f64, a: f64, b: f64, w: f64, slack: f64) {
        let scale = a.abs() + b.abs();
        let relative = if scale > 0.0 { (a + b) / scale } else { a + b };
        self.record_relative(t, w * (a + b), relative, slack);
    }

    fn record_relative(&mut self, t: f64, margin: f64, relative: f64, slack: f64) {
        let ok = if self.strict {
            relative > 0.0
        } else {
            relative >= -slack
        };
        if !ok || margin.is_nan() {
            self.first_violation.get_or_insert(t);
        }
        if margin < self.min_margin || self.t_at_min.is_nan() {
            self.min_margin = margin;
            self.t_at_min = t;
        }
        self.min_relative = self.min_relative.min(relative);
    }

    fn finish(self) -> ConditionMargin {
        ConditionMargin {
            name: self.name.to_string(),
            min_margin: self.min_margin,
            t_at_min: self.t_at_min,
            min_relative: self.min_relative,
            passed: self.first_violation.is_none(),
            first_violation: self.first_violation,
        }
    }
}

fn validate_grid(triple: &FunctionTriple, t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(LabError::usage("condition grid is empty"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::usage("condition grid must be strictly increasing"));
    }
    let horizon = triple.env().horizon;
    if t_grid[0] <= 0.0 || t_grid[t_grid.len() - 1] > horizon * (1.0 + 1e-12) {
        return Err(LabError::domain(format!("condition grid must lie in (0, T] with T = {horizon}")));
    }
    Ok(())
}

/// Audits `(C1)`, the `(5.1)` system and the monotonicity condition `(C4)`.
///
/// Margins:
/// * `m1 = q - 2x - (q - α')/α`, `m2 = q - α'` (strict), `m3 = φ²/(n(m-1)) + αφ'`,
///   with `q = 2φ/(n(m-1))` and `x = (m-1)MK`;
/// * `alpha>1` (strict), `phi>0`, `gamma>0`;
/// * `alpha'>=0`, `gamma'>=0` and grid-to-grid non-decrease of `α`, `γ`.
pub fn check_admissibility(triple: &FunctionTriple, t_grid: &[f64], slack: f64) -> Result<ConditionReport> {
    validate_grid(triple, t_grid)?;
    let nm1 = triple.pme().nm1();
    let x = triple.rate();

    let mut m1 = Tracker::new("m1", false);
    let mut m2 = Tracker::new("m2", true);
    let mut m3 = Tracker::new("m3", false);
    let mut c1 = Tracker::new("alpha>1", true);
    let mut phi_pos = Tracker::new("phi>0", true);
    let mut gamma_pos = Tracker::new("gamma>0", true);
    let mut alpha_inc = Tracker::new("alpha'>=0", false);
    let mut gamma_inc = Tracker::new("gamma'>=0", false);
    let mut alpha_mono = Tracker::new("alpha non-decreasing", false);
    let mut gamma_mono = Tracker::new("gamma non-decreasing", false);

    let mut prev: Option<TripleSample> = None;
    for &t in t_grid {
        let s = triple.eval(t)?;
        let q = 2.0 * s.phi / nm1;
        let tail = (q - s.alpha_prime) / s.alpha;
        m1.record(t, q - 2.0 * x - tail, q.abs() + 2.0 * x + tail.abs(), slack);
        m2.record(t, q - s.alpha_prime, q.abs() + s.alpha_prime.abs(), slack);
        if s.phi > 0.0 {
            m3.record_weighted(t, s.phi / nm1, s.alpha * s.phi_prime / s.phi, s.phi, slack);
        } else {
            let (sq, lin) = (s.phi * s.phi / nm1, s.alpha * s.phi_prime);
            m3.record(t, sq + lin, sq.abs() + lin.abs(), slack);
        }
        c1.record(t, s.alpha - 1.0, s.alpha.abs() + 1.0, slack);
        phi_pos.record(t, s.phi, s.phi.abs(), slack);
        gamma_pos.record(t, s.gamma, s.gamma.abs(), slack);
        alpha_inc.record(t, s.alpha_prime, s.alpha.abs(), slack);
        gamma_inc.record(t, s.gamma_prime, s.gamma.abs(), slack);
        if let Some(p) = prev {
            alpha_mono.record(t, s.alpha - p.alpha, s.alpha.abs().max(p.alpha.abs()), slack);
            gamma_mono.record(t, s.gamma - p.gamma, s.gamma.abs().max(p.gamma.abs()), slack);
        }
        prev = Some(s);
    }

    let mut trackers = vec![m1, m2, m3, c1, phi_pos, gamma_pos, alpha_inc, gamma_inc];
    if t_grid.len() > 1 {
        trackers.push(alpha_mono);
        trackers.push(gamma_mono);
    }
    let margins: Vec<ConditionMargin> = trackers.into_iter().map(Tracker::finish).collect();
    let passed = margins.iter().all(|m| m.passed);
    Ok(ConditionReport {
        family: triple.family().name().to_string(),
        grid_points: t_grid.len(),
        t_min: t_grid[0],
        t_max: t_grid[t_grid.len() - 1],
        margins,
        ratio: None,
        notes: Vec::new(),
        passed,
    })
}

/// Audits the `γ` system: `γ'/γ - (q - α')/α ≤ 0` (reported as the
/// non-negative margin `c3 = (q - α')/α - γ'/γ`) and the sup of the
/// selected ratio, which is the empirical `C₂`.
pub fn check_gamma_system(
    triple: &FunctionTriple,
    t_grid: &[f64],
    mode: RatioMode,
    slack: f64,
) -> Result<ConditionReport> {
    validate_grid(triple, t_grid)?;
    let nm1 = triple.pme().nm1();
    let mut c3 = Tracker::new("c3", false);
    let mut sup = f64::NEG_INFINITY;
    let mut t_at_sup = None;
    let mut singular_at = None;
    for &t in t_grid {
        let s = triple.eval(t)?;
        let q = 2.0 * s.phi / nm1;
        let drift = (q - s.alpha_prime) / s.alpha;
        let growth = s.gamma_prime / s.gamma;
        c3.record(t, drift - growth, drift.abs() + growth.abs(), slack);

        if s.alpha - 1.0 <= 0.0 {
            singular_at.get_or_insert(t);
            continue;
        }
        let r = mode.ratio(&s);
        if !r.is_finite() {
            singular_at.get_or_insert(t);
        } else if r > sup {
            sup = r;
            t_at_sup = Some(t);
        }
    }
    let margins = vec![c3.finish()];
    let mut notes = Vec::new();
    let x = triple.rate();
    if matches!(triple.family(), super::Family::Hamilton) && x > 0.0 {
        notes.push(format!(
            "gamma/(alpha-1) -> 1/(2(m-1)MK) = {:.6e} as t -> 0+",
            1.0 / (2.0 * x)
        ));
    }
    let ratio = RatioSummary {
        mode,
        sup: singular_at.is_none().then_some(sup),
        t_at_sup,
        singular_at,
    };
    let passed = margins.iter().all(|m| m.passed) && ratio.sup.is_some();
    Ok(ConditionReport {
        family: triple.family().name().to_string(),
        grid_points: t_grid.len(),
        t_min: t_grid[0],
        t_max: t_grid[t_grid.len() - 1],
        margins,
        ratio: Some(ratio),
        notes,
        passed,
    })
}

/// Both audits with the family's own ratio mode, merged into one report.
pub fn full_audit(triple: &FunctionTriple, t_grid: &[f64], slack: f64) -> Result<ConditionReport> {
    let first = check_admissibility(triple, t_grid, slack)?;
    let second = check_gamma_system(triple, t_grid, triple.family().default_ratio_mode(), slack)?;
    Ok(first.merged(second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Family, FlowEnv, PmeParameters, SampledTriple};

    fn triple(family: Family, m: f64, n: usize, x: f64, horizon: f64) -> FunctionTriple {
        let pme = PmeParameters::new(m, n).unwrap();
        // M = 1 so that K = x/(m-1)
        let env = FlowEnv::new(x / (m - 1.0), 1.0, horizon).unwrap();
        FunctionTriple::new(family, env, pme).unwrap()
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 10.0, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert_eq!(g[199], 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let d = default_grid(2.0);
        assert!((d[0] - 2e-3).abs() < 1e-15);
    }

    #[test]
    fn hamilton_admissible() {
        let tr = triple(Family::Hamilton, 2.0, 2, 1.0, 10.0);
        let grid = default_grid(10.0);
        let r = full_audit(&tr, &grid, DEFAULT_SLACK).unwrap();
        assert!(r.passed, "{:?}", r.violated());
        assert!(r.notes[0].contains("1/(2(m-1)MK)"));
    }

    #[test]
    fn hamilton_survives_overflowing_phi_squared() {
        // φ² ~ e^{8xt} is not representable at x = 10, t = 10
        let tr = triple(Family::Hamilton, 2.0, 1, 10.0, 10.0);
        let r = check_admissibility(&tr, &log_grid(1e-3, 10.0, 200), DEFAULT_SLACK).unwrap();
        let m3 = r.margin("m3").unwrap();
        assert!(m3.passed && m3.min_relative.is_finite(), "{m3:?}");
    }

    #[test]
    fn li_yau_first_margin_turns_negative_past_alpha_over_x() {
        // m1 = 2(α-1)/t - 2x(α-1)/α, zero at t = α/x
        let (alpha, x) = (2.0, 1.0);
        let tr = triple(Family::LiYau { alpha, theta: 1.0 }, 2.0, 1, x, 10.0);
        let grid = log_grid(1e-3, 10.0, 200);
        let r = check_admissibility(&tr, &grid, DEFAULT_SLACK).unwrap();
        let m1 = r.margin("m1").unwrap();
        let first = m1.first_violation.unwrap();
        assert!(first > alpha / x && grid.iter().any(|&t| t < first && t > 0.9 * alpha / x));
        let t = 10.0;
        let expected = 2.0 * (alpha - 1.0) / t - 2.0 * x * (alpha - 1.0) / alpha;
        assert!((m1.min_margin - expected).abs() < 1e-12, "{} vs {expected}", m1.min_margin);
        let short = triple(Family::LiYau { alpha, theta: 1.0 }, 2.0, 1, x, 1.9);
        assert!(full_audit(&short, &default_grid(1.9), DEFAULT_SLACK).unwrap().passed);
    }

    #[test]
    fn hamilton_small_time_ratio_limit() {
        // x = 0.5 -> limit 1/(2x) = 1
        let tr = triple(Family::Hamilton, 2.0, 1, 0.5, 1.0);
        let grid = log_grid(1e-9, 1e-6, 5);
        let r = check_gamma_system(&tr, &grid, RatioMode::Plain, DEFAULT_SLACK).unwrap();
        let sup = r.ratio.unwrap().sup.unwrap();
        assert!((sup - 1.0).abs() < 1e-6, "{sup}");
    }

    #[test]
    fn linear_li_xu_unit_slope_admissible_and_third_slope_is_not() {
        let grid = default_grid(10.0);
        let ok = triple(Family::LinearLiXu { c: 1.0 }, 2.0, 1, 1.0, 10.0);
        let r = full_audit(&ok, &grid, DEFAULT_SLACK).unwrap();
        assert!(r.passed, "{:?}", r.violated());
        let ratio = r.ratio.unwrap().sup.unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);

        // with α = 1 + x t/3 the first margin is (-x - 4x²t/9)/α
        let third = triple(Family::LinearLiXu { c: 1.0 / 3.0 }, 2.0, 1, 1.0, 10.0);
        let r = check_admissibility(&third, &grid, DEFAULT_SLACK).unwrap();
        let m1 = r.margin("m1").unwrap();
        assert!(!m1.passed);
        let t = m1.first_violation.unwrap();
        let expected = (-1.0 - 4.0 * t / 9.0) / (1.0 + t / 3.0);
        let s = third.eval(t).unwrap();
        let q = 2.0 * s.phi;
        let got = q - 2.0 - (q - s.alpha_prime) / s.alpha;
        assert!((got - expected).abs() < 1e-10 * (1.0 + q), "{got} vs {expected}");
        // the remaining inequalities do hold for c = 1/3
        for name in ["m2", "m3", "alpha>1"] {
            assert!(r.margin(name).unwrap().passed, "{name}");
        }
        let g = check_gamma_system(&third, &grid, RatioMode::Plain, DEFAULT_SLACK).unwrap();
        assert!(g.passed);
    }

    #[test]
    fn li_yau_first_gamma_margin_closed_form() {
        // θ = 2, α = 2: q = 2α/t + 2x/(α-1), so
        // γ'/γ - (q - α')/α = θ/t - 2/t - 2x/((α-1)α) = -x
        let x = 0.7;
        let tr = triple(Family::LiYau { alpha: 2.0, theta: 2.0 }, 2.0, 1, x, 1.0);
        let grid = default_grid(1.0);
        let r = check_gamma_system(&tr, &grid, RatioMode::Plain, DEFAULT_SLACK).unwrap();
        let c3 = r.margin("c3").unwrap();
        assert!(c3.passed);
        assert!((c3.min_margin - x).abs() < 1e-9, "{}", c3.min_margin);
    }

    #[test]
    fn li_xu_ratio_limits() {
        // series oracle: α-1 ≈ 2s/3, tanh s ≈ s  =>  γα⁴/(α-1) → 3/2 as t → 0
        let tr = triple(Family::LiXu, 2.0, 1, 1.0, 100.0);
        let small = check_gamma_system(&tr, &[1e-7], RatioMode::Alpha4, DEFAULT_SLACK).unwrap();
        let v = small.ratio.unwrap().sup.unwrap();
        assert!((v - 1.5).abs() < 1e-6, "{v}");
        // coth → 1, α → 2, tanh → 1  =>  16 as t → ∞
        let big = check_gamma_system(&tr, &[60.0], RatioMode::Alpha4, DEFAULT_SLACK).unwrap();
        let v = big.ratio.unwrap().sup.unwrap();
        assert!((v - 16.0).abs() < 1e-9, "{v}");
        let r = full_audit(&tr, &default_grid(100.0), DEFAULT_SLACK).unwrap();
        assert!(r.passed, "{:?}", r.violated());
        assert!(r.ratio.unwrap().sup.unwrap() <= 16.0 + 1e-12);
    }

    #[test]
    fn singular_ratio_is_reported() {
        // K = 0 collapses Hamilton to α ≡ 1
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let env = FlowEnv::new(0.0, 1.0, 1.0).unwrap();
        let tr = FunctionTriple::new(Family::Hamilton, env, pme).unwrap();
        let grid = default_grid(1.0);
        let g = check_gamma_system(&tr, &grid, RatioMode::Plain, DEFAULT_SLACK).unwrap();
        let ratio = g.ratio.as_ref().unwrap();
        assert!(ratio.sup.is_none());
        assert_eq!(ratio.singular_at, Some(grid[0]));
        assert!(!g.passed);
        let a = check_admissibility(&tr, &grid, DEFAULT_SLACK).unwrap();
        assert!(!a.margin("alpha>1").unwrap().passed);
    }

    #[test]
    fn perturbed_sampled_triple_is_rejected() {
        let base = triple(Family::Hamilton, 2.0, 1, 1.0, 2.0);
        let times = log_grid(1e-3, 2.0, 400);
        let bent = SampledTriple::tabulate(&times, |t| {
            let s = base.eval(t)?;
            Ok((s.alpha, 0.5 * s.phi, s.gamma * (10.0 * t).exp()))
        })
        .unwrap();
        let tr = FunctionTriple::new(Family::Sampled(bent), *base.env(), *base.pme()).unwrap();
        let grid = log_grid(2e-3, 1.9, 200);
        let r = full_audit(&tr, &grid, DEFAULT_SLACK).unwrap();
        assert!(!r.passed);
        let c3 = r.margin("c3").unwrap();
        let t_bad = c3.first_violation.expect("gamma growth outpaces the drift");
        assert!(t_bad > 0.0 && t_bad < 1.9);
    }

    #[test]
    fn grid_outside_horizon_rejected() {
        let tr = triple(Family::Hamilton, 2.0, 1, 1.0, 1.0);
        assert!(check_admissibility(&tr, &[0.5, 2.0], DEFAULT_SLACK).is_err());
        assert!(check_admissibility(&tr, &[0.0, 0.5], DEFAULT_SLACK).is_err());
        assert!(check_admissibility(&tr, &[], DEFAULT_SLACK).is_err());
    }
}
