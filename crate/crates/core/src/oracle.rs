//! Closed-form ground truth: the Barenblatt pressure, manufactured solutions
//! with their forcing, and observed convergence orders.
//!
//! Nothing here touches the solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::families::PmeParameters;
use crate::geometry::{ManifoldModel, ModelKind};

/// Tolerance of the substitution gate.
pub const GATE_TOLERANCE: f64 = 1e-6;

/// Barenblatt source solution in pressure form (one space dimension):
///
/// `v = t^{-(m-1)k} (b - k x² / (2n t^{2k/n}))₊`, `k = n / (n(m-1) + 2)`.
///
/// Inside the support `v` is quadratic in `x` with `Δv = -k/t`, so
/// `-(m-1) t Δv` equals the Euclidean constant `n(m-1)/(n(m-1)+2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barenblatt {
    m: f64,
    n: usize,
    b: f64,
}

impl Barenblatt {
    pub fn new(pme: &PmeParameters, b: f64) -> Result<Self> {
        if pme.n() != 1 {
            return Err(LabError::domain(format!(
                "Barenblatt oracle supports n = 1 only, got n = {}",
                pme.n()
            )));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(LabError::domain(format!("Barenblatt constant b must be positive, got {b}")));
        }
        Ok(Self { m: pme.m(), n: 1, b })
    }

    pub fn k(&self) -> f64 {
        let n = self.n as f64;
        n / (n * (self.m - 1.0) + 2.0)
    }

    fn check_time(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(LabError::domain(format!("Barenblatt profile needs t > 0, got {t}")))
        }
    }

    /// Unclamped quadratic, negative outside the support.
    fn quadratic(&self, x: f64, t: f64) -> f64 {
        let k = self.k();
        let n = self.n as f64;
        self.b * t.powf(-(self.m - 1.0) * k) - k * x * x / (2.0 * n * t)
    }

    pub fn pressure(&self, x: f64, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.quadratic(x, t).max(0.0))
    }

    pub fn profile(&self, xs: &[f64], t: f64) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.pressure(x, t)).collect()
    }

    /// Half-width of the support at time `t`.
    pub fn support_radius(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        let k = self.k();
        let n = self.n as f64;
        Ok((2.0 * n * t * self.b * t.powf(-(self.m - 1.0) * k) / k).sqrt())
    }

    /// `Δv` inside the support.
    pub fn laplacian(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(-self.k() / t)
    }

    /// Substitutes the closed form into `v_t = (m-1) v v_xx + v_x²` using
    /// centered differences of step `h` in `x` and `t`.
    pub fn fd_residual(&self, x: f64, t: f64, h: f64) -> Result<f64> {
        Self::check_time(t)?;
        if t - h <= 0.0 {
            return Err(LabError::domain("difference step reaches t = 0"));
        }
        let f = |x: f64, t: f64| self.quadratic(x, t);
        let v = f(x, t);
        let vt = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
        let vx = (f(x + h, t) - f(x - h, t)) / (2.0 * h);
        let vxx = (f(x + h, t) - 2.0 * v + f(x - h, t)) / (h * h);
        Ok(vt - (self.m - 1.0) * v * vxx - vx * vx)
    }

    /// The substitution gate: max residual over `samples` random points of
    /// `|x| < 0.9·radius`, `t ∈ [t_lo, t_hi]`. Errors if it exceeds
    /// [`GATE_TOLERANCE`].
    pub fn self_check(&self, t_lo: f64, t_hi: f64, samples: usize, seed: u64) -> Result<f64> {
        Self::check_time(t_lo)?;
        if t_hi < t_lo {
            return Err(LabError::usage("gate time window is empty"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let t = rng.gen_range(t_lo..=t_hi);
            let r = 0.9 * self.support_radius(t)?;
            let x = rng.gen_range(-r..=r);
            worst = worst.max(self.fd_residual(x, t, 1e-4)?.abs());
        }
        if worst > GATE_TOLERANCE {
            return Err(LabError::OracleGate(format!(
                "Barenblatt residual {worst:.3e} exceeds {GATE_TOLERANCE:e}"
            )));
        }
        Ok(worst)
    }
}

/// `barenblatt_pressure(x, t)` with parameters passed inline.
pub fn barenblatt_pressure(x: f64, t: f64, pme: &PmeParameters, b: f64) -> Result<f64> {
    Barenblatt::new(pme, b)?.pressure(x, t)
}

/// Manufactured exact solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MmsTarget {
    Constant(f64),
    /// `2 + e^{-t} sin x` on a flat circle of length `2πj`.
    DecayingSine,
    /// `2 + e^{-t} cos θ` on the shrinking sphere.
    DecayingCosine,
}

impl MmsTarget {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::DecayingSine => 2.0 + (-t).exp() * x.sin(),
            Self::DecayingCosine => 2.0 + (-t).exp() * x.cos(),
        }
    }

    /// Lower bound over `t ≥ 0`.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            Self::Constant(c) => c,
            _ => 1.0,
        }
    }

    pub fn sample(&self, model: &ManifoldModel, t: f64) -> Vec<f64> {
        model.coords().iter().map(|&x| self.value(x, t)).collect()
    }

    /// `(∂_t, ∂_x, ∂_xx)` in the coordinate.
    fn derivatives(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let e = (-t).exp();
        match *self {
            Self::Constant(_) => (0.0, 0.0, 0.0),
            Self::DecayingSine => (-e * x.sin(), e * x.cos(), -e * x.sin()),
            Self::DecayingCosine => (-e * x.cos(), -e * x.sin(), -e * x.cos()),
        }
    }

    /// `(∂_t v, Δ_g v, |∇v|²_g)` at `(x, t)`.
    fn operators(&self, kind: ModelKind, scale: f64, x: f64, t: f64) -> (f64, f64, f64) {
        let (vt, vx, vxx) = self.derivatives(x, t);
        let lap = match kind {
            ModelKind::ShrinkingSphere { .. } => {
                let sin = x.sin();
                // l'Hôpital at the poles: f_θ cot θ → f_θθ
                if sin.abs() < 1e-8 {
                    2.0 * vxx / scale
                } else {
                    (vxx + vx * x.cos() / sin) / scale
                }
            }
            _ => vxx,
        };
        (vt, lap, vx * vx / scale)
    }
}

/// Forcing that makes an [`MmsTarget`] an exact solution of
/// `v_t = (m-1) v Δv + |∇v|² + f`.
#[derive(Debug, Clone, Copy)]
pub struct MmsForcing {
    target: MmsTarget,
    kind: ModelKind,
    m: f64,
}

impl MmsForcing {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let scale = match self.kind {
            ModelKind::ShrinkingSphere { r0 } => r0 * r0 - 2.0 * t,
            _ => 1.0,
        };
        let (vt, lap, grad2) = self.target.operators(self.kind, scale, x, t);
        vt - (self.m - 1.0) * self.target.value(x, t) * lap - grad2
    }

    pub fn target(&self) -> MmsTarget {
        self.target
    }
}

pub fn mms_forcing(target: MmsTarget, model: &ManifoldModel, pme: &PmeParameters) -> Result<MmsForcing> {
    if !(target.lower_bound() > 0.0) {
        return Err(LabError::domain("manufactured solution must stay positive"));
    }
    match (target, model.kind()) {
        (MmsTarget::Constant(_), _) => {}
        (MmsTarget::DecayingSine, ModelKind::FlatCircle { length }) => {
            let turns = length / (2.0 * std::f64::consts::PI);
            if (turns - turns.round()).abs() > 1e-12 || turns.round() < 1.0 {
                return Err(LabError::usage("sine target needs a circle of length 2πj"));
            }
        }
        (MmsTarget::DecayingCosine, ModelKind::ShrinkingSphere { .. }) => {}
        _ => {
            return Err(LabError::usage(format!(
                "target {target:?} is not defined on the {} model",
                model.name()
            )))
        }
    }
    Ok(MmsForcing {
        target,
        kind: model.kind(),
        m: pme.m(),
    })
}

/// One row of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub error: f64,
    /// Order against the previous row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub median_order: f64,
    /// Set when some refinement failed to reduce the error.
    pub warning: bool,
}

/// Observed orders `log(e_i/e_{i+1}) / log(N_{i+1}/N_i)` and their median.
pub fn convergence_order(resolutions: &[usize], errors: &[f64]) -> Result<ConvergenceTable> {
    if resolutions.len() != errors.len() {
        return Err(LabError::usage("resolutions and errors differ in length"));
    }
    if resolutions.len() < 3 {
        return Err(LabError::usage("convergence study needs at least 3 resolutions"));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::usage("resolutions must be strictly increasing"));
    }
    if errors.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(LabError::domain("errors must be positive and finite"));
    }
    let mut rows = vec![ConvergenceRow {
        resolution: resolutions[0],
        error: errors[0],
        order: None,
    }];
    let mut orders = Vec::new();
    let mut warning = false;
    for i in 1..errors.len() {
        let p = (errors[i - 1] / errors[i]).ln() / (resolutions[i] as f64 / resolutions[i - 1] as f64).ln();
        if errors[i] >= errors[i - 1] {
            warning = true;
        }
        orders.push(p);
        rows.push(ConvergenceRow {
            resolution: resolutions[i],
            error: errors[i],
            order: Some(p),
        });
    }
    orders.sort_by(f64::total_cmp);
    let mid = orders.len() / 2;
    let median_order = if orders.len() % 2 == 1 {
        orders[mid]
    } else {
        0.5 * (orders[mid - 1] + orders[mid])
    };
    Ok(ConvergenceTable {
        rows,
        median_order,
        warning,
    })
}
