use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::families::{Family, FlowEnv, FunctionTriple, PmeParameters, TripleSample};

/// Which right-hand side is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhsMode {
    /// Cutoff term `CaMm²/(R²γ)`; pairs with the `γα⁴/(α-1)` bound.
    Thm21a,
    /// Cutoff term `CaMm²α⁴/(R²γ)`; pairs with the `γ/(α-1)` bound.
    Thm21b,
    /// Global form without `R`.
    Corollary,
}

impl RhsMode {
    /// The local form matching a family's ratio bound.
    pub fn for_family(family: &Family) -> Self {
        match family {
            Family::LiXu => RhsMode::Thm21a,
            _ => RhsMode::Thm21b,
        }
    }
}

/// The terms of a right-hand side at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhsBreakdown {
    pub mode: RhsMode,
    pub t: f64,
    pub a: f64,
    pub c: f64,
    pub r: Option<f64>,
    /// `Caα²[(1 + √K R)/R² + K]`, or `Caα²K` in corollary mode.
    pub local: f64,
    pub cutoff: f64,
    /// `α²K√(a(m-1))`
    pub curv1: f64,
    /// `Kα²√(an)/(m-1)`
    pub curv2: f64,
    pub total: f64,
    /// `local` and `cutoff` at `C = 1`.
    pub unit_local: f64,
    pub unit_cutoff: f64,
}

impl RhsBreakdown {
    /// The part of the total that does not scale with `C`.
    pub fn fixed_part(&self) -> f64 {
        self.curv1 + self.curv2
    }

    /// Coefficient of `C` in the total.
    pub fn per_unit_c(&self) -> f64 {
        self.unit_local + self.unit_cutoff
    }

    /// Smallest `C ≥ 0` with `total ≥ value`; `None` when no `C` suffices.
    pub fn required_c(&self, value: f64) -> Option<f64> {
        let excess = value - self.fixed_part();
        if excess <= 0.0 {
            Some(0.0)
        } else if self.per_unit_c() > 0.0 {
            Some(excess / self.per_unit_c())
        } else {
            None
        }
    }

    /// The same terms at another constant.
    pub fn with_c(&self, c: f64) -> Self {
        let mut out = *self;
        out.c = c;
        out.local = c * self.unit_local;
        out.cutoff = c * self.unit_cutoff;
        out.total = out.local + out.cutoff + self.curv1 + self.curv2;
        out
    }
}

/// Evaluates a right-hand side from a triple sample. `r` is required for the
/// local modes and ignored in corollary mode.
pub fn rhs_terms(
    pme: &PmeParameters,
    env: &FlowEnv,
    s: &TripleSample,
    r: Option<f64>,
    c: f64,
    mode: RhsMode,
) -> Result<RhsBreakdown> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(LabError::domain(format!("constant C must be non-negative, got {c}")));
    }
    let a = pme.a();
    let k = env.k;
    let m = pme.m();
    let alpha2 = s.alpha * s.alpha;
    let curv1 = alpha2 * k * (a * (m - 1.0)).sqrt();
    let curv2 = k * alpha2 * (a * pme.n() as f64).sqrt() / (m - 1.0);
    let (unit_local, unit_cutoff, r) = match mode {
        RhsMode::Corollary => (a * alpha2 * k, 0.0, None),
        RhsMode::Thm21a | RhsMode::Thm21b => {
            let r = r.ok_or_else(|| LabError::usage("local right-hand side needs a radius R"))?;
            if !(r.is_finite() && r > 0.0) {
                return Err(LabError::domain(format!("radius R must be positive, got {r}")));
            }
            if !(s.gamma > 0.0) {
                return Err(LabError::Singular {
                    t: s.t,
                    what: format!("cutoff term divides by gamma = {} (use t > 0)", s.gamma),
                });
            }
            let local = a * alpha2 * ((1.0 + k.sqrt() * r) / (r * r) + k);
            let mut cutoff = a * env.m_bound * m * m / (r * r * s.gamma);
            if mode == RhsMode::Thm21b {
                cutoff *= alpha2 * alpha2;
            }
            (local, cutoff, Some(r))
        }
    };
    let local = c * unit_local;
    let cutoff = c * unit_cutoff;
    Ok(RhsBreakdown {
        mode,
        t: s.t,
        a,
        c,
        r,
        local,
        cutoff,
        curv1,
        curv2,
        total: local + cutoff + curv1 + curv2,
        unit_local,
        unit_cutoff,
    })
}

/// Local right-hand side at time `t` for radius `r`.
pub fn theorem_rhs(triple: &FunctionTriple, r: f64, c: f64, t: f64, mode: RhsMode) -> Result<RhsBreakdown> {
    if mode == RhsMode::Corollary {
        return Err(LabError::usage("theorem_rhs takes a local mode; use corollary_rhs"));
    }
    let s = triple.eval(t)?;
    rhs_terms(triple.pme(), triple.env(), &s, Some(r), c, mode)
}

/// Global right-hand side `Caα²K + α²K√(a(m-1)) + Kα²√(an)/(m-1)`.
pub fn corollary_rhs(triple: &FunctionTriple, c: f64, t: f64) -> Result<RhsBreakdown> {
    let s = triple.eval(t)?;
    rhs_terms(triple.pme(), triple.env(), &s, None, c, RhsMode::Corollary)
}
