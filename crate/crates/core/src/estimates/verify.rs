use serde::{Deserialize, Serialize};

use super::rhs::{rhs_terms, RhsBreakdown, RhsMode};
use super::{compute_f, snapshot_sups, FSnapshot};
use crate::error::{LabError, Result};
use crate::families::{default_grid, full_audit, ConditionReport, FunctionTriple, DEFAULT_SLACK};
use crate::geometry::ManifoldModel;
use crate::solver::RunTrace;

/// Column order of the estimate series CSV.
pub const ESTIMATE_CSV_HEADER: &str =
    "t,sup_F,sup_bare,G,rhs_total,rhs_local,rhs_cutoff,rhs_curv1,rhs_curv2,margin,C_star";

/// Where the sup of `F` is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scope {
    /// `B_{2R}(x₀)` with the local right-hand side.
    Ball { x0: f64, r: f64 },
    /// The whole (interior) grid with the corollary right-hand side.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub t: f64,
    pub sup_f: f64,
    pub sup_bare: f64,
    pub g: f64,
    pub rhs: RhsBreakdown,
    /// `rhs.total - sup_f`
    pub margin: f64,
    /// Smallest `C` for which this row passes; `None` if none does.
    pub c_star: Option<f64>,
    pub c_star_bare: Option<f64>,
}

impl EstimateRow {
    pub fn csv_line(&self) -> String {
        let c = self.c_star.map_or_else(|| "inf".to_string(), |c| format!("{c:e}"));
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.t,
            self.sup_f,
            self.sup_bare,
            self.g,
            self.rhs.total,
            self.rhs.local,
            self.rhs.cutoff,
            self.rhs.curv1,
            self.rhs.curv2,
            self.margin,
            c
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub family: String,
    pub mode: RhsMode,
    pub scope: Scope,
    /// The constant requested, `None` in calibration mode.
    pub c: Option<f64>,
    /// The constant the rows were evaluated at.
    pub c_used: Option<f64>,
    pub rows: Vec<EstimateRow>,
    /// Calibrated constant for `F`.
    pub c_star: Option<f64>,
    /// Calibrated constant if the bare left side (without `-αφ`) were used.
    pub c_star_bare: Option<f64>,
    /// Rows where the bare left side exceeds the right side at `c_used`.
    pub bare_violations: usize,
    pub min_margin: f64,
    pub admissibility: ConditionReport,
    pub passed: bool,
}

impl Verification {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ESTIMATE_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }
}

fn max_option(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.fold(Some(0.0), |acc, c| match (acc, c) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    })
}

/// Checks the estimate along a trace.
///
/// With `c = Some(C)` the verdict is PASS iff `RHS(t) ≥ sup F(t)` at every
/// snapshot. With `c = None` the smallest admissible constant `C*` is
/// returned and the rows are evaluated at it. The triple must pass its
/// admissibility audit on `(0, T]` first.
pub fn verify_estimate(
    model: &ManifoldModel,
    trace: &RunTrace,
    triple: &FunctionTriple,
    scope: Scope,
    c: Option<f64>,
    mode: RhsMode,
) -> Result<Verification> {
    let env = triple.env();
    let audit = full_audit(triple, &default_grid(env.horizon), DEFAULT_SLACK)?;
    if !audit.passed {
        return Err(LabError::Inadmissible {
            violated: audit.violated(),
        });
    }
    if triple.pme().n() != model.dimension() {
        return Err(LabError::usage(format!(
            "triple has n = {} but the {} model has dimension {}",
            triple.pme().n(),
            model.name(),
            model.dimension()
        )));
    }
    let ric = model.run_ricci_bound(env.horizon)?;
    if env.k < ric * (1.0 - 1e-12) {
        return Err(LabError::domain(format!(
            "K = {} is below the Ricci bound {ric} of the background",
            env.k
        )));
    }
    let vmax = trace.max_value();
    if vmax > env.m_bound * (1.0 + 1e-12) {
        return Err(LabError::domain(format!(
            "trace reaches v = {vmax}, above M = {}",
            env.m_bound
        )));
    }
    if let Some(c) = c {
        if !(c.is_finite() && c > 0.0) {
            return Err(LabError::usage(format!("constant C must be positive, got {c}")));
        }
    }

    let (mode, radius) = match scope {
        Scope::Global => (RhsMode::Corollary, None),
        Scope::Ball { r, .. } if mode == RhsMode::Corollary => {
            return Err(LabError::usage(format!(
                "ball scope (R = {r}) needs a local right-hand side mode"
            )))
        }
        Scope::Ball { r, .. } => (mode, Some(r)),
    };

    let sups: Vec<FSnapshot> = match scope {
        Scope::Global => compute_f(model, trace, triple, None)?,
        Scope::Ball { x0, r } => {
            let interior = model.interior_mask();
            let mut out = Vec::with_capacity(trace.snapshots.len());
            for snap in &trace.snapshots {
                let d = model.distances_from(x0, snap.t)?;
                let mask: Vec<bool> = interior.iter().zip(&d).map(|(&i, &d)| i && d <= 2.0 * r).collect();
                out.push(snapshot_sups(model, &snap.values, snap.t, triple, &mask)?);
            }
            out
        }
    };

    let mut unit_rows = Vec::with_capacity(sups.len());
    for snap in &sups {
        let s = triple.eval(snap.t)?;
        let rhs = rhs_terms(triple.pme(), env, &s, radius, 1.0, mode)?;
        unit_rows.push((snap, rhs));
    }
    let c_star = max_option(unit_rows.iter().map(|(s, r)| r.required_c(s.sup_f)));
    let c_star_bare = max_option(unit_rows.iter().map(|(s, r)| r.required_c(s.sup_bare)));
    let c_used = c.or(c_star);

    let mut rows = Vec::with_capacity(unit_rows.len());
    let mut bare_violations = 0;
    for (snap, unit) in unit_rows {
        let rhs = unit.with_c(c_used.unwrap_or(1.0));
        if snap.sup_bare > rhs.total {
            bare_violations += 1;
        }
        rows.push(EstimateRow {
            t: snap.t,
            sup_f: snap.sup_f,
            sup_bare: snap.sup_bare,
            g: snap.g,
            rhs,
            margin: rhs.total - snap.sup_f,
            c_star: unit.required_c(snap.sup_f),
            c_star_bare: unit.required_c(snap.sup_bare),
        });
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let passed = match c {
        Some(_) => rows.iter().all(|r| r.margin >= 0.0),
        None => c_star.is_some(),
    };
    Ok(Verification {
        family: triple.family().name().to_string(),
        mode,
        scope,
        c,
        c_used,
        rows,
        c_star,
        c_star_bare,
        bare_violations,
        min_margin,
        admissibility: audit,
        passed,
    })
}
