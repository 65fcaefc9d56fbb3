use serde::{Deserialize, Serialize};

use super::f_field;
use crate::error::{LabError, Result};
use crate::families::FunctionTriple;
use crate::geometry::ManifoldModel;
use crate::solver::RunTrace;

/// Pointwise margins `RHS - LG` on one interior snapshot. Points outside the
/// interior mask hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSlice {
    pub t: f64,
    pub g: Vec<f64>,
    pub lg: Vec<f64>,
    /// Against the closed inequality with the `-G²/(aα²γ)` term.
    pub stated: Vec<f64>,
    /// Against the inequality before the Hessian term is closed up in `G`.
    pub preclosure: Vec<f64>,
}

/// Minima of one slice over the interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSnapshot {
    pub t: f64,
    pub min_stated: f64,
    /// Over the points with `G ≥ 0`; `None` when there are none.
    pub min_stated_nonneg: Option<f64>,
    pub min_preclosure: f64,
    pub max_abs_lg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaResidual {
    pub dt: f64,
    pub spacing: f64,
    pub k: f64,
    pub rows: Vec<LemmaSnapshot>,
    pub min_stated: f64,
    pub min_stated_nonneg: Option<f64>,
    pub min_preclosure: f64,
    /// `max(0, -min)` over the pre-closure margin everywhere and the stated
    /// margin where `G ≥ 0`.
    pub epsilon: f64,
    #[serde(skip)]
    pub slices: Vec<LemmaSlice>,
}

/// Discrete check of the differential inequality for `G = γF` under
/// `L = ∂_t - (m-1) v Δ`.
///
/// `∂_t G` is a centered difference across snapshots, which must be
/// uniformly spaced; every snapshot with two neighbours is evaluated.
pub fn lemma33_residual(
    model: &ManifoldModel,
    trace: &RunTrace,
    triple: &FunctionTriple,
    k: f64,
) -> Result<LemmaResidual> {
    let snaps = &trace.snapshots;
    if snaps.len() < 3 {
        return Err(LabError::usage(format!(
            "residual needs at least 3 snapshots, got {}",
            snaps.len()
        )));
    }
    let dt = snaps[1].t - snaps[0].t;
    if snaps.windows(2).any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt) {
        return Err(LabError::usage("residual needs uniformly spaced snapshots"));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(LabError::domain(format!("K must be non-negative, got {k}")));
    }

    let pme = triple.pme();
    let (m, n, nm1) = (pme.m(), pme.n() as f64, pme.nm1());
    let a = pme.a();
    let mask = model.interior_mask();

    let g_fields: Vec<Vec<f64>> = snaps
        .iter()
        .map(|s| {
            let field = f_field(model, &s.values, s.t, triple)?;
            Ok(field.f.iter().map(|f| field.sample.gamma * f).collect())
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(snaps.len() - 2);
    let mut slices = Vec::with_capacity(snaps.len() - 2);
    for j in 1..snaps.len() - 1 {
        let snap = &snaps[j];
        let (v, t) = (&snap.values, snap.t);
        let field = f_field(model, v, t, triple)?;
        let s = field.sample;
        let g = &g_fields[j];
        let lap_g = model.laplacian(g, t)?;
        let grad_vg = model.gradient_dot(v, g, t)?;

        let q = 2.0 * s.phi / nm1;
        let bracket = s.gamma_prime / s.gamma - (q - s.alpha_prime) / s.alpha;
        let am1 = s.alpha - 1.0;
        let a2 = s.alpha * s.alpha;
        let curvature = (m - 1.0) * a2 * s.gamma * k * k;

        let len = v.len();
        let mut out = LemmaSlice {
            t,
            g: g.clone(),
            lg: vec![f64::NAN; len],
            stated: vec![f64::NAN; len],
            preclosure: vec![f64::NAN; len],
        };
        let mut row = LemmaSnapshot {
            t,
            min_stated: f64::INFINITY,
            min_stated_nonneg: None,
            min_preclosure: f64::INFINITY,
            max_abs_lg: 0.0,
        };
        for i in (0..len).filter(|&i| mask[i]) {
            let gt = (g_fields[j + 1][i] - g_fields[j - 1][i]) / (2.0 * dt);
            let lg = gt - (m - 1.0) * v[i] * lap_g[i];
            let w = field.grad_sq[i] / v[i];
            let shared = bracket * g[i] + curvature + 2.0 * s.gamma * am1 * k * w + 2.0 * m * grad_vg[i];

            let stated = -g[i] * g[i] / (a * a2 * s.gamma) - 2.0 * am1 * w * g[i] / (n * a2)
                - s.gamma * (m - 1.0) * am1 * am1 * w * w / (n * a2)
                + shared;
            let hess = field.f[i] + am1 * w;
            let mlap = (m - 1.0) * field.lap[i];
            let pre = -s.gamma * hess * hess / (n * nm1 * a2) - s.gamma * mlap * mlap + shared;

            out.lg[i] = lg;
            out.stated[i] = stated - lg;
            out.preclosure[i] = pre - lg;
            row.min_stated = row.min_stated.min(stated - lg);
            row.min_preclosure = row.min_preclosure.min(pre - lg);
            row.max_abs_lg = row.max_abs_lg.max(lg.abs());
            if g[i] >= 0.0 {
                let cur = row.min_stated_nonneg.unwrap_or(f64::INFINITY);
                row.min_stated_nonneg = Some(cur.min(stated - lg));
            }
        }
        rows.push(row);
        slices.push(out);
    }

    let min_stated = rows.iter().map(|r| r.min_stated).fold(f64::INFINITY, f64::min);
    let min_preclosure = rows.iter().map(|r| r.min_preclosure).fold(f64::INFINITY, f64::min);
    let min_stated_nonneg = rows
        .iter()
        .filter_map(|r| r.min_stated_nonneg)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
    let worst = min_stated_nonneg.map_or(min_preclosure, |s| s.min(min_preclosure));
    Ok(LemmaResidual {
        dt,
        spacing: model.spacing(),
        k,
        rows,
        min_stated,
        min_stated_nonneg,
        min_preclosure,
        epsilon: (-worst).max(0.0),
        slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Family, FlowEnv, PmeParameters};
    use crate::solver::{solve, PressureField, RunTrace, SolveOptions};
    use std::f64::consts::PI;

    #[test]
    fn constant_solution_reduces_to_ode() {
        let model = ManifoldModel::flat_circle(2.0 * PI, 16).unwrap();
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let times = [0.4, 0.5, 0.6];
        let trace = solve(&model, &[1.0; 16], &pme, (0.0, 0.6), &times, None, &SolveOptions::default()).unwrap();
        let triple = FunctionTriple::new(Family::LiYau { alpha: 2.0, theta: 1.0 }, trace.env, pme).unwrap();
        let res = lemma33_residual(&model, &trace, &triple, 0.0).unwrap();
        assert_eq!(res.rows.len(), 1);
        // G = -αφ t = -4 for α = 2, θ = 1, n(m-1) = 1, so LG = 0
        let s = triple.eval(0.5).unwrap();
        let g = -s.gamma * s.alpha * s.phi;
        assert!((g + 4.0).abs() < 1e-12);
        let row = res.rows[0];
        assert!(row.max_abs_lg < 1e-9);
        // bracket = γ'/γ - q/α = 2 - 4 at t = 1/2
        let stated = -g * g / (0.5 * 4.0 * 0.5) + (-2.0) * g;
        assert!((row.min_stated - stated).abs() < 1e-9);
        assert!((stated + 8.0).abs() < 1e-9); // -4/t: negative, so G < 0 points are excluded
        assert_eq!(row.min_stated_nonneg, None);
        // pre-closure margin is γ·(φ²/(n(m-1)) + αφ'), zero for this triple
        assert!(row.min_preclosure.abs() < 1e-9);
        assert!(res.epsilon < 1e-9);
    }

    #[test]
    fn needs_three_uniform_snapshots() {
        let model = ManifoldModel::flat_circle(2.0 * PI, 16).unwrap();
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let env = FlowEnv::new(0.0, 1.0, 1.0).unwrap();
        let triple = FunctionTriple::new(Family::LiYau { alpha: 2.0, theta: 1.0 }, env, pme).unwrap();
        let mk = |ts: &[f64]| RunTrace {
            initial: PressureField::new(vec![1.0; 16], 0.0),
            snapshots: ts.iter().map(|&t| PressureField::new(vec![1.0; 16], t)).collect(),
            pme,
            env,
            dt_history: vec![],
            extrema: vec![],
        };
        assert!(lemma33_residual(&model, &mk(&[0.1, 0.2]), &triple, 0.0).is_err());
        assert!(lemma33_residual(&model, &mk(&[0.1, 0.2, 0.4]), &triple, 0.0).is_err());
        assert!(lemma33_residual(&model, &mk(&[0.1, 0.2, 0.3]), &triple, 0.0).is_ok());
    }
}
