use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::ManifoldModel;
use crate::solver::RunTrace;

/// Selects grid points by `(x, t)`.
pub type Region<'a> = &'a (dyn Fn(f64, f64) -> bool + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRow {
    pub t: f64,
    /// `sup_x [-(m-1)Δv]·t`
    pub sup_s: f64,
    /// `inf_x [-(m-1)Δv]·t`
    pub inf_s: f64,
    /// `(max Δv - min Δv)/|mean Δv|` over the region.
    pub lap_spread: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCheck {
    /// `n(m-1)/(n(m-1)+2)`
    pub a_euclidean: f64,
    pub rows: Vec<ClassicalRow>,
    /// `max_t sup_s/a_E`
    pub max_ratio: f64,
    /// `min_t inf_s/a_E`
    pub min_ratio: f64,
}

/// The Euclidean Aronson–Bénilan bound `-(m-1)Δv ≤ a_E/t` on a flat trace.
pub fn classical_ab_check(model: &ManifoldModel, trace: &RunTrace, region: Option<Region<'_>>) -> Result<ClassicalCheck> {
    if !model.is_flat() {
        return Err(LabError::geometry("the Aronson-Bénilan check needs a flat model"));
    }
    let m = trace.pme.m();
    let a_e = trace.pme.a_euclidean();
    let mut rows = Vec::with_capacity(trace.snapshots.len());
    for snap in &trace.snapshots {
        let t = snap.t;
        if !(t > 0.0) {
            return Err(LabError::domain("snapshot times must be positive"));
        }
        let lap = model.laplacian(&snap.values, t)?;
        let picked: Vec<f64> = model
            .coords()
            .iter()
            .zip(&lap)
            .filter(|(&x, _)| region.map_or(true, |r| r(x, t)))
            .map(|(_, &l)| l)
            .collect();
        if picked.is_empty() {
            return Err(LabError::usage(format!("region is empty at t = {t}")));
        }
        let (lo, hi) = picked
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
        let mean = picked.iter().sum::<f64>() / picked.len() as f64;
        rows.push(ClassicalRow {
            t,
            sup_s: -(m - 1.0) * lo * t,
            inf_s: -(m - 1.0) * hi * t,
            lap_spread: if mean != 0.0 { (hi - lo) / mean.abs() } else { 0.0 },
            points: picked.len(),
        });
    }
    let max_ratio = rows.iter().map(|r| r.sup_s / a_e).fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = rows.iter().map(|r| r.inf_s / a_e).fold(f64::INFINITY, f64::min);
    Ok(ClassicalCheck {
        a_euclidean: a_e,
        rows,
        max_ratio,
        min_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::PmeParameters;
    use crate::solver::{solve, SolveOptions};
    use std::f64::consts::PI;

    #[test]
    fn constant_solution_is_zero() {
        let model = ManifoldModel::flat_circle(2.0 * PI, 16).unwrap();
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let trace = solve(&model, &[2.0; 16], &pme, (0.0, 1.0), &[0.5, 1.0], None, &SolveOptions::default()).unwrap();
        let c = classical_ab_check(&model, &trace, None).unwrap();
        assert!(c.rows.iter().all(|r| r.sup_s == 0.0));
    }

    #[test]
    fn smooth_run_respects_bound() {
        let model = ManifoldModel::flat_circle(2.0 * PI, 128).unwrap();
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let v0: Vec<f64> = model.coords().iter().map(|x| 1.5 + 0.5 * x.sin()).collect();
        let times: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
        let trace = solve(&model, &v0, &pme, (0.0, 1.0), &times, None, &SolveOptions::default()).unwrap();
        let c = classical_ab_check(&model, &trace, None).unwrap();
        assert!(c.max_ratio <= 1.05, "{}", c.max_ratio);
    }

    #[test]
    fn sphere_is_rejected() {
        let sphere = ManifoldModel::shrinking_sphere(1.0, 17).unwrap();
        let pme = PmeParameters::new(2.0, 2).unwrap();
        let trace = solve(&sphere, &[1.0; 17], &pme, (0.0, 0.1), &[0.1], None, &SolveOptions::default()).unwrap();
        assert!(classical_ab_check(&sphere, &trace, None).is_err());
    }
}
