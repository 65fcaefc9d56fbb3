use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::ManifoldModel;

/// Default bound on the normalized cutoff constants.
pub const DEFAULT_CUTOFF_CONSTANT: f64 = 32.0;

/// `ψ(r)`: `1` on `[0, 1]`, `(1 - (r-1)²)²` on `[1, 2]`, `0` beyond.
pub fn cutoff_psi(r: f64) -> f64 {
    let s = cutoff_sqrt_psi(r);
    s * s
}

/// `√ψ`, which is `C¹` except at `r = 2`.
fn cutoff_sqrt_psi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r < 2.0 {
        let u = r - 1.0;
        1.0 - u * u
    } else {
        0.0
    }
}

/// `χ(x) = ψ(d(x, x₀, t)/R)` on the grid with its derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub r: f64,
    pub x0: f64,
    pub t: f64,
    pub values: Vec<f64>,
    /// `|∇χ|²/χ`, taken as `4|∇√χ|²` on the support and `0` off it.
    pub grad_ratio: Vec<f64>,
    pub neg_laplacian: Vec<f64>,
}

pub fn build_cutoff(model: &ManifoldModel, x0: f64, r: f64, t: f64) -> Result<CutoffProfile> {
    if !(r.is_finite() && r > 0.0) {
        return Err(LabError::domain(format!("cutoff radius must be positive, got {r}")));
    }
    let inj = model.injectivity_scale(t)?;
    if 2.0 * r > inj * (1.0 + 1e-12) {
        return Err(LabError::geometry(format!(
            "2R = {} exceeds the injectivity scale {inj} of the {} model",
            2.0 * r,
            model.name()
        )));
    }
    let dist = model.distances_from(x0, t)?;
    let root: Vec<f64> = dist.iter().map(|d| cutoff_sqrt_psi(d / r)).collect();
    let values: Vec<f64> = root.iter().map(|s| s * s).collect();
    let grad_root = model.gradient_sq(&root, t)?;
    let grad_ratio = values
        .iter()
        .zip(&grad_root)
        .map(|(&chi, &g)| if chi > 0.0 { 4.0 * g } else { 0.0 })
        .collect();
    let neg_laplacian = model.laplacian(&values, t)?.into_iter().map(|l| -l).collect();
    Ok(CutoffProfile {
        r,
        x0,
        t,
        values,
        grad_ratio,
        neg_laplacian,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffConstants {
    /// `R² sup |∇χ|²/χ`
    pub c1: f64,
    /// `R² sup(-Δχ) / (1 + √K R)`
    pub c2: f64,
    pub limit: f64,
    pub passed: bool,
}

/// Empirical constants of the two cutoff inequalities.
pub fn verify_cutoff(profile: &CutoffProfile, model: &ManifoldModel, t: f64, k: f64, limit: f64) -> Result<CutoffConstants> {
    if profile.t != t || profile.values.len() != model.len() {
        return Err(LabError::usage("cutoff profile was built for another time or grid"));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(LabError::domain(format!("K must be non-negative, got {k}")));
    }
    let r2 = profile.r * profile.r;
    let sup = |xs: &[f64]| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c1 = r2 * sup(&profile.grad_ratio);
    let c2 = r2 * sup(&profile.neg_laplacian) / (1.0 + k.sqrt() * profile.r);
    Ok(CutoffConstants {
        c1,
        c2,
        limit,
        passed: c1 <= limit && c2 <= limit,
    })
}
