//! The estimate quantity `F`, its time-weighted form `G = γF`, the theorem
//! and corollary right-hand sides, the `LG` differential inequality, cutoff
//! functions and the Euclidean Aronson–Bénilan check.

mod classical;
mod cutoff;
mod lemma;
mod rhs;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::families::{FunctionTriple, TripleSample};
use crate::geometry::ManifoldModel;
use crate::solver::RunTrace;

pub use classical::{classical_ab_check, ClassicalCheck, ClassicalRow, Region};
pub use cutoff::{build_cutoff, cutoff_psi, verify_cutoff, CutoffConstants, CutoffProfile, DEFAULT_CUTOFF_CONSTANT};
pub use lemma::{lemma33_residual, LemmaResidual, LemmaSlice, LemmaSnapshot};
pub use rhs::{corollary_rhs, rhs_terms, theorem_rhs, RhsBreakdown, RhsMode};
pub use verify::{verify_estimate, EstimateRow, Scope, Verification, ESTIMATE_CSV_HEADER};

/// Pointwise pieces of `F` on one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FField {
    /// `F = (1-α)|∇v|²/v - α(m-1)Δv - αφ`
    pub f: Vec<f64>,
    /// `|∇v|²/v - α v_t/v`, i.e. `F + αφ`
    pub bare: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub lap: Vec<f64>,
    pub sample: TripleSample,
}

/// Evaluates `F` with `v_t` taken from the equation, `v_t/v = (m-1)Δv + |∇v|²/v`.
pub fn f_field(model: &ManifoldModel, v: &[f64], t: f64, triple: &FunctionTriple) -> Result<FField> {
    if !(t > 0.0) {
        return Err(LabError::domain(format!(
            "F is evaluated at t > 0 only (snapshot at t = {t})"
        )));
    }
    if v.iter().any(|&x| !(x > 0.0)) {
        return Err(LabError::domain(format!("F needs v > 0 (snapshot at t = {t})")));
    }
    let s = triple.eval(t)?;
    let m = triple.pme().m();
    let lap = model.laplacian(v, t)?;
    let grad_sq = model.gradient_sq(v, t)?;
    let mut f = Vec::with_capacity(v.len());
    let mut bare = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let q = grad_sq[i] / v[i];
        let vt_over_v = (m - 1.0) * lap[i] + q;
        let b = q - s.alpha * vt_over_v;
        bare.push(b);
        f.push(b - s.alpha * s.phi);
    }
    Ok(FField {
        f,
        bare,
        grad_sq,
        lap,
        sample: s,
    })
}

/// Sup of `F` over a region of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FSnapshot {
    pub t: f64,
    pub sup_f: f64,
    pub sup_bare: f64,
    /// `γ(t) · sup F`
    pub g: f64,
    /// Coordinate where `F` attains its sup.
    pub x_at_sup: f64,
}

fn masked_sup(values: &[f64], mask: &[bool]) -> Option<(f64, usize)> {
    values
        .iter()
        .zip(mask)
        .enumerate()
        .filter(|(_, (_, &keep))| keep)
        .map(|(i, (&v, _))| (v, i))
        .fold(None, |acc, (v, i)| match acc {
            Some((best, _)) if best >= v => acc,
            _ => Some((v, i)),
        })
}

pub(super) fn snapshot_sups(
    model: &ManifoldModel,
    v: &[f64],
    t: f64,
    triple: &FunctionTriple,
    mask: &[bool],
) -> Result<FSnapshot> {
    let field = f_field(model, v, t, triple)?;
    let (sup_f, at) =
        masked_sup(&field.f, mask).ok_or_else(|| LabError::usage("sup region contains no grid points"))?;
    let (sup_bare, _) = masked_sup(&field.bare, mask).expect("mask is non-empty");
    Ok(FSnapshot {
        t,
        sup_f,
        sup_bare,
        g: field.sample.gamma * sup_f,
        x_at_sup: model.coords()[at],
    })
}

/// `sup F`, the bare sup and `G` on every snapshot of a trace. `region`
/// defaults to the model's interior mask.
pub fn compute_f(
    model: &ManifoldModel,
    trace: &RunTrace,
    triple: &FunctionTriple,
    region: Option<&[bool]>,
) -> Result<Vec<FSnapshot>> {
    let default_mask;
    let mask = match region {
        Some(m) => {
            if m.len() != model.len() {
                return Err(LabError::usage("region mask does not match the grid"));
            }
            m
        }
        None => {
            default_mask = model.interior_mask();
            &default_mask
        }
    };
    trace
        .snapshots
        .par_iter()
        .map(|snap| snapshot_sups(model, &snap.values, snap.t, triple, mask))
        .collect()
}
