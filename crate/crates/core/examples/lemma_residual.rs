//! Discrete residual of the differential inequality for G = γF under two
//! refinements of a flat Li-Yau run.
use pmelab::estimates::lemma33_residual;
use pmelab::solver::{solve, SolveOptions};
use pmelab::{Family, FunctionTriple, ManifoldModel, PmeParameters};
use std::f64::consts::PI;

fn main() -> pmelab::Result<()> {
    let pme = PmeParameters::new(2.0, 1)?;
    for (n, dt) in [(64, 0.05), (128, 0.0125), (256, 0.003125)] {
        let model = ManifoldModel::flat_circle(2.0 * PI, n)?;
        let v0: Vec<f64> = model.coords().iter().map(|x| 1.5 + 0.5 * x.sin()).collect();
        let steps = (1.0 / dt as f64).round() as usize;
        let times: Vec<f64> = (1..=steps).map(|k| k as f64 * dt).collect();
        let trace = solve(&model, &v0, &pme, (0.0, 1.0), &times, None, &SolveOptions::default())?;
        let triple = FunctionTriple::new(Family::LiYau { alpha: 2.0, theta: 1.0 }, trace.env, pme)?;
        let res = lemma33_residual(&model, &trace, &triple, 0.0)?;
        println!(
            "N = {n:>3}, Δt = {dt}: pre-closure min {:.4e}, stated min {:.4e} (on G ≥ 0: {:?}), ε = {:.3e}",
            res.min_preclosure, res.min_stated, res.min_stated_nonneg, res.epsilon
        );
    }
    Ok(())
}
