//! Integrates the pressure equation on a shrinking round sphere and prints
//! the extremes at each snapshot.
use pmelab::solver::{solve, SolveOptions};
use pmelab::{ManifoldModel, PmeParameters};

fn main() -> pmelab::Result<()> {
    let sphere = ManifoldModel::shrinking_sphere(2.0, 129)?;
    let pme = PmeParameters::new(2.0, 2)?;
    let v0: Vec<f64> = sphere.coords().iter().map(|th| 1.0 + (-4.0 * th * th).exp()).collect();
    let times: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
    let trace = solve(&sphere, &v0, &pme, (0.0, 0.5), &times, None, &SolveOptions::default())?;
    println!("steps {}, K over the run {:.4}", trace.dt_history.len(), trace.env.k);
    for snap in &trace.snapshots {
        println!("t = {:.2}  min v = {:.6}  max v = {:.6}", snap.t, snap.min(), snap.max());
    }
    println!("max-principle defect {:.2e}", trace.max_principle_defect());
    Ok(())
}
