//! Checks the local gradient estimate on a flat run at C = 1 and calibrates
//! C* for the Hamilton triple on the shrinking sphere.
use pmelab::estimates::{verify_estimate, RhsMode, Scope};
use pmelab::solver::{solve, SolveOptions};
use pmelab::{Family, FunctionTriple, ManifoldModel, PmeParameters};
use std::f64::consts::PI;

fn main() -> pmelab::Result<()> {
    let circle = ManifoldModel::flat_circle(2.0 * PI, 128)?;
    let pme = PmeParameters::new(2.0, 1)?;
    let v0: Vec<f64> = circle.coords().iter().map(|x| 1.5 + 0.5 * x.sin()).collect();
    let times: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
    let trace = solve(&circle, &v0, &pme, (0.0, 1.0), &times, None, &SolveOptions::default())?;
    let li_yau = FunctionTriple::new(Family::LiYau { alpha: 2.0, theta: 1.0 }, trace.env, pme)?;
    for r in [PI / 2.0, PI] {
        let v = verify_estimate(&circle, &trace, &li_yau, Scope::Ball { x0: PI, r }, Some(1.0), RhsMode::Thm21b)?;
        println!("flat, R = {r:.4}: passed {}, min margin {:.4}", v.passed, v.min_margin);
    }

    let sphere = ManifoldModel::shrinking_sphere(2.0, 129)?;
    let pme = PmeParameters::new(2.0, 2)?;
    let v0: Vec<f64> = sphere.coords().iter().map(|th| 1.0 + (-4.0 * th * th).exp()).collect();
    let times: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
    let trace = solve(&sphere, &v0, &pme, (0.0, 0.5), &times, None, &SolveOptions::default())?;
    let hamilton = FunctionTriple::new(Family::Hamilton, trace.env, pme)?;
    let v = verify_estimate(&sphere, &trace, &hamilton, Scope::Global, None, RhsMode::Corollary)?;
    println!("sphere, global: C* = {:?}, C* for the bare quantity = {:?}", v.c_star, v.c_star_bare);
    print!("{}", v.to_csv());
    Ok(())
}
