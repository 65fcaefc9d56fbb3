//! Manufactured-solution refinement study on the circle and the sphere.
use pmelab::oracle::{convergence_order, mms_forcing, MmsTarget};
use pmelab::solver::{solve, SolveOptions};
use pmelab::{ManifoldModel, PmeParameters};
use std::f64::consts::PI;

fn study(target: MmsTarget, model: ManifoldModel, pme: PmeParameters, extra: usize) -> pmelab::Result<()> {
    let ns = [64, 128, 256];
    let mut errors = Vec::new();
    for n in ns {
        let model = model.with_points(n + extra)?;
        let forcing = mms_forcing(target, &model, &pme)?;
        let f = |x: f64, t: f64| forcing.eval(x, t);
        let v0 = target.sample(&model, 0.0);
        let trace = solve(&model, &v0, &pme, (0.0, 0.5), &[0.5], Some(&f), &SolveOptions::default())?;
        let exact = target.sample(&model, 0.5);
        let err = trace.snapshots[0].values.iter().zip(&exact).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        errors.push(err);
    }
    let table = convergence_order(&ns, &errors)?;
    println!("{target:?}");
    for row in &table.rows {
        println!("  N = {:>4}  error {:.3e}  order {:?}", row.resolution, row.error, row.order);
    }
    println!("  median order {:.3}", table.median_order);
    Ok(())
}

fn main() -> pmelab::Result<()> {
    study(MmsTarget::DecayingSine, ManifoldModel::flat_circle(2.0 * PI, 64)?, PmeParameters::new(2.0, 1)?, 0)?;
    study(MmsTarget::DecayingCosine, ManifoldModel::shrinking_sphere(2.0, 65)?, PmeParameters::new(2.0, 2)?, 1)
}
