//! Barenblatt benchmark: gate the closed form, integrate from t = 1 to 2 on
//! [-8, 8] and compare. Also prints the Aronson-Bénilan ratio, which the
//! Barenblatt profile saturates.
use pmelab::estimates::classical_ab_check;
use pmelab::oracle::Barenblatt;
use pmelab::solver::{solve, Positivity, SolveOptions};
use pmelab::{ManifoldModel, PmeParameters};

fn main() -> pmelab::Result<()> {
    let pme = PmeParameters::new(2.0, 1)?;
    let oracle = Barenblatt::new(&pme, 1.0)?;
    println!("gate residual {:.2e}", oracle.self_check(1.0, 2.0, 100, 1)?);

    let model = ManifoldModel::flat_circle(16.0, 1024)?;
    let centred: Vec<f64> = model.coords().iter().map(|x| x - 8.0).collect();
    let v0 = oracle.profile(&centred, 1.0)?;
    let opts = SolveOptions {
        positivity: Positivity::NonNegative,
        ..SolveOptions::default()
    };
    let trace = solve(&model, &v0, &pme, (1.0, 2.0), &[1.5, 2.0], None, &opts)?;

    let last = trace.snapshots.last().unwrap();
    let r = 0.5 * oracle.support_radius(2.0)?;
    let exact = oracle.profile(&centred, 2.0)?;
    let (mut err, mut peak) = (0.0_f64, 0.0_f64);
    for ((y, v), e) in centred.iter().zip(&last.values).zip(&exact) {
        if y.abs() <= r {
            err = err.max((v - e).abs());
            peak = peak.max(*e);
        }
    }
    println!("relative L-inf error at t = 2: {:.3e}", err / peak);

    let inside = |x: f64, t: f64| oracle.support_radius(t).map_or(false, |r| (x - 8.0).abs() <= 0.5 * r);
    let ab = classical_ab_check(&model, &trace, Some(&inside))?;
    for row in &ab.rows {
        println!(
            "t = {:.1}: -(m-1)Δv·t / a_E in [{:.4}, {:.4}], Δv spread {:.2e}",
            row.t,
            row.inf_s / ab.a_euclidean,
            row.sup_s / ab.a_euclidean,
            row.lap_spread
        );
    }
    Ok(())
}
