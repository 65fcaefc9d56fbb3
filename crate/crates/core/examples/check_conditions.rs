//! Audits the four closed-form families on a log grid and prints the worst
//! margin of each inequality.
use pmelab::families::{default_grid, full_audit, Family, FlowEnv, FunctionTriple, PmeParameters, DEFAULT_SLACK};

fn main() -> pmelab::Result<()> {
    let pme = PmeParameters::new(2.0, 2)?;
    let env = FlowEnv::new(0.5, 2.0, 10.0)?;
    let families = [
        Family::LiYau { alpha: 2.0, theta: 1.0 },
        Family::Hamilton,
        Family::LiXu,
        Family::LinearLiXu { c: 1.0 },
        Family::LinearLiXu { c: 1.0 / 3.0 },
    ];
    for family in families {
        let triple = FunctionTriple::new(family.clone(), env, pme)?;
        let report = full_audit(&triple, &default_grid(env.horizon), DEFAULT_SLACK)?;
        println!("{family:?}: {}", if report.passed { "admissible" } else { "violated" });
        for m in &report.margins {
            println!("  {:<12} min {:>12.4e} at t = {:.3e}", m.name, m.min_margin, m.t_at_min);
        }
        if let Some(r) = &report.ratio {
            println!("  ratio sup {:?}", r.sup);
        }
    }
    Ok(())
}
