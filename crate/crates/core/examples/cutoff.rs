//! Normalized cutoff constants on the circle and around a sphere pole.
use pmelab::estimates::{build_cutoff, verify_cutoff, DEFAULT_CUTOFF_CONSTANT};
use pmelab::ManifoldModel;

fn main() -> pmelab::Result<()> {
    let circle = ManifoldModel::flat_circle(16.0, 2048)?;
    for r in [1.0, 2.0] {
        let p = build_cutoff(&circle, 8.0, r, 0.0)?;
        let c = verify_cutoff(&p, &circle, 0.0, 0.0, DEFAULT_CUTOFF_CONSTANT)?;
        println!("circle R = {r}: c1 = {:.4}, c2 = {:.4}", c.c1, c.c2);
    }
    let sphere = ManifoldModel::shrinking_sphere(2.0, 513)?;
    let t = 0.25;
    let k = sphere.ricci_bound(t)?;
    let p = build_cutoff(&sphere, 0.0, 0.5, t)?;
    let c = verify_cutoff(&p, &sphere, t, k, DEFAULT_CUTOFF_CONSTANT)?;
    println!("sphere pole R = 0.5, t = {t}: c1 = {:.4}, c2 = {:.4}", c.c1, c.c2);
    Ok(())
}
