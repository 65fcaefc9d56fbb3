use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::InitialProfile;
use crate::error::{LabError, Result};
use crate::families::PmeParameters;
use crate::geometry::{ManifoldModel, ModelKind};
use crate::oracle::Barenblatt;

/// Coordinate distance used by the bump profile: periodic on flat models,
/// plain `|θ - c|` on the sphere.
fn coordinate_distance(model: &ManifoldModel, x: f64, center: f64) -> f64 {
    match model.kind() {
        ModelKind::FlatCircle { length } | ModelKind::FlatTorus { length } => {
            let d = (x - center).rem_euclid(length);
            d.min(length - d)
        }
        ModelKind::ShrinkingSphere { .. } => (x - center).abs(),
    }
}

/// Barenblatt coordinate: the circle `[0, L)` recentred on `L/2`.
pub(crate) fn barenblatt_coordinate(model: &ManifoldModel, x: f64) -> f64 {
    match model.kind() {
        ModelKind::FlatCircle { length } => x - 0.5 * length,
        _ => x,
    }
}

/// Seeded sum of smooth modes with `Σ|a_k| = amplitude`.
pub fn random_smooth(model: &ManifoldModel, base: f64, amplitude: f64, modes: usize, seed: u64) -> Result<Vec<f64>> {
    if modes == 0 {
        return Err(LabError::config("initial.modes must be at least 1"));
    }
    if !(amplitude >= 0.0 && amplitude < base) {
        return Err(LabError::config(format!(
            "random-smooth needs 0 <= amplitude < base, got amplitude {amplitude}, base {base}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|k| (rng.gen_range(-1.0..=1.0) / k as f64, rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let total: f64 = coeffs.iter().map(|(a, _)| a.abs()).sum();
    if total > 0.0 {
        for (a, _) in &mut coeffs {
            *a *= amplitude / total;
        }
    }
    let values = model
        .coords()
        .iter()
        .map(|&x| {
            base + coeffs
                .iter()
                .enumerate()
                .map(|(i, &(a, phase))| {
                    let k = (i + 1) as f64;
                    match model.kind() {
                        ModelKind::FlatCircle { length } | ModelKind::FlatTorus { length } => {
                            a * (2.0 * PI * k * x / length + phase).sin()
                        }
                        ModelKind::ShrinkingSphere { .. } => a * (k * x).cos(),
                    }
                })
                .sum::<f64>()
        })
        .collect();
    Ok(values)
}

fn read_column(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::with_capacity(expected);
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| LabError::config(format!("{}: {e}", path.display())))?;
        let field = record.get(0).unwrap_or("");
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(LabError::config(format!(
                    "{}: row {} value `{field}` is not a number",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if out.len() != expected {
        return Err(LabError::config(format!(
            "{} holds {} values, the grid has {expected}",
            path.display(),
            out.len()
        )));
    }
    Ok(out)
}

/// Initial pressure on the model grid at `t0`.
pub fn initial_values(
    profile: &InitialProfile,
    model: &ManifoldModel,
    pme: &PmeParameters,
    t0: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let xs = model.coords();
    Ok(match profile {
        InitialProfile::Constant { value } => vec![*value; xs.len()],
        InitialProfile::Sine {
            base,
            amplitude,
            wavenumber,
        } => xs.iter().map(|x| base + amplitude * (wavenumber * x).sin()).collect(),
        InitialProfile::GaussianBump {
            base,
            amplitude,
            center,
            width,
        } => xs
            .iter()
            .map(|&x| {
                let d = coordinate_distance(model, x, *center) / width;
                base + amplitude * (-d * d).exp()
            })
            .collect(),
        InitialProfile::Barenblatt { mass } => {
            let b = Barenblatt::new(pme, *mass)?;
            let centred: Vec<f64> = xs.iter().map(|&x| barenblatt_coordinate(model, x)).collect();
            b.profile(&centred, t0)?
        }
        InitialProfile::RandomSmooth { base, amplitude, modes } => random_smooth(model, *base, *amplitude, *modes, seed)?,
        InitialProfile::Csv { path } => read_column(path, xs.len())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_matches_closed_form_on_sphere() {
        let sphere = ManifoldModel::shrinking_sphere(2.0, 33).unwrap();
        let pme = PmeParameters::new(2.0, 2).unwrap();
        let bump = InitialProfile::GaussianBump {
            base: 1.0,
            amplitude: 1.0,
            center: 0.0,
            width: 0.5,
        };
        let v = initial_values(&bump, &sphere, &pme, 0.0, 0).unwrap();
        for (th, vi) in sphere.coords().iter().zip(&v) {
            assert!((vi - 1.0 - (-4.0 * th * th).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn random_profiles_are_seeded_and_bounded() {
        let model = ManifoldModel::flat_circle(2.0 * PI, 64).unwrap();
        let a = random_smooth(&model, 2.0, 1.0, 5, 7).unwrap();
        let b = random_smooth(&model, 2.0, 1.0, 5, 7).unwrap();
        let c = random_smooth(&model, 2.0, 1.0, 5, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&v| (1.0..=3.0).contains(&v)));
        assert!(random_smooth(&model, 1.0, 1.0, 5, 0).is_err());
    }

    #[test]
    fn barenblatt_is_centred() {
        let model = ManifoldModel::flat_circle(16.0, 64).unwrap();
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let v = initial_values(&InitialProfile::Barenblatt { mass: 1.0 }, &model, &pme, 1.0, 0).unwrap();
        let peak = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(v[32], peak);
        assert_eq!(v[0], 0.0);
    }

    #[test]
    fn csv_column_with_header() {
        let model = ManifoldModel::flat_circle(2.0 * PI, 16).unwrap();
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v0.csv");
        let body: String = std::iter::once("v\n".to_string())
            .chain((0..16).map(|i| format!("{}\n", 1.0 + i as f64)))
            .collect();
        std::fs::write(&path, body).unwrap();
        let v = initial_values(&InitialProfile::Csv { path: path.clone() }, &model, &pme, 0.0, 0).unwrap();
        assert_eq!(v[3], 4.0);
        std::fs::write(&path, "1\n2\n").unwrap();
        assert!(initial_values(&InitialProfile::Csv { path }, &model, &pme, 0.0, 0).is_err());
    }
}
