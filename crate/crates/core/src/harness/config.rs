use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::estimates::{RhsMode, DEFAULT_CUTOFF_CONSTANT};
use crate::families::{Family, PmeParameters, SampledTriple};
use crate::geometry::ModelKind;
use crate::solver::{Positivity, SolveOptions, DEFAULT_SAFETY};

/// Flattened configuration: `section.key → value`.
pub type ConfigMap = BTreeMap<String, String>;

const KNOWN_KEYS: &[&str] = &[
    "model.kind",
    "model.length",
    "model.r0",
    "model.points",
    "model.k",
    "pme.m",
    "pme.n",
    "family.name",
    "family.alpha",
    "family.theta",
    "family.c",
    "family.table",
    "time.start",
    "time.end",
    "time.snapshots",
    "initial.profile",
    "initial.value",
    "initial.base",
    "initial.amplitude",
    "initial.wavenumber",
    "initial.center",
    "initial.width",
    "initial.mass",
    "initial.modes",
    "initial.path",
    "solver.safety",
    "solver.positivity",
    "estimate.enabled",
    "estimate.scope",
    "estimate.radius",
    "estimate.center",
    "estimate.constant",
    "estimate.mode",
    "lemma.enabled",
    "lemma.tolerance",
    "cutoff.enabled",
    "cutoff.radius",
    "cutoff.center",
    "cutoff.time",
    "cutoff.limit",
    "classical.enabled",
    "classical.tolerance",
    "oracle.tolerance",
    "oracle.interior",
    "convergence.points",
    "run.seed",
];

fn flatten(prefix: &str, value: &toml::Value, out: &mut ConfigMap) -> Result<()> {
    match value {
        toml::Value::Table(table) => {
            for (k, v) in table {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out)?;
            }
        }
        toml::Value::Array(items) => {
            let parts: Result<Vec<String>> = items.iter().map(scalar).collect();
            out.insert(prefix.to_string(), parts?.join(","));
        }
        other => {
            out.insert(prefix.to_string(), scalar(other)?);
        }
    }
    Ok(())
}

fn scalar(value: &toml::Value) -> Result<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        other => return Err(LabError::config(format!("unsupported value {other}"))),
    })
}

/// Parses sectioned `key = value` text into a flat map.
pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let value: toml::Value = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::config(e.to_string()))?;
    let mut out = ConfigMap::new();
    flatten("", &value, &mut out)?;
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_config(&text)
}

/// Applies `section.key=value` overrides in order.
pub fn apply_overrides(map: &mut ConfigMap, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| LabError::config(format!("override `{item}` is not of the form key=value")))?;
        let k = k.trim();
        if !k.contains('.') {
            return Err(LabError::config(format!("override key `{k}` needs a section (section.key)")));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(())
}

/// SHA-256 of the canonical `key=value` listing.
pub fn config_hash(map: &ConfigMap) -> String {
    let mut hasher = Sha256::new();
    for (k, v) in map {
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_bytes());
        hasher.update(b"\n");
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialProfile {
    Constant { value: f64 },
    /// `base + amplitude · sin(wavenumber · x)`
    Sine { base: f64, amplitude: f64, wavenumber: f64 },
    /// `base + amplitude · exp(-(d/width)²)`, `d` the distance to `center`.
    GaussianBump { base: f64, amplitude: f64, center: f64, width: f64 },
    /// Barenblatt pressure at `time.start` with constant `mass`.
    Barenblatt { mass: f64 },
    /// `base + Σ a_k (smooth mode k)` with seeded coefficients, `Σ|a_k| ≤ amplitude`.
    RandomSmooth { base: f64, amplitude: f64, modes: usize },
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EstimateScope {
    Ball { center: f64, radius: f64 },
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffSettings {
    pub radius: f64,
    pub center: f64,
    pub time: f64,
    pub limit: f64,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub points: usize,
    /// Ricci bound handed to the estimates; defaults to the background's own.
    pub k_override: Option<f64>,
    pub pme: PmeParameters,
    pub family: Family,
    pub t_start: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub initial: InitialProfile,
    pub solver: SolveOptions,
    pub estimate: Option<EstimateScope>,
    /// `None` calibrates `C*`.
    pub constant: Option<f64>,
    pub mode: Option<RhsMode>,
    /// Residual check with its allowed `ε`.
    pub lemma: Option<f64>,
    pub cutoff: Option<CutoffSettings>,
    /// Classical check with its allowed relative excess over `a_E`.
    pub classical: Option<f64>,
    /// Allowed relative L∞ error against a Barenblatt initial profile.
    pub oracle_tolerance: f64,
    /// Barenblatt comparisons use `|x - c| ≤ oracle_interior · r(t)`.
    pub oracle_interior: f64,
    pub convergence_points: Vec<usize>,
    pub seed: u64,
    pub hash: String,
    pub source: ConfigMap,
}

struct Reader<'a> {
    map: &'a ConfigMap,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| LabError::config(format!("{key} = `{s}` is not a finite number"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| LabError::config(format!("{key} = `{s}` is not a non-negative integer"))),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(s) => Err(LabError::config(format!("{key} = `{s}` is not true/false"))),
        }
    }

    fn str_or<'b>(&'b self, key: &str, default: &'b str) -> &'b str {
        self.raw(key).unwrap_or(default)
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(LabError::config(format!("{key} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) && !key.starts_with("sweep.") {
                return Err(LabError::config(format!("unknown key `{key}`")));
            }
        }
        let r = Reader { map };

        let model = match r.str_or("model.kind", "circle") {
            "circle" => ModelKind::FlatCircle {
                length: positive("model.length", r.f64_or("model.length", 2.0 * PI)?)?,
            },
            "torus" => ModelKind::FlatTorus {
                length: positive("model.length", r.f64_or("model.length", 2.0 * PI)?)?,
            },
            "sphere" => ModelKind::ShrinkingSphere {
                r0: positive("model.r0", r.f64_or("model.r0", 2.0)?)?,
            },
            other => return Err(LabError::config(format!("model.kind `{other}` is not circle, torus or sphere"))),
        };
        let dim = match model {
            ModelKind::FlatCircle { .. } => 1,
            _ => 2,
        };
        let points = r.usize_or("model.points", 128)?;
        let k_override = match r.raw("model.k") {
            None => None,
            Some(_) => {
                let k = r.f64_or("model.k", 0.0)?;
                if k < 0.0 {
                    return Err(LabError::config("model.k must be non-negative"));
                }
                Some(k)
            }
        };

        let n = r.usize_or("pme.n", dim)?;
        if n != dim {
            return Err(LabError::config(format!("pme.n = {n} does not match the model dimension {dim}")));
        }
        let pme = PmeParameters::new(r.f64_or("pme.m", 2.0)?, n).map_err(|e| LabError::config(e.to_string()))?;

        let family = match r.str_or("family.name", "li-yau") {
            "li-yau" => Family::LiYau {
                alpha: r.f64_or("family.alpha", 2.0)?,
                theta: r.f64_or("family.theta", 1.0)?,
            },
            "hamilton" => Family::Hamilton,
            "li-xu" => Family::LiXu,
            "linear-li-xu" => Family::LinearLiXu {
                c: r.f64_or("family.c", 1.0)?,
            },
            "sampled" => {
                let path = r
                    .raw("family.table")
                    .ok_or_else(|| LabError::config("family.table is required for sampled triples"))?;
                Family::Sampled(SampledTriple::from_csv_path(Path::new(path))?)
            }
            other => return Err(LabError::config(format!("unknown family `{other}`"))),
        };

        let t_start = r.f64_or("time.start", 0.0)?;
        let t_end = r.f64_or("time.end", 1.0)?;
        if !(t_start >= 0.0 && t_end > t_start) {
            return Err(LabError::config(format!("time span [{t_start}, {t_end}] is invalid")));
        }
        let snapshots = r.usize_or("time.snapshots", 20)?;
        if snapshots == 0 {
            return Err(LabError::config("time.snapshots must be at least 1"));
        }

        let on_sphere = matches!(model, ModelKind::ShrinkingSphere { .. });
        let initial = match r.str_or("initial.profile", "constant") {
            "constant" => InitialProfile::Constant {
                value: positive("initial.value", r.f64_or("initial.value", 1.0)?)?,
            },
            "sine" => {
                if on_sphere {
                    return Err(LabError::config("the sine profile needs a flat model"));
                }
                InitialProfile::Sine {
                    base: r.f64_or("initial.base", 1.5)?,
                    amplitude: r.f64_or("initial.amplitude", 0.5)?,
                    wavenumber: r.f64_or("initial.wavenumber", 1.0)?,
                }
            }
            "gaussian-bump" => InitialProfile::GaussianBump {
                base: r.f64_or("initial.base", 1.0)?,
                amplitude: r.f64_or("initial.amplitude", 1.0)?,
                center: r.f64_or("initial.center", 0.0)?,
                width: positive("initial.width", r.f64_or("initial.width", 0.5)?)?,
            },
            "barenblatt" => {
                if !matches!(model, ModelKind::FlatCircle { .. }) {
                    return Err(LabError::config("the barenblatt profile needs a flat circle"));
                }
                if t_start <= 0.0 {
                    return Err(LabError::config("the barenblatt profile needs time.start > 0"));
                }
                InitialProfile::Barenblatt {
                    mass: positive("initial.mass", r.f64_or("initial.mass", 1.0)?)?,
                }
            }
            "random-smooth" => InitialProfile::RandomSmooth {
                base: positive("initial.base", r.f64_or("initial.base", 2.0)?)?,
                amplitude: r.f64_or("initial.amplitude", 1.0)?,
                modes: r.usize_or("initial.modes", 4)?,
            },
            "csv" => InitialProfile::Csv {
                path: PathBuf::from(
                    r.raw("initial.path")
                        .ok_or_else(|| LabError::config("initial.path is required for csv profiles"))?,
                ),
            },
            other => return Err(LabError::config(format!("unknown initial profile `{other}`"))),
        };

        let default_positivity = if matches!(initial, InitialProfile::Barenblatt { .. }) {
            "non-negative"
        } else {
            "strict"
        };
        let positivity = match r.str_or("solver.positivity", default_positivity) {
            "strict" => Positivity::Strict,
            "non-negative" => Positivity::NonNegative,
            other => return Err(LabError::config(format!("solver.positivity `{other}` is not strict or non-negative"))),
        };
        let safety = r.f64_or("solver.safety", DEFAULT_SAFETY)?;
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(LabError::config(format!("solver.safety must lie in (0, 1], got {safety}")));
        }
        let solver = SolveOptions {
            safety,
            positivity,
            ..SolveOptions::default()
        };

        let estimate = if r.bool_or("estimate.enabled", true)? {
            Some(match r.str_or("estimate.scope", "global") {
                "global" => EstimateScope::Global,
                "ball" => EstimateScope::Ball {
                    center: r.f64_or("estimate.center", 0.0)?,
                    radius: positive("estimate.radius", r.f64_or("estimate.radius", 1.0)?)?,
                },
                other => return Err(LabError::config(format!("estimate.scope `{other}` is not ball or global"))),
            })
        } else {
            None
        };
        let constant = match r.str_or("estimate.constant", "calibrate") {
            "calibrate" => None,
            _ => Some(positive("estimate.constant", r.f64_or("estimate.constant", 1.0)?)?),
        };
        let mode = match r.str_or("estimate.mode", "auto") {
            "auto" => None,
            "thm21a" => Some(RhsMode::Thm21a),
            "thm21b" => Some(RhsMode::Thm21b),
            other => return Err(LabError::config(format!("estimate.mode `{other}` is not auto, thm21a or thm21b"))),
        };

        let cutoff = if r.bool_or("cutoff.enabled", false)? {
            Some(CutoffSettings {
                radius: positive("cutoff.radius", r.f64_or("cutoff.radius", 1.0)?)?,
                center: r.f64_or("cutoff.center", 0.0)?,
                time: r.f64_or("cutoff.time", t_start)?,
                limit: positive("cutoff.limit", r.f64_or("cutoff.limit", DEFAULT_CUTOFF_CONSTANT)?)?,
            })
        } else {
            None
        };

        let convergence_points = match r.raw("convergence.points") {
            None => vec![64, 128, 256],
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .map_err(|_| LabError::config(format!("convergence.points entry `{p}` is not an integer")))
                })
                .collect::<Result<_>>()?,
        };

        let seed = match r.raw("run.seed") {
            None => 0,
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| LabError::config(format!("run.seed = `{s}` is not an unsigned integer")))?,
        };

        Ok(Self {
            model,
            points,
            k_override,
            pme,
            family,
            t_start,
            t_end,
            snapshots,
            initial,
            solver,
            estimate,
            constant,
            mode,
            lemma: r
                .bool_or("lemma.enabled", false)?
                .then(|| r.f64_or("lemma.tolerance", 1e-2))
                .transpose()?,
            cutoff,
            classical: r
                .bool_or("classical.enabled", false)?
                .then(|| r.f64_or("classical.tolerance", 2e-2))
                .transpose()?,
            oracle_tolerance: r.f64_or("oracle.tolerance", 2e-2)?,
            oracle_interior: {
                let f = r.f64_or("oracle.interior", 0.5)?;
                if !(f > 0.0 && f < 1.0) {
                    return Err(LabError::config(format!("oracle.interior must lie in (0, 1), got {f}")));
                }
                f
            },
            convergence_points,
            seed,
            hash: config_hash(map),
            source: map.clone(),
        })
    }

    /// Snapshot times `t_start + k (t_end - t_start)/snapshots`, `k = 1..=snapshots`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let dt = (self.t_end - self.t_start) / self.snapshots as f64;
        (1..=self.snapshots)
            .map(|k| if k == self.snapshots { self.t_end } else { self.t_start + k as f64 * dt })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[model]
kind = "sphere"
r0 = 2.0
points = 65

[pme]
m = 2.0

[family]
name = "hamilton"

[time]
end = 0.5
snapshots = 10

[initial]
profile = "gaussian-bump"
"#;

    #[test]
    fn parses_and_flattens() {
        let map = parse_config(SAMPLE).unwrap();
        assert_eq!(map["model.kind"], "sphere");
        assert_eq!(map["time.snapshots"], "10");
        let cfg = RunConfig::from_map(&map).unwrap();
        assert_eq!(cfg.model, ModelKind::ShrinkingSphere { r0: 2.0 });
        assert_eq!(cfg.pme.n(), 2);
        assert_eq!(cfg.snapshot_times().len(), 10);
        assert_eq!(*cfg.snapshot_times().last().unwrap(), 0.5);
    }

    #[test]
    fn overrides_replace_values() {
        let mut map = parse_config(SAMPLE).unwrap();
        apply_overrides(&mut map, &["pme.m=3".into(), "family.name = li-xu".into()]).unwrap();
        let cfg = RunConfig::from_map(&map).unwrap();
        assert_eq!(cfg.pme.m(), 3.0);
        assert_eq!(cfg.family, Family::LiXu);
        assert!(apply_overrides(&mut map, &["nokey".into()]).is_err());
        assert!(apply_overrides(&mut map, &["m=2".into()]).is_err());
    }

    #[test]
    fn validation_errors() {
        let bad = |extra: &str| {
            let mut map = parse_config(SAMPLE).unwrap();
            apply_overrides(&mut map, &[extra.to_string()]).unwrap();
            RunConfig::from_map(&map)
        };
        assert!(bad("model.kind=cube").is_err());
        assert!(bad("pme.m=1").is_err());
        assert!(bad("pme.n=3").is_err());
        assert!(bad("time.end=-1").is_err());
        assert!(bad("initial.profile=sine").is_err());
        assert!(bad("solver.safety=2").is_err());
        assert!(bad("model.colour=red").is_err());
        assert!(bad("estimate.constant=-1").is_err());
        assert!(matches!(bad("pme.m=abc"), Err(LabError::Config(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse_config(SAMPLE).unwrap();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.insert("pme.m".into(), "3".into());
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
