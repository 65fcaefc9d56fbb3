use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{apply_overrides, ConfigMap, RunConfig};
use super::pipeline::run;
use super::report::{ReportBundle, Verdict};
use crate::error::{LabError, Result};

/// Default cap on the number of runs in one sweep.
pub const DEFAULT_SWEEP_CAP: usize = 10_000;

/// One swept parameter: `section.key` and its values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl SweepAxis {
    /// Parses `section.key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| LabError::usage(format!("axis `{spec}` is not of the form key=v1,v2")))?;
        Ok(Self {
            key: key.trim().to_string(),
            values: values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from)
                .collect(),
        })
    }
}

/// Axes declared in the config as `[sweep]` keys (`"pme.m" = [1.5, 2]`),
/// and the base map with those keys removed.
pub fn axes_from_config(map: &ConfigMap) -> (ConfigMap, Vec<SweepAxis>) {
    let mut base = ConfigMap::new();
    let mut axes = Vec::new();
    for (k, v) in map {
        match k.strip_prefix("sweep.") {
            Some(key) => axes.push(SweepAxis::parse(&format!("{key}={v}")).expect("key=value")),
            None => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
    (base, axes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub values: Vec<String>,
    pub verdict: Option<Verdict>,
    pub c_star: Option<f64>,
    pub min_margin: Option<f64>,
    /// Failure message when the run did not complete.
    pub error: Option<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axes: Vec<SweepAxis>,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub bundles: Vec<Option<ReportBundle>>,
}

impl SweepReport {
    /// `0` if every run passed, else the largest per-run exit code.
    pub fn exit_code(&self) -> i32 {
        self.rows.iter().map(|r| r.exit_code).max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out: String = self.axes.iter().map(|a| format!("{},", a.key)).collect();
        out.push_str("verdict,C_star,min_margin,error\n");
        let num = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:e}"));
        for r in &self.rows {
            for v in &r.values {
                let _ = write!(out, "{v},");
            }
            let verdict = r.verdict.map_or("ERROR", Verdict::as_str);
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let _ = writeln!(out, "{verdict},{},{},{err}", num(r.c_star), num(r.min_margin));
        }
        out
    }
}

fn cartesian(axes: &[SweepAxis]) -> Vec<Vec<String>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect()
    })
}

fn one_run(base: &ConfigMap, axes: &[SweepAxis], values: &[String]) -> (SweepRow, Option<ReportBundle>) {
    let overrides: Vec<String> = axes.iter().zip(values).map(|(a, v)| format!("{}={v}", a.key)).collect();
    let mut map = base.clone();
    let result = apply_overrides(&mut map, &overrides)
        .and_then(|_| RunConfig::from_map(&map))
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(b) => {
            let row = SweepRow {
                values: values.to_vec(),
                verdict: Some(b.verdict),
                c_star: b.estimate.as_ref().and_then(|e| e.c_star),
                min_margin: b.estimate.as_ref().map(|e| e.min_margin),
                error: None,
                exit_code: b.verdict.exit_code(),
            };
            (row, Some(b))
        }
        Err(e) => (
            SweepRow {
                values: values.to_vec(),
                verdict: None,
                c_star: None,
                min_margin: None,
                error: Some(e.to_string()),
                exit_code: e.exit_code(),
            },
            None,
        ),
    }
}

/// Runs the Cartesian product of `axes` over `base`. Rows come back in
/// axis order whatever the thread count; `jobs = None` uses all cores.
pub fn sweep(base: &ConfigMap, axes: &[SweepAxis], jobs: Option<usize>, cap: usize) -> Result<SweepReport> {
    if axes.is_empty() {
        return Err(LabError::usage("sweep needs at least one axis"));
    }
    if let Some(a) = axes.iter().find(|a| a.values.is_empty()) {
        return Err(LabError::usage(format!("sweep axis `{}` is empty", a.key)));
    }
    let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()));
    match total {
        Some(t) if t <= cap => {}
        _ => {
            return Err(LabError::usage(format!(
                "sweep of {} runs exceeds the cap of {cap}",
                total.map_or_else(|| "too many".to_string(), |t| t.to_string())
            )))
        }
    }
    // Sweep keys in the base describe axes, not run parameters.
    let (base, _) = axes_from_config(base);
    let points = cartesian(axes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| LabError::usage(format!("thread pool: {e}")))?;
    let results: Vec<(SweepRow, Option<ReportBundle>)> =
        pool.install(|| points.par_iter().map(|p| one_run(&base, axes, p)).collect());
    let (rows, bundles) = results.into_iter().unzip();
    Ok(SweepReport {
        axes: axes.to_vec(),
        rows,
        bundles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    const BASE: &str = r#"
[model]
kind = "circle"
points = 32
k = 0.1

[time]
end = 0.5
snapshots = 4

[initial]
profile = "constant"
"#;

    #[test]
    fn axis_parsing() {
        let a = SweepAxis::parse("pme.m=1.5, 2,3").unwrap();
        assert_eq!(a.values, vec!["1.5", "2", "3"]);
        assert!(SweepAxis::parse("pme.m").is_err());
        let mut map = parse_config(BASE).unwrap();
        map.insert("sweep.pme.m".into(), "2,3".into());
        let (base, axes) = axes_from_config(&map);
        assert!(!base.contains_key("sweep.pme.m"));
        assert_eq!(axes[0].key, "pme.m");
    }

    #[test]
    fn usage_errors() {
        let map = parse_config(BASE).unwrap();
        assert!(matches!(sweep(&map, &[], None, 10), Err(LabError::Usage(_))));
        let empty = SweepAxis::parse("pme.m=").unwrap();
        assert!(sweep(&map, &[empty], None, 10).is_err());
        let big = SweepAxis::parse("pme.m=1.5,2,3").unwrap();
        assert!(sweep(&map, &[big.clone(), big], None, 8).is_err());
    }

    #[test]
    fn rows_follow_axis_order_and_record_errors() {
        let map = parse_config(BASE).unwrap();
        let axes = vec![
            SweepAxis::parse("family.name=hamilton,nonsense").unwrap(),
            SweepAxis::parse("pme.m=2,3").unwrap(),
        ];
        let r = sweep(&map, &axes, Some(2), 100).unwrap();
        let keys: Vec<_> = r.rows.iter().map(|r| r.values.join("/")).collect();
        assert_eq!(keys, ["hamilton/2", "hamilton/3", "nonsense/2", "nonsense/3"]);
        assert_eq!(r.rows[0].verdict, Some(Verdict::Pass));
        assert_eq!(r.rows[2].exit_code, 2);
        assert_eq!(r.exit_code(), 2);
        assert!(r.to_csv().starts_with("family.name,pme.m,verdict,C_star,min_margin,error\n"));
    }
}
