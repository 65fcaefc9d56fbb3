use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ConfigMap;
use crate::error::{LabError, Result};
use crate::estimates::{ClassicalCheck, CutoffConstants, LemmaResidual, Verification};
use crate::families::ConditionReport;
use crate::oracle::ConvergenceTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_passed(passed: bool) -> Self {
        if passed {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }

    /// `0` for PASS, `1` for a mathematical violation.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub steps: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub min_dt: f64,
    pub max_dt: f64,
    pub initial_max: f64,
    pub initial_min: f64,
    pub final_max: f64,
    pub final_min: f64,
    pub max_principle_defect: f64,
    pub snapshot_times: Vec<f64>,
}

/// Final-time comparison against the Barenblatt profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub gate_residual: f64,
    pub t: f64,
    /// Interior region `|x - c| ≤ fraction · r(t)`.
    pub fraction: f64,
    pub points: usize,
    pub relative_linf: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Values of `v` on the grid, one row per snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTable {
    pub coords: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Everything one harness invocation produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub operation: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ConfigMap,
    pub conditions: Option<ConditionReport>,
    pub solve: Option<SolveSummary>,
    pub solution: Option<SolutionTable>,
    pub estimate: Option<Verification>,
    pub lemma: Option<LemmaResidual>,
    pub lemma_tolerance: Option<f64>,
    pub cutoff: Option<CutoffConstants>,
    pub classical: Option<ClassicalCheck>,
    pub oracle: Option<OracleComparison>,
    pub convergence: Option<ConvergenceTable>,
    pub checks: Vec<CheckOutcome>,
    pub verdict: Verdict,
}

impl ReportBundle {
    pub(crate) fn new(operation: &str, config: &super::RunConfig) -> Self {
        Self {
            operation: operation.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash.clone(),
            seed: config.seed,
            config: config.source.clone(),
            conditions: None,
            solve: None,
            solution: None,
            estimate: None,
            lemma: None,
            lemma_tolerance: None,
            cutoff: None,
            classical: None,
            oracle: None,
            convergence: None,
            checks: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    pub(crate) fn record(&mut self, name: &str, passed: bool) {
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            passed,
        });
        self.verdict = Verdict::from_passed(self.checks.iter().all(|c| c.passed));
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::usage(format!("JSON encoding failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::usage(format!("JSON decoding failed: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(LabError::usage(format!("format `{other}` is not csv or json"))),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

pub fn conditions_csv(report: &ConditionReport) -> String {
    let mut out = String::from("name,min_margin,t_at_min,min_relative,first_violation,passed\n");
    for m in &report.margins {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{},{}",
            m.name,
            m.min_margin,
            m.t_at_min,
            m.min_relative,
            opt(m.first_violation),
            m.passed
        );
    }
    if let Some(r) = &report.ratio {
        let name = match r.mode {
            crate::families::RatioMode::Alpha4 => "ratio_alpha4",
            crate::families::RatioMode::Plain => "ratio_plain",
        };
        let _ = writeln!(out, "{name},{},{},,{},{}", opt(r.sup), opt(r.t_at_sup), opt(r.singular_at), r.sup.is_some());
    }
    out
}

pub fn lemma_csv(res: &LemmaResidual) -> String {
    let mut out = String::from("t,min_stated,min_stated_nonneg,min_preclosure,max_abs_LG\n");
    for r in &res.rows {
        let _ = writeln!(
            out,
            "{:e},{:e},{},{:e},{:e}",
            r.t,
            r.min_stated,
            opt(r.min_stated_nonneg),
            r.min_preclosure,
            r.max_abs_lg
        );
    }
    out
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("resolution,error,order\n");
    for r in &table.rows {
        let _ = writeln!(out, "{},{:e},{}", r.resolution, r.error, opt(r.order));
    }
    out
}

pub fn solution_csv(table: &SolutionTable) -> String {
    let mut out = String::from("t,x,v\n");
    for (t, row) in table.times.iter().zip(&table.values) {
        for (x, v) in table.coords.iter().zip(row) {
            let _ = writeln!(out, "{t:e},{x:e},{v:e}");
        }
    }
    out
}

pub fn checks_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("check,passed\n");
    for c in &bundle.checks {
        let _ = writeln!(out, "{},{}", c.name, c.passed);
    }
    let _ = writeln!(out, "verdict,{}", bundle.passed());
    out
}

pub(crate) fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| LabError::io(&path, e))?;
    Ok(path)
}

/// Writes the bundle under `dir`. CSV emits one file per populated section
/// plus `checks.csv`; JSON emits `report.json`.
pub fn emit(bundle: &ReportBundle, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match format {
        OutputFormat::Json => written.push(write_file(dir, "report.json", &bundle.to_json()?)?),
        OutputFormat::Csv => {
            if let Some(c) = &bundle.conditions {
                written.push(write_file(dir, "conditions.csv", &conditions_csv(c))?);
            }
            if let Some(s) = &bundle.solution {
                written.push(write_file(dir, "solution.csv", &solution_csv(s))?);
            }
            if let Some(e) = &bundle.estimate {
                written.push(write_file(dir, "estimate.csv", &e.to_csv())?);
            }
            if let Some(l) = &bundle.lemma {
                written.push(write_file(dir, "lemma.csv", &lemma_csv(l))?);
            }
            if let Some(t) = &bundle.convergence {
                written.push(write_file(dir, "convergence.csv", &convergence_csv(t))?);
            }
            written.push(write_file(dir, "checks.csv", &checks_csv(bundle))?);
        }
    }
    Ok(written)
}
