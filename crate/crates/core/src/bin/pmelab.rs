use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pmelab::harness::{
    self, apply_overrides, axes_from_config, emit, emit_sweep, load_config, ConfigMap, OutputFormat, ReportBundle,
    RunConfig, SweepAxis, DEFAULT_SWEEP_CAP,
};
use pmelab::LabError;

#[derive(Parser)]
#[command(name = "pmelab", version, about = "Porous medium equation on Ricci-flow backgrounds")]
struct Cli {
    /// Sectioned key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "PMELAB_OUT", default_value = "pmelab-out")]
    out: PathBuf,
    /// Override one config entry, `section.key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "K=V")]
    set: Vec<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value = "csv")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit the configured function triple.
    CheckConditions,
    /// Integrate the pressure equation and write every snapshot.
    Solve,
    /// Run the full pipeline with the estimate check.
    VerifyEstimate,
    /// Run the pipeline with the differential-inequality residual.
    LemmaResidual,
    /// Build the configured cutoff and report its constants.
    CutoffTest,
    /// Manufactured-solution refinement study.
    Convergence,
    /// Cartesian-product sweep of full runs.
    Sweep {
        /// `section.key=v1,v2,...`. Repeatable; adds to `[sweep]` in the config.
        #[arg(long = "axis", value_name = "KEY=VALUES")]
        axes: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_SWEEP_CAP)]
        cap: usize,
    },
}

fn base_map(cli: &Cli) -> pmelab::Result<ConfigMap> {
    let mut map = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigMap::new(),
    };
    apply_overrides(&mut map, &cli.set)?;
    Ok(map)
}

fn single(cli: &Cli, mut map: ConfigMap) -> pmelab::Result<i32> {
    let default = |map: &mut ConfigMap, k: &str, v: &str| {
        map.entry(k.to_string()).or_insert_with(|| v.to_string());
    };
    let op: fn(&RunConfig) -> pmelab::Result<ReportBundle> = match cli.command {
        Command::CheckConditions => harness::check_conditions,
        Command::Solve => harness::solve_only,
        Command::VerifyEstimate => {
            map.insert("estimate.enabled".into(), "true".into());
            harness::run
        }
        Command::LemmaResidual => {
            map.insert("lemma.enabled".into(), "true".into());
            default(&mut map, "estimate.enabled", "false");
            harness::run
        }
        Command::CutoffTest => {
            map.insert("cutoff.enabled".into(), "true".into());
            harness::cutoff_test
        }
        Command::Convergence => harness::convergence_study,
        Command::Sweep { .. } => unreachable!("handled by sweep"),
    };
    let cfg = RunConfig::from_map(&map)?;
    let bundle = op(&cfg)?;
    let files = emit(&bundle, &cli.out, cli.format)?;
    println!("{}: {}", bundle.operation, bundle.verdict.as_str());
    for c in &bundle.checks {
        println!("  {:<16} {}", c.name, if c.passed { "pass" } else { "FAIL" });
    }
    for f in files {
        println!("  wrote {}", f.display());
    }
    Ok(bundle.verdict.exit_code())
}

fn sweep(cli: &Cli, map: ConfigMap, extra: &[String], cap: usize) -> pmelab::Result<i32> {
    let (base, mut axes) = axes_from_config(&map);
    for spec in extra {
        let axis = SweepAxis::parse(spec)?;
        axes.retain(|a| a.key != axis.key);
        axes.push(axis);
    }
    let report = harness::sweep(&base, &axes, cli.jobs, cap)?;
    let path = emit_sweep(&report, &cli.out)?;
    if cli.format == OutputFormat::Json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| LabError::Usage(e.to_string()))?;
        let p = cli.out.join("sweep.json");
        std::fs::write(&p, json).map_err(|e| LabError::Io { path: p, source: e })?;
    }
    let passed = report.rows.iter().filter(|r| r.exit_code == 0).count();
    println!("sweep: {passed}/{} runs passed", report.rows.len());
    println!("  wrote {}", path.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = base_map(&cli).and_then(|map| match &cli.command {
        Command::Sweep { axes, cap } => sweep(&cli, map, axes, *cap),
        _ => single(&cli, map),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
