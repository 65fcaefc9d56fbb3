use super::config::{EstimateScope, InitialProfile, RunConfig};
use super::profiles::{barenblatt_coordinate, initial_values};
use super::report::{OracleComparison, ReportBundle, SolutionTable, SolveSummary};
use crate::error::{LabError, Result};
use crate::estimates::{
    build_cutoff, classical_ab_check, lemma33_residual, verify_cutoff, verify_estimate, RhsMode, Scope,
};
use crate::families::{default_grid, full_audit, ConditionReport, FlowEnv, FunctionTriple, DEFAULT_SLACK};
use crate::geometry::{ManifoldModel, ModelKind};
use crate::oracle::{convergence_order, mms_forcing, Barenblatt, MmsTarget};
use crate::solver::{solve, RunTrace};

/// Seed of the Barenblatt substitution gate.
const GATE_SEED: u64 = 0x5eed;

struct Setup {
    model: ManifoldModel,
    v0: Vec<f64>,
    env: FlowEnv,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let model = ManifoldModel::new(cfg.model, cfg.points)?;
    let v0 = initial_values(&cfg.initial, &model, &cfg.pme, cfg.t_start, cfg.seed)?;
    let m_bound = v0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ric = model.run_ricci_bound(cfg.t_end)?;
    let k = match cfg.k_override {
        Some(k) if k < ric * (1.0 - 1e-12) => {
            return Err(LabError::config(format!(
                "model.k = {k} is below the Ricci bound {ric} of the background"
            )))
        }
        Some(k) => k,
        None => ric,
    };
    let env = FlowEnv::new(k, m_bound, cfg.t_end)?;
    Ok(Setup { model, v0, env })
}

fn triple(cfg: &RunConfig, env: FlowEnv) -> Result<FunctionTriple> {
    FunctionTriple::new(cfg.family.clone(), env, cfg.pme)
}

fn audit(cfg: &RunConfig, env: FlowEnv) -> Result<ConditionReport> {
    full_audit(&triple(cfg, env)?, &default_grid(env.horizon), DEFAULT_SLACK)
}

fn run_solver(cfg: &RunConfig, s: &Setup) -> Result<RunTrace> {
    solve(
        &s.model,
        &s.v0,
        &cfg.pme,
        (cfg.t_start, cfg.t_end),
        &cfg.snapshot_times(),
        None,
        &cfg.solver,
    )
}

fn summarize(trace: &RunTrace) -> SolveSummary {
    let last = trace.snapshots.last().unwrap_or(&trace.initial);
    SolveSummary {
        steps: trace.dt_history.len(),
        t_start: trace.initial.t,
        t_end: last.t,
        min_dt: trace.dt_history.iter().copied().fold(f64::INFINITY, f64::min),
        max_dt: trace.dt_history.iter().copied().fold(0.0, f64::max),
        initial_max: trace.initial.max(),
        initial_min: trace.initial.min(),
        final_max: last.max(),
        final_min: last.min(),
        max_principle_defect: trace.max_principle_defect(),
        snapshot_times: trace.times(),
    }
}

/// Audits the configured triple without solving.
pub fn check_conditions(cfg: &RunConfig) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::new("check-conditions", cfg);
    let s = setup(cfg).map_err(|e| e.at_stage("setup"))?;
    let report = audit(cfg, s.env).map_err(|e| e.at_stage("admissibility"))?;
    bundle.record("admissibility", report.passed);
    bundle.conditions = Some(report);
    Ok(bundle)
}

/// Integrates the configured problem and keeps every snapshot.
pub fn solve_only(cfg: &RunConfig) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::new("solve", cfg);
    let s = setup(cfg).map_err(|e| e.at_stage("setup"))?;
    let trace = run_solver(cfg, &s).map_err(|e| e.at_stage("solve"))?;
    let summary = summarize(&trace);
    bundle.record("max-principle", summary.max_principle_defect <= 1e-12);
    bundle.solve = Some(summary);
    bundle.solution = Some(SolutionTable {
        coords: s.model.coords().to_vec(),
        times: trace.times(),
        values: trace.snapshots.iter().map(|p| p.values.clone()).collect(),
    });
    Ok(bundle)
}

fn compare_barenblatt(cfg: &RunConfig, s: &Setup, trace: &RunTrace, mass: f64) -> Result<OracleComparison> {
    let oracle = Barenblatt::new(&cfg.pme, mass)?;
    let gate_residual = oracle.self_check(cfg.t_start, cfg.t_end, 100, GATE_SEED)?;
    let last = trace
        .snapshots
        .last()
        .ok_or_else(|| LabError::usage("no snapshot to compare"))?;
    let radius = cfg.oracle_interior * oracle.support_radius(last.t)?;
    let mut worst = 0.0_f64;
    let mut peak = 0.0_f64;
    let mut points = 0;
    for (&x, &v) in s.model.coords().iter().zip(&last.values) {
        let y = barenblatt_coordinate(&s.model, x);
        if y.abs() <= radius {
            let exact = oracle.pressure(y, last.t)?;
            worst = worst.max((v - exact).abs());
            peak = peak.max(exact.abs());
            points += 1;
        }
    }
    if points == 0 {
        return Err(LabError::usage("Barenblatt interior holds no grid points"));
    }
    let relative_linf = worst / peak;
    Ok(OracleComparison {
        gate_residual,
        t: last.t,
        fraction: cfg.oracle_interior,
        points,
        relative_linf,
        tolerance: cfg.oracle_tolerance,
        passed: relative_linf <= cfg.oracle_tolerance,
    })
}

/// The full pipeline: admissibility → solve → estimate → optional lemma
/// residual, cutoff and classical checks. Errors name the failing stage.
pub fn run(cfg: &RunConfig) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::new("run", cfg);
    let s = setup(cfg).map_err(|e| e.at_stage("setup"))?;
    let barenblatt = match cfg.initial {
        InitialProfile::Barenblatt { mass } => Some(mass),
        _ => None,
    };

    let triple = if cfg.estimate.is_some() || cfg.lemma.is_some() {
        let stage = |e: LabError| e.at_stage("admissibility");
        let report = audit(cfg, s.env).map_err(stage)?;
        if !report.passed {
            return Err(stage(LabError::Inadmissible {
                violated: report.violated(),
            }));
        }
        bundle.record("admissibility", true);
        bundle.conditions = Some(report);
        Some(triple(cfg, s.env).map_err(stage)?)
    } else {
        None
    };

    let trace = run_solver(cfg, &s).map_err(|e| e.at_stage("solve"))?;
    let summary = summarize(&trace);
    bundle.record("max-principle", summary.max_principle_defect <= 1e-12);
    bundle.solve = Some(summary);

    if let Some(mass) = barenblatt {
        let cmp = compare_barenblatt(cfg, &s, &trace, mass).map_err(|e| e.at_stage("oracle"))?;
        bundle.record("barenblatt", cmp.passed);
        bundle.oracle = Some(cmp);
    }

    if let (Some(scope), Some(triple)) = (&cfg.estimate, &triple) {
        let stage = |e: LabError| e.at_stage("estimate");
        let (scope, mode) = match *scope {
            EstimateScope::Global => (Scope::Global, RhsMode::Corollary),
            EstimateScope::Ball { center, radius } => (
                Scope::Ball { x0: center, r: radius },
                cfg.mode.unwrap_or_else(|| RhsMode::for_family(&cfg.family)),
            ),
        };
        let v = verify_estimate(&s.model, &trace, triple, scope, cfg.constant, mode).map_err(stage)?;
        bundle.record("estimate", v.passed);
        bundle.estimate = Some(v);
    }

    if let (Some(tol), Some(triple)) = (cfg.lemma, &triple) {
        let mut res = lemma33_residual(&s.model, &trace, triple, s.env.k).map_err(|e| e.at_stage("lemma"))?;
        res.slices.clear();
        bundle.record("lemma", res.epsilon <= tol);
        bundle.lemma = Some(res);
        bundle.lemma_tolerance = Some(tol);
    }

    if cfg.cutoff.is_some() {
        let c = cutoff_constants(cfg, &s)?;
        bundle.record("cutoff", c.passed);
        bundle.cutoff = Some(c);
    }

    if let Some(tol) = cfg.classical {
        let model = &s.model;
        let check = match barenblatt {
            Some(mass) => {
                let oracle = Barenblatt::new(&cfg.pme, mass).map_err(|e| e.at_stage("classical"))?;
                let frac = cfg.oracle_interior;
                let inside = move |x: f64, t: f64| {
                    oracle
                        .support_radius(t)
                        .map_or(false, |r| barenblatt_coordinate(model, x).abs() <= frac * r)
                };
                classical_ab_check(model, &trace, Some(&inside))
            }
            None => classical_ab_check(model, &trace, None),
        }
        .map_err(|e| e.at_stage("classical"))?;
        bundle.record("classical", check.max_ratio <= 1.0 + tol);
        bundle.classical = Some(check);
    }
    Ok(bundle)
}

fn cutoff_constants(cfg: &RunConfig, s: &Setup) -> Result<crate::estimates::CutoffConstants> {
    let c = cfg
        .cutoff
        .as_ref()
        .ok_or_else(|| LabError::config("cutoff.enabled is false").at_stage("cutoff"))?;
    let stage = |e: LabError| e.at_stage("cutoff");
    let profile = build_cutoff(&s.model, c.center, c.radius, c.time).map_err(stage)?;
    verify_cutoff(&profile, &s.model, c.time, s.env.k, c.limit).map_err(stage)
}

/// Builds the configured cutoff and reports its normalized constants.
pub fn cutoff_test(cfg: &RunConfig) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::new("cutoff-test", cfg);
    let s = setup(cfg).map_err(|e| e.at_stage("setup"))?;
    let c = cutoff_constants(cfg, &s)?;
    bundle.record("cutoff", c.passed);
    bundle.cutoff = Some(c);
    Ok(bundle)
}

/// Minimum median order accepted by [`convergence_study`].
pub const MIN_ORDER: f64 = 1.9;

/// Manufactured-solution refinement study over `convergence.points`:
/// `2 + e^{-t} sin x` on circles, `2 + e^{-t} cos θ` on spheres. On spheres
/// one extra point is added so the pole-to-pole spacing is `π/N`.
pub fn convergence_study(cfg: &RunConfig) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::new("convergence", cfg);
    let stage = |e: LabError| e.at_stage("convergence");
    let (target, extra) = match cfg.model {
        ModelKind::FlatCircle { .. } => (MmsTarget::DecayingSine, 0),
        ModelKind::ShrinkingSphere { .. } => (MmsTarget::DecayingCosine, 1),
        ModelKind::FlatTorus { .. } => {
            return Err(stage(LabError::usage("convergence studies run on circles and spheres")))
        }
    };
    let mut errors = Vec::with_capacity(cfg.convergence_points.len());
    for &n in &cfg.convergence_points {
        let model = ManifoldModel::new(cfg.model, n + extra).map_err(stage)?;
        let forcing = mms_forcing(target, &model, &cfg.pme).map_err(stage)?;
        let f = move |x: f64, t: f64| forcing.eval(x, t);
        let v0 = target.sample(&model, cfg.t_start);
        let trace = solve(
            &model,
            &v0,
            &cfg.pme,
            (cfg.t_start, cfg.t_end),
            &[cfg.t_end],
            Some(&f),
            &cfg.solver,
        )
        .map_err(stage)?;
        let exact = target.sample(&model, cfg.t_end);
        let err = trace.snapshots[0]
            .values
            .iter()
            .zip(&exact)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        errors.push(err);
    }
    let table = convergence_order(&cfg.convergence_points, &errors).map_err(stage)?;
    bundle.record("convergence", !table.warning && table.median_order >= MIN_ORDER);
    bundle.convergence = Some(table);
    Ok(bundle)
}
