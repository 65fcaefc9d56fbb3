//! Explicit time integration of the pressure equation
//! `v_t = (m-1) v Δ_{g(t)} v + |∇v|²_{g(t)} + f(x, t)`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::families::{FlowEnv, PmeParameters};
use crate::geometry::ManifoldModel;

/// Default CFL safety factor.
pub const DEFAULT_SAFETY: f64 = 0.2;

/// Guards `stable_dt` against `v → 0`.
const DT_EPSILON: f64 = 1e-30;

/// Forcing term `f(x, t)` added to the right-hand side.
pub type Forcing<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    /// `v > 0` everywhere (estimate runs).
    Strict,
    /// `v ≥ 0`; for compactly supported validation data.
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub safety: f64,
    pub positivity: Positivity,
    pub max_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            safety: DEFAULT_SAFETY,
            positivity: Positivity::Strict,
            max_steps: 50_000_000,
        }
    }
}

/// Pressure values on the model grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureField {
    pub values: Vec<f64>,
    pub t: f64,
}

impl PressureField {
    pub fn new(values: Vec<f64>, t: f64) -> Self {
        Self { values, t }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Extremes of `v` after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepExtrema {
    pub t: f64,
    pub min: f64,
    pub max: f64,
}

/// Snapshots of a solve plus the per-step history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub initial: PressureField,
    pub snapshots: Vec<PressureField>,
    pub pme: PmeParameters,
    /// `M = max v₀`, `K = sup |Ric|` over the run, `T = t_end`.
    pub env: FlowEnv,
    pub dt_history: Vec<f64>,
    pub extrema: Vec<StepExtrema>,
}

impl RunTrace {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.snapshots
            .iter()
            .map(PressureField::max)
            .fold(self.initial.max(), f64::max)
    }

    /// Largest violation of the discrete maximum principle across all steps,
    /// relative to `max |v₀|`: `max(0, Δmax, -Δmin) / ‖v₀‖∞`.
    pub fn max_principle_defect(&self) -> f64 {
        let norm = self.initial.max_abs().max(f64::MIN_POSITIVE);
        let mut prev = StepExtrema {
            t: self.initial.t,
            min: self.initial.min(),
            max: self.initial.max(),
        };
        let mut worst = 0.0_f64;
        for e in &self.extrema {
            worst = worst.max(e.max - prev.max).max(prev.min - e.min);
            prev = *e;
        }
        worst / norm
    }
}

/// `v = m/(m-1) u^{m-1}`.
pub fn to_pressure(u: &[f64], m: f64) -> Result<Vec<f64>> {
    check_exponent(m)?;
    u.iter()
        .map(|&x| {
            if x > 0.0 && x.is_finite() {
                Ok(m / (m - 1.0) * x.powf(m - 1.0))
            } else {
                Err(LabError::domain(format!("density must be positive, got {x}")))
            }
        })
        .collect()
}

/// `u = ((m-1) v / m)^{1/(m-1)}`.
pub fn from_pressure(v: &[f64], m: f64) -> Result<Vec<f64>> {
    check_exponent(m)?;
    v.iter()
        .map(|&p| {
            if p >= 0.0 && p.is_finite() {
                Ok(((m - 1.0) * p / m).powf(1.0 / (m - 1.0)))
            } else {
                Err(LabError::domain(format!("pressure must be non-negative, got {p}")))
            }
        })
        .collect()
}

fn check_exponent(m: f64) -> Result<()> {
    if m.is_finite() && m > 1.0 {
        Ok(())
    } else {
        Err(LabError::domain(format!("exponent m must be > 1, got {m}")))
    }
}

/// Reusable work arrays for right-hand-side evaluation.
struct Workspace {
    lap: Vec<f64>,
    deriv: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            lap: vec![0.0; n],
            deriv: vec![0.0; n],
        }
    }

    fn rhs(
        &mut self,
        model: &ManifoldModel,
        v: &[f64],
        t: f64,
        m: f64,
        forcing: Option<Forcing<'_>>,
        out: &mut [f64],
    ) -> Result<()> {
        model.laplacian_into(v, t, &mut self.lap)?;
        model.derivative_into(v, &mut self.deriv);
        let ginv = model.inverse_metric(t)?;
        let coords = model.coords();
        for i in 0..v.len() {
            let mut r = (m - 1.0) * v[i] * self.lap[i] + self.deriv[i] * self.deriv[i] * ginv;
            if let Some(f) = forcing {
                r += f(coords[i], t);
            }
            out[i] = r;
        }
        Ok(())
    }
}

/// Right side `(m-1) v Δv + |∇v|²` of the unforced pressure equation.
pub fn pressure_rhs(model: &ManifoldModel, v: &[f64], t: f64, m: f64) -> Result<Vec<f64>> {
    if v.len() != model.len() {
        return Err(LabError::usage("field length does not match the grid"));
    }
    let mut out = vec![0.0; v.len()];
    Workspace::new(v.len()).rhs(model, v, t, m, None, &mut out)?;
    Ok(out)
}

/// `dt = safety · h²_eff / ((m-1) max v + ε)`, with `h²_eff = s(t) h²` on the
/// sphere.
pub fn stable_dt(model: &ManifoldModel, field: &PressureField, m: f64, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(LabError::usage(format!("safety factor must lie in (0, 1], got {safety}")));
    }
    let h = model.spacing();
    let h2_eff = h * h * model.metric_scale(field.t)?;
    Ok(safety * h2_eff / ((m - 1.0) * field.max() + DT_EPSILON))
}

fn check_step(values: &[f64], t: f64, positivity: Positivity) -> Result<()> {
    let mut min = f64::INFINITY;
    for &v in values {
        if !v.is_finite() {
            return Err(LabError::Instability { t });
        }
        min = min.min(v);
    }
    let lost = match positivity {
        Positivity::Strict => min <= 0.0,
        Positivity::NonNegative => min < 0.0,
    };
    if lost {
        return Err(LabError::PositivityLoss { t, min });
    }
    Ok(())
}

/// One forward-Euler step.
pub fn step(
    model: &ManifoldModel,
    field: &PressureField,
    pme: &PmeParameters,
    dt: f64,
    forcing: Option<Forcing<'_>>,
    positivity: Positivity,
) -> Result<PressureField> {
    if field.values.len() != model.len() {
        return Err(LabError::usage("field length does not match the grid"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::usage(format!("time step must be positive, got {dt}")));
    }
    let mut ws = Workspace::new(model.len());
    let mut rhs = vec![0.0; model.len()];
    ws.rhs(model, &field.values, field.t, pme.m(), forcing, &mut rhs)?;
    let values: Vec<f64> = field.values.iter().zip(&rhs).map(|(v, r)| v + dt * r).collect();
    let t = field.t + dt;
    check_step(&values, t, positivity)?;
    Ok(PressureField { values, t })
}

/// Integrates from `t_span.0` to `t_span.1`, landing exactly on every
/// requested snapshot time.
pub fn solve(
    model: &ManifoldModel,
    v0: &[f64],
    pme: &PmeParameters,
    t_span: (f64, f64),
    snapshot_times: &[f64],
    forcing: Option<Forcing<'_>>,
    opts: &SolveOptions,
) -> Result<RunTrace> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0 && t0 >= 0.0) {
        return Err(LabError::usage(format!("invalid time span [{t0}, {t1}]")));
    }
    if v0.len() != model.len() {
        return Err(LabError::usage(format!(
            "initial data has {} values, grid has {}",
            v0.len(),
            model.len()
        )));
    }
    if snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::usage("snapshot times must be strictly increasing"));
    }
    if snapshot_times.iter().any(|&s| s < t0 || s > t1) {
        return Err(LabError::usage("snapshot times must lie inside the time span"));
    }
    model.metric_scale(t1)?;
    let initial = PressureField::new(v0.to_vec(), t0);
    check_step(&initial.values, t0, opts.positivity)?;

    let env = FlowEnv::new(model.run_ricci_bound(t1)?, initial.max(), t1)?;
    let n = model.len();
    let mut ws = Workspace::new(n);
    let mut rhs = vec![0.0; n];
    let mut v = initial.values.clone();
    let mut t = t0;
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut dt_history = Vec::new();
    let mut extrema = Vec::new();

    let mut targets = snapshot_times.iter().copied().peekable();
    while targets.peek() == Some(&t0) {
        snapshots.push(initial.clone());
        targets.next();
    }
    let mut steps = 0usize;
    while t < t1 {
        let next = targets.peek().copied().unwrap_or(t1);
        let current = PressureField { values: v, t };
        let mut dt = stable_dt(model, &current, pme.m(), opts.safety)?;
        v = current.values;
        let mut landed = false;
        if t + dt >= next - 1e-12 * next.abs().max(1.0) {
            dt = next - t;
            landed = true;
        }
        ws.rhs(model, &v, t, pme.m(), forcing, &mut rhs)?;
        for (vi, ri) in v.iter_mut().zip(&rhs) {
            *vi += dt * ri;
        }
        t = if landed { next } else { t + dt };
        check_step(&v, t, opts.positivity)?;
        dt_history.push(dt);
        let (mn, mx) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        extrema.push(StepExtrema { t, min: mn, max: mx });
        if landed {
            while targets.peek() == Some(&next) {
                snapshots.push(PressureField::new(v.clone(), t));
                targets.next();
            }
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(LabError::usage(format!(
                "step budget of {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
    }
    Ok(RunTrace {
        initial,
        snapshots,
        pme: *pme,
        env,
        dt_history,
        extrema,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize) -> ManifoldModel {
        ManifoldModel::flat_circle(2.0 * PI, n).unwrap()
    }

    #[test]
    fn pressure_substitution_examples() {
        assert_eq!(to_pressure(&[1.0], 2.0).unwrap(), vec![2.0]);
        assert!((to_pressure(&[4.0], 3.0).unwrap()[0] - 24.0).abs() < 1e-12);
        assert_eq!(from_pressure(&[2.0], 2.0).unwrap(), vec![1.0]);
        assert!((from_pressure(&[24.0], 3.0).unwrap()[0] - 4.0).abs() < 1e-12);
        assert!(to_pressure(&[0.0], 2.0).is_err());
        assert!(to_pressure(&[1.0], 1.0).is_err());
        assert!(from_pressure(&[-1.0], 2.0).is_err());
    }

    #[test]
    fn stable_dt_formula() {
        let m = ManifoldModel::flat_circle(3.2, 32).unwrap(); // h = 0.1
        let f = PressureField::new(vec![2.0; 32], 0.0);
        let dt = stable_dt(&m, &f, 2.0, 0.2).unwrap();
        assert!((dt - 1e-3).abs() < 1e-15);
        let g = PressureField::new(vec![4.0; 32], 0.0);
        assert!((stable_dt(&m, &g, 2.0, 0.2).unwrap() - 0.5e-3).abs() < 1e-15);
        assert!(stable_dt(&m, &f, 2.0, 0.0).is_err());
        assert!(stable_dt(&m, &f, 2.0, 1.5).is_err());
    }

    #[test]
    fn sphere_dt_shrinks_with_metric() {
        let s = ManifoldModel::shrinking_sphere(1.0, 33).unwrap();
        let early = stable_dt(&s, &PressureField::new(vec![1.0; 33], 0.0), 2.0, 0.2).unwrap();
        let late = stable_dt(&s, &PressureField::new(vec![1.0; 33], 0.49), 2.0, 0.2).unwrap();
        assert!(late < early * 0.03);
        assert!(matches!(
            stable_dt(&s, &PressureField::new(vec![1.0; 33], 0.5), 2.0, 0.2),
            Err(LabError::Extinction { .. })
        ));
    }

    #[test]
    fn solve_refuses_runs_past_extinction() {
        let s = ManifoldModel::shrinking_sphere(1.0, 33).unwrap();
        let pme = PmeParameters::new(2.0, 2).unwrap();
        let r = solve(&s, &[1.0; 33], &pme, (0.0, 0.6), &[], None, &SolveOptions::default());
        assert!(matches!(r, Err(LabError::Extinction { .. })));
    }

    #[test]
    fn constant_data_is_stationary() {
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let m = circle(32);
        let trace = solve(&m, &[1.0; 32], &pme, (0.0, 0.5), &[0.1, 0.5], None, &SolveOptions::default()).unwrap();
        assert_eq!(trace.snapshots.len(), 2);
        for s in &trace.snapshots {
            assert!(s.values.iter().all(|&v| v == 1.0));
        }
        assert_eq!(trace.snapshots[1].t, 0.5);
        assert_eq!(trace.env.m_bound, 1.0);

        let sphere = ManifoldModel::shrinking_sphere(2.0, 33).unwrap();
        let pme2 = PmeParameters::new(2.0, 2).unwrap();
        let tr = solve(&sphere, &[3.0; 33], &pme2, (0.0, 0.4), &[0.4], None, &SolveOptions::default()).unwrap();
        assert!(tr.snapshots[0].values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn snapshots_hit_requested_times_exactly() {
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let m = circle(32);
        let v0: Vec<f64> = m.coords().iter().map(|x| 2.0 + 0.1 * x.sin()).collect();
        let times: Vec<f64> = (1..=10).map(|k| k as f64 * 0.05).collect();
        let trace = solve(&m, &v0, &pme, (0.0, 0.5), &times, None, &SolveOptions::default()).unwrap();
        assert_eq!(trace.times(), times);
    }

    #[test]
    fn snapshot_validation() {
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let m = circle(32);
        let opts = SolveOptions::default();
        assert!(solve(&m, &[1.0; 32], &pme, (0.0, 1.0), &[0.5, 0.2], None, &opts).is_err());
        assert!(solve(&m, &[1.0; 32], &pme, (0.0, 1.0), &[1.5], None, &opts).is_err());
        assert!(solve(&m, &[1.0; 31], &pme, (0.0, 1.0), &[], None, &opts).is_err());
        let mut bad = vec![1.0; 32];
        bad[0] = 0.0;
        assert!(matches!(
            solve(&m, &bad, &pme, (0.0, 1.0), &[], None, &opts),
            Err(LabError::PositivityLoss { .. })
        ));
    }

    #[test]
    fn oversized_step_loses_positivity_or_blows_up() {
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let m = circle(64);
        let v0: Vec<f64> = m.coords().iter().map(|x| 1.0 + 0.9 * (3.0 * x).sin()).collect();
        let f = PressureField::new(v0, 0.0);
        let err = step(&m, &f, &pme, 1.0, None, Positivity::Strict).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn single_step_max_principle() {
        let pme = PmeParameters::new(2.0, 1).unwrap();
        let m = circle(64);
        let v0: Vec<f64> = m.coords().iter().map(|x| 2.0 + 0.5 * x.sin() + 0.2 * (2.0 * x).cos()).collect();
        let f = PressureField::new(v0, 0.0);
        let dt = stable_dt(&m, &f, 2.0, 0.2).unwrap();
        let g = step(&m, &f, &pme, dt, None, Positivity::Strict).unwrap();
        assert!(g.max() <= f.max() + 1e-12 * f.max_abs());
        assert!(g.min() >= f.min() - 1e-12 * f.max_abs());
    }

    #[test]
    fn forward_backward_returns_to_start() {
        // v + dt R(v) - dt R(v + dt R(v)) = v + O(dt²)
        let m = circle(64);
        let v: Vec<f64> = m.coords().iter().map(|x| 2.0 + 0.1 * x.sin()).collect();
        let mut prev = f64::NAN;
        for dt in [1e-3, 5e-4, 2.5e-4] {
            let r = pressure_rhs(&m, &v, 0.0, 2.0).unwrap();
            let fwd: Vec<f64> = v.iter().zip(&r).map(|(a, b)| a + dt * b).collect();
            let r2 = pressure_rhs(&m, &fwd, 0.0, 2.0).unwrap();
            let back: Vec<f64> = fwd.iter().zip(&r2).map(|(a, b)| a - dt * b).collect();
            let err = back.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if prev.is_finite() {
                assert!((prev / err - 4.0).abs() < 0.2, "{}", prev / err);
            }
            prev = err;
        }
    }
}
