use std::f64::consts::PI;

use pmelab::harness::random_smooth;
use pmelab::solver::{solve, stable_dt, PressureField, SolveOptions};
use pmelab::{ManifoldModel, PmeParameters};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximum_principle_on_random_data(seed in any::<u64>(), m in 1.2f64..=3.0, sphere in any::<bool>()) {
        let (model, pme) = if sphere {
            (ManifoldModel::shrinking_sphere(2.0, 65).unwrap(), PmeParameters::new(m, 2).unwrap())
        } else {
            (ManifoldModel::flat_circle(2.0 * PI, 64).unwrap(), PmeParameters::new(m, 1).unwrap())
        };
        let v0 = random_smooth(&model, 2.0, 1.0, 5, seed).unwrap();
        let trace = solve(&model, &v0, &pme, (0.0, 0.2), &[0.1, 0.2], None, &SolveOptions::default()).unwrap();
        prop_assert!(trace.max_principle_defect() <= 1e-12);
        prop_assert!(trace.max_value() <= trace.env.m_bound);
        prop_assert_eq!(trace.times(), vec![0.1, 0.2]);
    }

    #[test]
    fn step_size_scales_with_safety(safety in 0.01f64..=1.0, level in 0.5f64..=4.0) {
        let model = ManifoldModel::flat_circle(2.0 * PI, 64).unwrap();
        let field = PressureField::new(vec![level; 64], 0.0);
        let full = stable_dt(&model, &field, 2.0, 1.0).unwrap();
        let part = stable_dt(&model, &field, 2.0, safety).unwrap();
        prop_assert!((part / full - safety).abs() < 1e-12);
    }
}

#[test]
fn constant_data_is_exactly_stationary_on_the_sphere() {
    let model = ManifoldModel::shrinking_sphere(1.5, 33).unwrap();
    let pme = PmeParameters::new(2.0, 2).unwrap();
    let trace = solve(&model, &[3.0; 33], &pme, (0.0, 1.0), &[1.0], None, &SolveOptions::default()).unwrap();
    assert!(trace.snapshots[0].values.iter().all(|&v| v == 3.0));
}
