use pmelab::families::{full_audit, log_grid, RatioMode};
use pmelab::{Family, FlowEnv, FunctionTriple, PmeParameters};
use proptest::prelude::*;

fn triple(family: Family, m: f64, n: usize, x: f64, horizon: f64) -> FunctionTriple {
    let env = FlowEnv::new(1.0, x / (m - 1.0), horizon).unwrap();
    FunctionTriple::new(family, env, PmeParameters::new(m, n).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_are_admissible(m in 1.0001f64..=4.0, n in 1usize..=3, lx in -2.0f64..=2.0) {
        let x = 10f64.powf(lx);
        // keep e^{4xt} representable
        let horizon = (100.0 / x).min(10.0);
        let grid = log_grid(1e-3 * horizon, horizon, 60);
        for family in [Family::Hamilton, Family::LiXu, Family::LinearLiXu { c: 1.0 }] {
            let tr = triple(family.clone(), m, n, x, horizon);
            let r = full_audit(&tr, &grid, 1e-10).unwrap();
            prop_assert!(r.passed, "{family:?} m={m} n={n} x={x}: {:?}", r.violated());
            for mg in &r.margins {
                prop_assert!(mg.min_relative >= -1e-12, "{family:?} {}: {}", mg.name, mg.min_relative);
            }
        }
    }

    #[test]
    fn li_yau_admissible_before_alpha_over_x(
        m in 1.0001f64..=4.0, n in 1usize..=3, lx in -2.0f64..=2.0,
        alpha in 1.01f64..=5.0, theta in 0.01f64..=2.0,
    ) {
        let x = 10f64.powf(lx);
        let horizon = 0.999 * alpha / x;
        let tr = triple(Family::LiYau { alpha, theta }, m, n, x, horizon);
        let r = full_audit(&tr, &log_grid(1e-3 * horizon, horizon, 60), 1e-10).unwrap();
        prop_assert!(r.passed, "{:?}", r.violated());
    }

    #[test]
    fn li_xu_alpha_stays_in_unit_band(m in 1.0001f64..=4.0, n in 1usize..=3, lx in -2.0f64..=2.0, lt in -3.0f64..=1.0) {
        let x = 10f64.powf(lx);
        let t = 10f64.powf(lt);
        let tr = triple(Family::LiXu, m, n, x, 10.0);
        let s = tr.eval(t).unwrap();
        // saturates to 2 in floating point once e^{-4xt} underflows
        prop_assert!(s.alpha > 1.0 && s.alpha <= 2.0, "alpha = {}", s.alpha);
        prop_assert!(s.alpha_prime >= 0.0 && s.gamma_prime >= 0.0);
    }

    #[test]
    fn monotone_in_time(m in 1.0001f64..=4.0, n in 1usize..=3, lx in -2.0f64..=1.0, t0 in 1e-3f64..1.0, dt in 1e-3f64..1.0) {
        let x = 10f64.powf(lx);
        for family in [Family::Hamilton, Family::LiXu, Family::LinearLiXu { c: 1.0 }] {
            let tr = triple(family, m, n, x, 10.0);
            let (a, b) = (tr.eval(t0).unwrap(), tr.eval(t0 + dt).unwrap());
            prop_assert!(b.alpha >= a.alpha && b.gamma >= a.gamma);
        }
    }

    #[test]
    fn ratio_modes_are_finite(m in 1.0001f64..=4.0, lx in -2.0f64..=1.0) {
        let x = 10f64.powf(lx);
        let grid = log_grid(1e-3, 10.0, 50);
        for (family, mode) in [(Family::LiXu, RatioMode::Alpha4), (Family::Hamilton, RatioMode::Plain)] {
            let tr = triple(family, m, 1, x, 10.0);
            let r = full_audit(&tr, &grid, 1e-10).unwrap();
            let ratio = r.ratio.unwrap();
            prop_assert_eq!(ratio.mode, mode);
            prop_assert!(ratio.sup.is_some_and(f64::is_finite));
        }
    }
}
