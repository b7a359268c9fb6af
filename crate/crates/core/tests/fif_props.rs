mod common;

use fracsurf::{build_system, SampledField};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn passes_through_nodes(grid in common::grid(5), alpha in -0.9f64..0.9) {
        let sys = build_system(&grid, alpha).unwrap();
        for (i, &x) in grid.xs().iter().enumerate() {
            for (j, &y) in grid.ys().iter().enumerate() {
                prop_assert!((sys.evaluate(x, y, TOL).unwrap() - grid.z(i, j)).abs() <= TOL);
            }
        }
    }

    #[test]
    fn operator_contracts(grid in common::grid(4), alpha in -0.9f64..0.9, seed in prop::collection::vec(-2.0f64..2.0, 2 * 17 * 13)) {
        let sys = build_system(&grid, alpha).unwrap();
        let (g0, h0) = seed.split_at(17 * 13);
        let g = SampledField::new(sys.rect(), ndarray::Array2::from_shape_vec((17, 13), g0.to_vec()).unwrap()).unwrap();
        let h = g.with_values(ndarray::Array2::from_shape_vec((17, 13), h0.to_vec()).unwrap()).unwrap();
        let before = g.max_abs_diff(&h).unwrap();
        let after = sys.apply_operator(&g).unwrap().max_abs_diff(&sys.apply_operator(&h).unwrap()).unwrap();
        prop_assert!(after <= sys.sigma() * before * (1.0 + 1e-12) + 1e-15);
    }

    // The residuals below compare values at points known only to rounding
    // accuracy. With |alpha| above the smallest map slope the surface is
    // Holder of order ln|alpha| / ln(slope) < 1, and an ulp-sized shift of
    // the argument moves the value far more than `tol`; the bound is stated
    // where the surface is Lipschitz.
    #[test]
    fn self_referential_equation(grid in common::grid(4), t in -0.99f64..0.99) {
        let sys = build_system(&grid, t * common::min_slope(&grid)).unwrap();
        prop_assert!(sys.check_self_referential(200, TOL).unwrap() <= 2.0 * TOL);
    }

    #[test]
    fn continuous_across_seams(grid in common::grid(5), alpha in -0.9f64..0.9, t in 0.0f64..=1.0) {
        let sys = build_system(&grid, alpha).unwrap();
        let (xs, ys) = (grid.xs(), grid.ys());
        let y = ys[0] + t * (ys[ys.len() - 1] - ys[0]);
        for &x in &xs[1..xs.len() - 1] {
            let left = sys.evaluate(x, y, TOL).unwrap();
            let right = sys.evaluate_right_ties(x, y, TOL).unwrap();
            prop_assert!((left - right).abs() <= 2.0 * TOL);
        }
        let x = xs[0] + t * (xs[xs.len() - 1] - xs[0]);
        for &y in &ys[1..ys.len() - 1] {
            let below = sys.evaluate(x, y, TOL).unwrap();
            let above = sys.evaluate_right_ties(x, y, TOL).unwrap();
            prop_assert!((below - above).abs() <= 2.0 * TOL);
        }
    }

    #[test]
    fn chaos_game_lies_on_graph(grid in common::grid(4), t in -0.99f64..0.99, seed in any::<u64>()) {
        let sys = build_system(&grid, t * common::min_slope(&grid)).unwrap();
        let cloud = sys.chaos_game(2000, seed, 20).unwrap();
        prop_assert_eq!(cloud.len(), 1980);
        prop_assert!(sys.attractor_distance(&cloud, TOL).unwrap() <= 2.0 * TOL);
        prop_assert_eq!(cloud, sys.chaos_game(2000, seed, 20).unwrap());
    }

    #[test]
    fn matching_conditions(grid in common::grid(5), alpha in -0.9f64..0.9) {
        let sys = build_system(&grid, alpha).unwrap();
        prop_assert!(sys.check_matching(16) <= 1e-12);
    }
}

#[test]
fn scaling_must_contract() {
    let grid = fracsurf::NodeGrid::from_fn(|x, y| x + y, 3, 3, common::unit()).unwrap();
    assert!(build_system(&grid, 1.0).is_err());
    assert!(build_system(&grid, -0.999).is_ok());
}
