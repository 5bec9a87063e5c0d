use proptest::prelude::*;

use sbpg_core::config::ExperimentConfig;
use sbpg_core::game::{ActionValue, VariantKind};
use sbpg_core::learn::{fit_poly, follower_gradient, leader_gradient, PolyModel, Role, Sample};
use sbpg_core::maps::{PerformanceMap, SupportGrid};
use sbpg_core::plant::{build_bglp, step, BglpParams, PlantState};
use sbpg_core::trainer::{run_training, TrainingPlan};

fn action() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn visited_map(dims: usize, points: usize, visits: Vec<(usize, f64)>) -> PerformanceMap {
    let grid = SupportGrid::unit(dims, points).unwrap();
    let len = grid.len();
    let mut map = PerformanceMap::new(grid, ActionValue::new(0.5).unwrap());
    for (cell, a) in visits {
        map.update_cell(cell % len, ActionValue::new(a).unwrap(), 1.0).unwrap();
    }
    map
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn interpolation_weights_sum_to_one(
        dims in 1usize..=3,
        points in 2usize..=6,
        visits in prop::collection::vec((0usize..1000, action()), 1..12),
        state in prop::collection::vec(-0.1..1.1f64, 3),
        gamma in 1e-9..1.0f64,
    ) {
        let map = visited_map(dims, points, visits);
        let w = map.weights(&state[..dims], gamma).unwrap();
        let total: f64 = w.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum {total}");
        prop_assert!(w.iter().all(|&(_, w)| w >= 0.0));
    }

    #[test]
    fn interpolation_stays_within_visited_actions(
        dims in 1usize..=3,
        points in 2usize..=6,
        visits in prop::collection::vec((0usize..1000, action()), 1..12),
        state in prop::collection::vec(0.0..=1.0f64, 3),
        gamma in 1e-9..1.0f64,
    ) {
        let map = visited_map(dims, points, visits);
        let stored: Vec<f64> = map.cells().iter().filter(|c| c.visited()).map(|c| c.action.get()).collect();
        let lo = stored.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = stored.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a = map.interpolate(&state[..dims], gamma).unwrap().get();
        prop_assert!(a >= lo - 1e-12 && a <= hi + 1e-12, "{a} outside [{lo}, {hi}]");
    }

    #[test]
    fn best_utility_never_decreases(updates in prop::collection::vec((0usize..9, action(), -5.0..5.0f64), 1..60)) {
        let mut map = PerformanceMap::new(SupportGrid::unit(2, 3).unwrap(), ActionValue::new(0.5).unwrap());
        for (cell, a, u) in updates {
            let before = map.cell(cell).utility;
            map.update_cell(cell, ActionValue::new(a).unwrap(), u).unwrap();
            prop_assert!(map.cell(cell).utility >= before);
        }
    }

    #[test]
    fn plant_conserves_mass_and_respects_capacity(
        seq in prop::collection::vec(prop::collection::vec(action(), 5), 1..200),
        dt in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0]),
    ) {
        let plant = build_bglp(&BglpParams::default()).unwrap();
        let mut state = PlantState::initial(&plant);
        for a in &seq {
            let actions: Vec<ActionValue> = a.iter().map(|&v| ActionValue::new(v).unwrap()).collect();
            state = step(&plant, &state, &actions, dt).unwrap().0;
            prop_assert!(state.mass_residual(&plant).abs() <= 1e-9);
            for (f, r) in state.fills.iter().zip(&plant.reservoirs) {
                prop_assert!(*f >= 0.0 && *f <= r.capacity);
            }
            prop_assert!(state.demand_ledger <= 0.0);
        }
    }

    #[test]
    fn utility_terms_stay_in_range(seq in prop::collection::vec(prop::collection::vec(action(), 5), 1..40)) {
        let plant = build_bglp(&BglpParams::default()).unwrap();
        let mut state = PlantState::initial(&plant);
        for a in &seq {
            let actions: Vec<ActionValue> = a.iter().map(|&v| ActionValue::new(v).unwrap()).collect();
            state = step(&plant, &state, &actions, plant.dt).unwrap().0;
        }
        for p in 0..plant.players() {
            let t = state.objective_terms(&plant, p);
            for v in [t.fill_prev, t.fill_next, t.power] {
                prop_assert!(v > 0.0 && v <= 1.0);
            }
            if let Some(d) = t.demand {
                prop_assert!(d > 0.0 && d <= 1.0);
            }
        }
    }

    #[test]
    fn quadratic_fit_recovers_coefficients(coeffs in prop::collection::vec(-5.0..5.0f64, 6)) {
        let truth = PolyModel::new(2, coeffs.clone()).unwrap();
        let mut samples = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                let (a_l, a_f) = (i as f64 / 5.0, j as f64 / 5.0);
                let u = truth.eval(a_l, a_f);
                samples.push(Sample { a_l, a_f, u_l: u, u_f: u });
            }
        }
        let fit = fit_poly(&samples, Role::Leader, 2, 0.0).unwrap();
        for (got, want) in fit.coeffs().iter().zip(&coeffs) {
            prop_assert!((got - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn gradients_match_central_differences(
        ul in prop::collection::vec(-3.0..3.0f64, 6),
        uf in prop::collection::vec(-3.0..3.0f64, 6),
        a_l in 0.05..0.95f64,
        a_f in 0.05..0.95f64,
    ) {
        let (ml, mf) = (PolyModel::new(2, ul).unwrap(), PolyModel::new(2, uf).unwrap());
        let h = 1e-4;
        let fd_f = (mf.eval(a_l, a_f + h) - mf.eval(a_l, a_f - h)) / (2.0 * h);
        let scale = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
        prop_assert!(scale(follower_gradient(&mf, a_l, a_f), fd_f) < 1e-6);

        let g = leader_gradient(&ml, &mf, a_l, a_f, 1e-6);
        let d_ll = (ml.eval(a_l + h, a_f) - ml.eval(a_l - h, a_f)) / (2.0 * h);
        if g.fallback {
            prop_assert!(scale(g.value, d_ll) < 1e-6);
        } else {
            let d_lf = (ml.eval(a_l, a_f + h) - ml.eval(a_l, a_f - h)) / (2.0 * h);
            let k = 1e-2;
            let cross = (mf.eval(a_l + k, a_f + k) - mf.eval(a_l + k, a_f - k) - mf.eval(a_l - k, a_f + k)
                + mf.eval(a_l - k, a_f - k))
                / (4.0 * k * k);
            let curv = (mf.eval(a_l, a_f + k) - 2.0 * mf.eval(a_l, a_f) + mf.eval(a_l, a_f - k)) / (k * k);
            prop_assume!(curv.abs() > 0.1);
            let fd = d_ll - cross / curv * d_lf;
            prop_assert!(scale(g.value, fd) < 1e-6, "{} vs {}", g.value, fd);
        }
    }
}

fn short_plan(kind: VariantKind, seed: u64, parallel: bool) -> TrainingPlan {
    let mut cfg = ExperimentConfig::default();
    cfg.run.episodes = 2;
    cfg.run.horizon = 600.0;
    cfg.run.seed = seed;
    cfg.run.parallel = parallel;
    cfg.policy.points_per_dim = 8;
    cfg.learner.ou.enabled = true;
    TrainingPlan::from_config(&cfg, kind).unwrap()
}

#[test]
fn training_is_identical_across_thread_counts() {
    for kind in [VariantKind::Sbpg, VariantKind::Ds2, VariantKind::Stack] {
        let serial = run_training(&short_plan(kind, 5, false)).unwrap();
        let runs: Vec<_> = [1, 3]
            .into_iter()
            .map(|threads| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                pool.install(|| run_training(&short_plan(kind, 5, true)).unwrap())
            })
            .collect();
        for r in &runs {
            for (a, b) in serial.episodes.iter().zip(&r.episodes) {
                assert_eq!(a.trace, b.trace, "{kind}");
            }
            let maps = |o: &sbpg_core::trainer::TrainingOutcome| o.learners.iter().map(|l| l.maps()).collect::<Vec<_>>();
            assert_eq!(maps(&serial), maps(r));
        }
    }
}

#[test]
fn different_seeds_explore_differently() {
    let a = run_training(&short_plan(VariantKind::Sbpg, 1, false)).unwrap();
    let b = run_training(&short_plan(VariantKind::Sbpg, 2, false)).unwrap();
    assert_ne!(a.episodes[0].trace, b.episodes[0].trace);
}
