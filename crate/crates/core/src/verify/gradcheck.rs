use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::game::ActionValue;
use crate::learn::{
    basis_len, follower_gradient, leader_gradient, multi_step_follower, MomentumParams, OuNoise, PolyModel,
};

/// `|a - b| / max(|a|, |b|, 1)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Unconstrained maximizer of the follower surrogate in `a_F` for a fixed
/// leader action, by Newton's method. `None` when the surrogate is not
/// locally concave along the iteration.
pub fn follower_argmax(follower: &PolyModel, a_l: f64, start: f64) -> Option<f64> {
    let mut a = start;
    for _ in 0..100 {
        let g = follower.d_follower(a_l, a);
        let c = follower.d_follower2(a_l, a);
        if !(c < 0.0) {
            return None;
        }
        let step = g / c;
        a -= step;
        if step.abs() <= 1e-15 * a.abs().max(1.0) {
            return Some(a);
        }
    }
    Some(a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckFailure {
    pub index: usize,
    pub which: &'static str,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GradcheckReport {
    pub points: usize,
    pub leader_compared: usize,
    pub follower_compared: usize,
    /// Points where the follower curvature was too flat and the leader
    /// field took the plain-gradient path; not compared.
    pub fallbacks: usize,
    pub max_rel_leader: f64,
    pub max_rel_follower: f64,
    pub tolerance: f64,
    pub follower_tolerance: f64,
    pub passed: bool,
    pub failures: Vec<GradcheckFailure>,
}

/// Compares the leader field with central differences of
/// `U_L(a_L, a_F*(a_L))`, evaluated at `(a_L, a_F*(a_L))`, and the follower
/// field with central differences of `U_F` in `a_F` at the given point.
pub fn gradcheck(
    cases: &[(PolyModel, PolyModel, f64, f64)],
    tolerance: f64,
    follower_tolerance: f64,
    h: f64,
    hess_eps: f64,
) -> GradcheckReport {
    let mut r = GradcheckReport { points: cases.len(), tolerance, follower_tolerance, ..Default::default() };
    for (index, (ul, uf, a_l, a_f)) in cases.iter().enumerate() {
        let analytic = follower_gradient(uf, *a_l, *a_f);
        let numeric = (uf.eval(*a_l, a_f + h) - uf.eval(*a_l, a_f - h)) / (2.0 * h);
        let e = relative_error(analytic, numeric);
        r.follower_compared += 1;
        r.max_rel_follower = r.max_rel_follower.max(e);
        if !(e <= follower_tolerance) {
            r.failures.push(GradcheckFailure { index, which: "follower", analytic, numeric, rel_error: e });
        }

        if uf.d_follower2(*a_l, *a_f).abs() < hess_eps {
            r.fallbacks += 1;
            continue;
        }
        let star = |l: f64| follower_argmax(uf, l, *a_f);
        let (Some(f0), Some(fp), Some(fm)) = (star(*a_l), star(a_l + h), star(a_l - h)) else {
            r.fallbacks += 1;
            continue;
        };
        let g = leader_gradient(ul, uf, *a_l, f0, hess_eps);
        if g.fallback {
            r.fallbacks += 1;
            continue;
        }
        let numeric = (ul.eval(a_l + h, fp) - ul.eval(a_l - h, fm)) / (2.0 * h);
        let e = relative_error(g.value, numeric);
        r.leader_compared += 1;
        r.max_rel_leader = r.max_rel_leader.max(e);
        if !(e <= tolerance) {
            r.failures.push(GradcheckFailure { index, which: "leader", analytic: g.value, numeric, rel_error: e });
        }
    }
    r.passed = r.failures.is_empty();
    r
}

/// Random quadratic surrogate pair whose follower is concave in `a_F`
/// with curvature in `[0.2, 8]`, plus a random point in the unit square.
pub fn random_case(rng: &mut ChaCha8Rng) -> (PolyModel, PolyModel, f64, f64) {
    let n = basis_len(2);
    let mut draw = || (0..n).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
    let leader = draw();
    let mut follower = draw();
    follower[4] = -rng.random_range(0.1..4.0);
    (
        PolyModel::new(2, leader).expect("six coefficients"),
        PolyModel::new(2, follower).expect("six coefficients"),
        rng.random(),
        rng.random(),
    )
}

pub fn random_cases(count: usize, seed: u64) -> Vec<(PolyModel, PolyModel, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_case(&mut rng)).collect()
}

/// Exhaustive argmax of `utility` over `{0, 1/r, ..., 1}`; ties go to the
/// smaller action.
pub fn brute_force_best_response(utility: impl Fn(f64) -> f64, resolution: usize) -> ActionValue {
    let r = resolution.max(1);
    let mut best = (0.0, utility(0.0));
    for k in 1..=r {
        let a = k as f64 / r as f64;
        let u = utility(a);
        if u > best.1 {
            best = (a, u);
        }
    }
    ActionValue::clamped(best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub models: usize,
    pub resolution: usize,
    /// Largest distance between the multi-step limit and the grid argmax.
    pub max_gap: f64,
    pub passed: bool,
    pub failures: Vec<(usize, f64, f64)>,
}

/// Runs the momentum follower to its limit on random concave surrogates
/// and checks it lands within one grid cell of the brute-force argmax.
pub fn check_best_response_oracle(models: usize, resolution: usize, steps: usize, seed: u64) -> OracleReport {
    let cell = 1.0 / resolution.max(1) as f64;
    let mut report = OracleReport { models, resolution, max_gap: 0.0, passed: true, failures: Vec::new() };
    for (i, (_, uf, a_l, start)) in random_cases(models, seed).into_iter().enumerate() {
        let mut v = 0.0;
        let limit = multi_step_follower(
            &uf,
            a_l,
            ActionValue::clamped(start),
            steps,
            MomentumParams::default(),
            &mut v,
            &mut OuNoise::disabled(),
        )
        .get();
        let grid = brute_force_best_response(|a| uf.eval(a_l, a), resolution).get();
        let gap = (limit - grid).abs();
        report.max_gap = report.max_gap.max(gap);
        if gap > cell + 1e-12 {
            report.passed = false;
            report.failures.push((i, limit, grid));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_best_response(|a| -(a - 0.6) * (a - 0.6), 100).get(), 0.6);
        assert_eq!(brute_force_best_response(|a| a, 100).get(), 1.0);
        assert_eq!(brute_force_best_response(|_| 1.0, 100).get(), 0.0);
    }

    #[test]
    fn random_models_pass() {
        let r = gradcheck(&random_cases(300, 4), 1e-6, 1e-8, 1e-4, 1e-6);
        assert!(r.passed, "{:?}", r.failures.first());
        assert_eq!(r.leader_compared, 300);
    }

    #[test]
    fn flat_follower_is_flagged_not_compared() {
        let ul = PolyModel::new(2, vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let uf = PolyModel::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.5]).unwrap();
        let r = gradcheck(&[(ul, uf, 0.3, 0.4)], 1e-6, 1e-8, 1e-4, 1e-6);
        assert_eq!(r.fallbacks, 1);
        assert_eq!(r.leader_compared, 0);
        assert!(r.passed);
    }

    #[test]
    fn wrong_field_is_caught() {
        // With a cross term the plain leader partial differs from the total
        // derivative along the follower's best response.
        let ul = PolyModel::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let uf = PolyModel::new(2, vec![0.0, 0.0, 0.0, 0.0, -1.0, 1.0]).unwrap();
        let f = |l: f64| follower_argmax(&uf, l, 0.0).unwrap();
        let total = (ul.eval(0.3 + 1e-4, f(0.3 + 1e-4)) - ul.eval(0.3 - 1e-4, f(0.3 - 1e-4))) / 2e-4;
        assert!((total - 0.5).abs() < 1e-9);
        assert!(relative_error(ul.d_leader(0.3, f(0.3)), total) > 0.1);
    }

    #[test]
    fn oracle_agrees_on_random_concave_models() {
        let r = check_best_response_oracle(50, 100, 500, 9);
        assert!(r.passed, "{:?}", r.failures);
    }
}
