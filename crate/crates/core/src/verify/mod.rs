//! Numerical checks of the potential-game conditions, gradient laws and
//! best-response oracles.

mod checks;
mod env;
mod gradcheck;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use checks::{
    alignment_residual, check_cross_partials, check_potential_alignment, check_state_partials, player_utility,
    sum_potential, ConditionReport, Violation,
};
pub use env::{PlantEnv, PlantedCoupling, RolePair, RoleSel, UtilityEnv};
pub use gradcheck::{
    brute_force_best_response, check_best_response_oracle, follower_argmax, gradcheck, random_case, random_cases,
    relative_error, GradcheckFailure, GradcheckReport, OracleReport,
};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::plant::build_bglp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    CrossPartials,
    PotentialAlignment,
    StatePartials,
    Gradcheck,
    BestResponse,
}

impl CheckName {
    pub const ALL: [CheckName; 5] = [
        CheckName::CrossPartials,
        CheckName::PotentialAlignment,
        CheckName::StatePartials,
        CheckName::Gradcheck,
        CheckName::BestResponse,
    ];

    fn as_str(self) -> &'static str {
        match self {
            CheckName::CrossPartials => "cross-partials",
            CheckName::PotentialAlignment => "potential-alignment",
            CheckName::StatePartials => "state-partials",
            CheckName::Gradcheck => "gradcheck",
            CheckName::BestResponse => "best-response",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = CheckName::ALL.iter().map(|c| c.as_str()).collect();
            Error::Config(format!("unknown check {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CheckOutcome {
    Condition(ConditionReport),
    Gradient(GradcheckReport),
    Oracle(OracleReport),
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        match self {
            CheckOutcome::Condition(r) => r.passed,
            CheckOutcome::Gradient(r) => r.passed,
            CheckOutcome::Oracle(r) => r.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<(CheckName, CheckOutcome)>,
}

/// Runs the selected checks (all when `only` is empty) with the settings
/// of `cfg.verify`, seeded from `cfg.run.seed`.
pub fn run_checks(cfg: &ExperimentConfig, only: &[CheckName]) -> Result<VerifyReport> {
    let v = &cfg.verify;
    let seed = cfg.run.seed;
    let plant = PlantEnv::new(build_bglp(&cfg.plant)?, cfg.learner.coalition);
    let planted;
    let env: &dyn UtilityEnv = if v.planted_violation {
        planted = PlantedCoupling { inner: plant, victim: 0, source: 1, strength: 0.1 };
        &planted
    } else {
        &plant
    };
    let selected: Vec<CheckName> = if only.is_empty() { CheckName::ALL.to_vec() } else { only.to_vec() };
    let mut checks = Vec::with_capacity(selected.len());
    for name in selected {
        let outcome = match name {
            CheckName::CrossPartials => {
                CheckOutcome::Condition(check_cross_partials(env, v.samples, v.cross_tolerance, v.fd_step, seed)?)
            }
            CheckName::PotentialAlignment => CheckOutcome::Condition(check_potential_alignment(
                env,
                &sum_potential,
                v.samples,
                v.alignment_tolerance,
                seed,
            )?),
            CheckName::StatePartials => {
                CheckOutcome::Condition(check_state_partials(env, v.samples, v.alignment_tolerance, v.fd_step, seed)?)
            }
            CheckName::Gradcheck => CheckOutcome::Gradient(gradcheck(
                &random_cases(v.gradcheck_points, seed),
                v.gradcheck_tolerance,
                v.gradcheck_tolerance,
                v.fd_step,
                cfg.learner.hess_eps,
            )),
            CheckName::BestResponse => {
                CheckOutcome::Oracle(check_best_response_oracle(v.oracle_models, v.oracle_resolution, 500, seed))
            }
        };
        checks.push((name, outcome));
    }
    Ok(VerifyReport { passed: checks.iter().all(|(_, c)| c.passed()), checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(c.to_string().parse::<CheckName>().unwrap(), c);
        }
        assert!("cross".parse::<CheckName>().is_err());
    }

    #[test]
    fn reference_suite_passes_and_planted_fails() {
        let mut cfg = ExperimentConfig::default();
        cfg.verify.samples = 100;
        cfg.verify.gradcheck_points = 100;
        assert!(run_checks(&cfg, &[]).unwrap().passed);
        cfg.verify.planted_violation = true;
        let r = run_checks(&cfg, &[CheckName::CrossPartials, CheckName::PotentialAlignment]).unwrap();
        assert!(!r.passed);
        assert!(r.checks.iter().all(|(_, c)| !c.passed()));
    }
}
