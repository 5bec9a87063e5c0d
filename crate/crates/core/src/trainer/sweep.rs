use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{run_training, EpisodeSummary, TrainingPlan};
use crate::config::{ExperimentConfig, ParamRange};
use crate::error::{Error, Result};
use crate::game::VariantKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTrial {
    /// Draw order, before ranking.
    pub index: usize,
    pub overrides: Vec<String>,
    pub eval: EpisodeSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub variant: VariantKind,
    pub seed: u64,
    pub horizon: f64,
    /// Best first by evaluation potential.
    pub trials: Vec<SweepTrial>,
}

fn draw(range: &ParamRange, rng: &mut ChaCha8Rng) -> f64 {
    let (lo, hi) = (range.min.min(range.max), range.min.max(range.max));
    let v = if range.log && lo > 0.0 {
        (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
    } else {
        lo + rng.random::<f64>() * (hi - lo)
    };
    if range.integer {
        v.round()
    } else {
        v
    }
}

/// Random search over `base.sweep.space` at the sweep horizon. Draws are
/// made up front from `seed`; trials then run in parallel, each on its
/// own plant and learners.
pub fn sweep(base: &ExperimentConfig, kind: VariantKind, trials: usize, seed: u64) -> Result<SweepReport> {
    if base.sweep.space.is_empty() {
        return Err(Error::EmptySearchSpace);
    }
    if trials == 0 {
        return Err(Error::Config("sweep needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<String>> = (0..trials)
        .map(|_| base.sweep.space.iter().map(|(k, r)| format!("{k}={}", draw(r, &mut rng))).collect())
        .collect();
    let text = base.to_toml();
    let horizon = base.sweep.horizon;

    let mut results: Vec<SweepTrial> = draws
        .into_par_iter()
        .enumerate()
        .map(|(index, overrides)| {
            let mut cfg = ExperimentConfig::from_toml(&text, &overrides)?;
            cfg.run.horizon = horizon;
            cfg.run.eval = true;
            cfg.run.parallel = false;
            let out = run_training(&TrainingPlan::from_config(&cfg, kind)?)?;
            let eval = out.eval().expect("eval episode requested").summary.clone();
            Ok(SweepTrial { index, overrides, eval })
        })
        .collect::<Result<_>>()?;
    results.sort_by(|a, b| b.eval.mean_potential.total_cmp(&a.eval.mean_potential).then(a.index.cmp(&b.index)));
    Ok(SweepReport { variant: kind, seed, horizon, trials: results })
}
