//! Episode orchestration, metric aggregation and random-search sweeps.

mod io;
mod sweep;

pub use io::{read_trace_csv, write_summaries_jsonl, write_trace_csv};
pub use sweep::{sweep, SweepReport, SweepTrial};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::game::{potential_value, ActionValue, GameVariant, VanillaWeights, VariantKind};
use crate::learn::{derive_seed, Decision, LearnerConfig, Mode, PlayerLearner, PolicyConfig};
use crate::plant::{build_bglp, step, PlantConfig, PlantState};

#[derive(Debug, Clone)]
pub struct TrainingPlan {
    pub plant: PlantConfig,
    pub variant: GameVariant,
    pub learner: LearnerConfig,
    pub policy: PolicyConfig,
    /// Utility used to score every variant.
    pub scoring: VanillaWeights,
    pub episodes: usize,
    /// Simulated seconds per episode.
    pub horizon: f64,
    pub seed: u64,
    pub eval: bool,
    pub parallel: bool,
}

impl TrainingPlan {
    pub fn from_config(cfg: &ExperimentConfig, kind: VariantKind) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            plant: build_bglp(&cfg.plant)?,
            variant: cfg.variant(kind),
            learner: cfg.learner_for(kind),
            policy: cfg.policy.clone(),
            scoring: cfg.sbpg,
            episodes: cfg.run.episodes,
            horizon: cfg.run.horizon,
            seed: cfg.run.seed,
            eval: cfg.run.eval,
            parallel: cfg.run.parallel,
        })
    }

    /// Control windows per episode; a trailing partial window is not run.
    pub fn windows(&self) -> usize {
        (self.horizon / self.plant.window + 1e-9).floor() as usize
    }

    pub fn build_learners(&self) -> Result<Vec<PlayerLearner>> {
        (0..self.plant.players())
            .map(|p| {
                let game = self.variant.for_player(&self.plant.objectives(p))?;
                let dims = self.plant.state_reservoirs(p).len();
                PlayerLearner::new(&game, dims, &self.policy, &self.learner, derive_seed(self.seed, 1000 + p as u64))
            })
            .collect()
    }
}

/// One control window of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub episode: usize,
    pub eval: bool,
    pub window: usize,
    /// Simulated seconds at the end of the window.
    pub time: f64,
    pub actions: Vec<f64>,
    /// Normalized reservoir fills at the end of the window.
    pub fills: Vec<f64>,
    /// Mean power per player, W.
    pub power: Vec<f64>,
    /// Scored utility per player.
    pub utilities: Vec<f64>,
    pub potential: f64,
    pub requested: f64,
    pub delivered: f64,
    pub spilled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub eval: bool,
    pub windows: usize,
    pub demand_fulfillment: f64,
    /// Liters spilled.
    pub overflow: f64,
    /// Mean total plant power, W.
    pub mean_power: f64,
    pub mean_potential: f64,
    /// Share of window transitions that did not lower the potential.
    pub potential_nondecreasing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub summary: EpisodeSummary,
    pub trace: Vec<WindowRecord>,
}

/// Episode summary from its window trace. Sums run in trace order, so a
/// trace read back from disk reproduces the summary exactly.
pub fn aggregate(episode: usize, eval: bool, trace: &[WindowRecord]) -> EpisodeSummary {
    let n = trace.len();
    let requested: f64 = trace.iter().map(|r| r.requested).sum();
    let delivered: f64 = trace.iter().map(|r| r.delivered).sum();
    let mean = |f: &dyn Fn(&WindowRecord) -> f64| {
        if n == 0 {
            0.0
        } else {
            trace.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let rises = trace.windows(2).filter(|w| w[1].potential >= w[0].potential).count();
    EpisodeSummary {
        episode,
        eval,
        windows: n,
        demand_fulfillment: if requested > 0.0 { delivered / requested } else { 1.0 },
        overflow: trace.iter().map(|r| r.spilled).sum(),
        mean_power: mean(&|r| r.power.iter().sum()),
        mean_potential: mean(&|r| r.potential),
        potential_nondecreasing: if n > 1 { rises as f64 / (n - 1) as f64 } else { 1.0 },
    }
}

/// Hooks into a training run.
pub trait TrainingObserver {
    fn on_step(&mut self, _episode: usize, _state: &PlantState, _actions: &[ActionValue]) -> Result<()> {
        Ok(())
    }
    fn on_episode(&mut self, _metrics: &EpisodeMetrics) -> Result<()> {
        Ok(())
    }
}

impl TrainingObserver for () {}

pub struct TrainingOutcome {
    pub episodes: Vec<EpisodeMetrics>,
    pub learners: Vec<PlayerLearner>,
}

impl TrainingOutcome {
    pub fn eval(&self) -> Option<&EpisodeMetrics> {
        self.episodes.iter().find(|e| e.summary.eval)
    }
}

pub fn run_training(plan: &TrainingPlan) -> Result<TrainingOutcome> {
    run_training_with(plan, &mut ())
}

/// Trains for `plan.episodes` episodes with maps carried across episodes,
/// then runs the evaluation episode if requested. Every episode starts
/// from the initial plant state.
pub fn run_training_with(plan: &TrainingPlan, observer: &mut dyn TrainingObserver) -> Result<TrainingOutcome> {
    plan.learner.validate()?;
    plan.policy.validate()?;
    plan.scoring.validate()?;
    if plan.windows() == 0 {
        return Err(Error::Config(format!(
            "horizon {} s is shorter than one window of {} s",
            plan.horizon, plan.plant.window
        )));
    }
    let mut learners = plan.build_learners()?;
    let mut episodes = Vec::with_capacity(plan.episodes + 1);
    for e in 0..plan.episodes {
        let m = run_episode(plan, &mut learners, e, false, observer)?;
        observer.on_episode(&m)?;
        episodes.push(m);
    }
    if plan.eval {
        let m = run_episode(plan, &mut learners, plan.episodes, true, observer)?;
        observer.on_episode(&m)?;
        episodes.push(m);
    }
    Ok(TrainingOutcome { episodes, learners })
}

fn decide_all(learners: &mut [PlayerLearner], obs: &[Vec<f64>], mode: Mode, parallel: bool) -> Result<Vec<Decision>> {
    if parallel {
        learners.par_iter_mut().zip(obs.par_iter()).map(|(l, o)| l.decide(o, mode)).collect()
    } else {
        learners.iter_mut().zip(obs).map(|(l, o)| l.decide(o, mode)).collect()
    }
}

fn run_episode(
    plan: &TrainingPlan,
    learners: &mut [PlayerLearner],
    episode: usize,
    eval: bool,
    observer: &mut dyn TrainingObserver,
) -> Result<EpisodeMetrics> {
    let plant = &plan.plant;
    let players = plant.players();
    let windows = plan.windows();
    let steps = plant.steps_per_window();
    let mut state = PlantState::initial(plant);
    let mut trace = Vec::with_capacity(windows);

    for w in 0..windows {
        let mode = if eval {
            Mode::Eval
        } else {
            Mode::Train { progress: (episode as f64 + w as f64 / windows as f64) / plan.episodes.max(1) as f64 }
        };
        let obs: Vec<Vec<f64>> = (0..players).map(|p| state.observation(plant, p)).collect();
        let decisions = decide_all(learners, &obs, mode, plan.parallel)?;
        let actions: Vec<ActionValue> = decisions.iter().map(|d| d.action).collect();

        state.reset_window();
        let (req0, del0, spill0) = (state.requested, state.delivered, state.total_overflow());
        for _ in 0..steps {
            let (next, _) = step(plant, &state, &actions, plant.dt)?;
            state = next;
            observer.on_step(episode, &state, &actions)?;
        }

        let terms: Vec<_> = (0..players).map(|p| state.objective_terms(plant, p)).collect();
        let utilities: Vec<f64> = terms.iter().map(|t| plan.scoring.utility(t)).collect();
        let potential = potential_value(&utilities)?;
        if plan.parallel {
            learners
                .par_iter_mut()
                .zip(decisions.par_iter().zip(terms.par_iter()))
                .try_for_each(|(l, (d, t))| l.observe(d, t, mode))?;
        } else {
            for ((l, d), t) in learners.iter_mut().zip(&decisions).zip(&terms) {
                l.observe(d, t, mode)?;
            }
        }

        trace.push(WindowRecord {
            episode,
            eval,
            window: w,
            time: state.time,
            actions: actions.iter().map(|a| a.get()).collect(),
            fills: state.fills.iter().zip(&plant.reservoirs).map(|(f, r)| f / r.capacity).collect(),
            power: (0..players).map(|p| state.mean_power(p)).collect(),
            utilities,
            potential,
            requested: state.requested - req0,
            delivered: state.delivered - del0,
            spilled: state.total_overflow() - spill0,
        });
    }

    Ok(EpisodeMetrics { summary: aggregate(episode, eval, &trace), trace })
}
