//! End-to-end experiment drivers: planted recovery, vote budgets, attacks,
//! and a finite-difference gradient check.
//!
//! Each driver takes one seed and feeds it to both the simulator and the
//! trainer; their draws come from separate streams.

use rand::Rng;

use crate::dataset::{DatasetBuilder, DuplicatePolicy, RatingsDataset};
use crate::error::Result;
use crate::model::{gradient, loss, ModelParams, RegConfig};
use crate::rng::{stream, stream_rng};
use crate::scoring::{score_notes, NoteScore};
use crate::sim::{
    evaluate_recovery, generate, inject_attack, AttackConfig, GroundTruth, RecoveryMetrics, SimulationConfig,
};
use crate::train::{fit, TrainConfig, TrainReport};

#[derive(Debug, Clone)]
pub struct PlantedRun {
    pub data: RatingsDataset,
    pub truth: GroundTruth,
    pub params: ModelParams,
    pub report: TrainReport,
    pub scores: Vec<NoteScore>,
    pub metrics: RecoveryMetrics,
}

/// Simulates, fits and scores one planted population with `seed`.
pub fn run_planted(sim: &SimulationConfig, train: &TrainConfig, seed: u64) -> Result<PlantedRun> {
    let (data, truth) = generate(&SimulationConfig { seed, ..*sim })?;
    let (params, report) = fit(&data, &TrainConfig { seed, ..*train })?;
    let scores = score_notes(&params, &data)?;
    let metrics = evaluate_recovery(&scores, &truth)?;
    Ok(PlantedRun {
        data,
        truth,
        params,
        report,
        scores,
        metrics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPoint {
    pub votes_per_note: usize,
    pub trials: usize,
    /// Seeds whose separation margin came out positive.
    pub successes: usize,
}

impl BudgetPoint {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Success rate of planted recovery at each vote budget.
pub fn vote_budget_curve(
    sim: &SimulationConfig,
    train: &TrainConfig,
    budgets: &[usize],
    seeds: &[u64],
) -> Result<Vec<BudgetPoint>> {
    budgets
        .iter()
        .map(|&votes_per_note| {
            let cfg = SimulationConfig { votes_per_note, ..*sim };
            let mut successes = 0;
            for &seed in seeds {
                if run_planted(&cfg, train, seed)?.metrics.separation_margin > 0.0 {
                    successes += 1;
                }
            }
            Ok(BudgetPoint {
                votes_per_note,
                trials: seeds.len(),
                successes,
            })
        })
        .collect()
}

/// The smallest budget whose success count reaches `min_successes`.
pub fn smallest_sufficient_budget(curve: &[BudgetPoint], min_successes: usize) -> Option<usize> {
    curve
        .iter()
        .filter(|p| p.successes >= min_successes)
        .map(|p| p.votes_per_note)
        .min()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub target_note: String,
    pub raw_mean_before: f64,
    pub raw_mean_after: f64,
    pub intercept_before: f64,
    pub intercept_after: f64,
    pub factor_before: f64,
    pub factor_after: f64,
}

#[derive(Debug, Clone)]
pub struct AttackRun {
    pub clean: PlantedRun,
    pub attacked: RatingsDataset,
    pub params: ModelParams,
    pub report: TrainReport,
    pub scores: Vec<NoteScore>,
    pub outcome: AttackOutcome,
}

/// Fits the clean population and the attacked one, and compares the target.
pub fn run_attack(sim: &SimulationConfig, train: &TrainConfig, atk: &AttackConfig, seed: u64) -> Result<AttackRun> {
    let clean = run_planted(sim, train, seed)?;
    let attacked = inject_attack(&clean.data, &clean.truth, atk, seed)?;
    let (params, report) = fit(&attacked, &TrainConfig { seed, ..*train })?;
    let scores = score_notes(&params, &attacked)?;

    let target = atk.target_note.as_str();
    let find = |scores: &[NoteScore]| {
        scores
            .iter()
            .find(|s| s.note_id == target)
            .map(|s| (s.intercept, s.factor))
            .expect("target note is scored")
    };
    let (intercept_before, factor_before) = find(&clean.scores);
    let (intercept_after, factor_after) = find(&scores);
    let outcome = AttackOutcome {
        target_note: target.to_owned(),
        raw_mean_before: mean_rating(&clean.data, target).unwrap_or(0.0),
        raw_mean_after: mean_rating(&attacked, target).unwrap_or(0.0),
        intercept_before,
        intercept_after,
        factor_before,
        factor_after,
    };
    Ok(AttackRun {
        clean,
        attacked,
        params,
        report,
        scores,
        outcome,
    })
}

/// Average raw rating a note received, `None` if it has no votes.
pub fn mean_rating(data: &RatingsDataset, note_id: &str) -> Option<f64> {
    let n = data.note_index(note_id)?;
    let (sum, count) = data
        .votes()
        .iter()
        .filter(|v| v.note == n)
        .fold((0.0, 0usize), |(s, c), v| (s + v.rating, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// A random sparse ±1 dataset with `users × notes` cells each observed with
/// probability `density`, plus parameters drawn from `[-1, 1)`.
pub fn random_instance(seed: u64, users: usize, notes: usize, density: f64) -> Result<(RatingsDataset, ModelParams)> {
    let mut rng = stream_rng(seed, stream::GRADCHECK);
    let mut b = DatasetBuilder::new(DuplicatePolicy::Reject);
    for u in 0..users {
        b.add_user(&format!("u{u}"))?;
    }
    for n in 0..notes {
        b.add_note(&format!("n{n}"))?;
    }
    for u in 0..users {
        for n in 0..notes {
            if rng.random::<f64>() < density {
                let r = if rng.random::<bool>() { 1.0 } else { -1.0 };
                b.push(&format!("u{u}"), &format!("n{n}"), r)?;
            }
        }
    }
    let data = b.finish();
    let mut params = ModelParams::zeros(users, notes);
    for p in params.iter_mut() {
        *p = 2.0 * rng.random::<f64>() - 1.0;
    }
    Ok((data, params))
}

/// The gradcheck instance for a seed: 5–20 users, 4–15 notes, 30% density.
pub fn gradcheck_instance(seed: u64) -> Result<(RatingsDataset, ModelParams)> {
    let mut rng = stream_rng(seed, stream::GRADCHECK.wrapping_add(1 << 32));
    let users = rng.random_range(5..=20);
    let notes = rng.random_range(4..=15);
    random_instance(seed, users, notes, 0.3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub num_params: usize,
    /// Largest `|analytic - numeric| / max(1, |analytic|, |numeric|)`.
    pub max_relative_error: f64,
}

/// Compares [`gradient`] against central differences of [`loss`].
pub fn gradient_check(params: &ModelParams, data: &RatingsDataset, reg: &RegConfig, step: f64) -> Result<GradCheck> {
    let analytic = gradient(params, data, reg)?.to_flat();
    let (users, notes) = (params.num_users(), params.num_notes());
    let mut flat = params.to_flat();
    let loss_at = |flat: &[f64]| loss(&ModelParams::from_flat(users, notes, flat)?, data, reg);
    let mut worst = 0.0f64;
    for (i, a) in analytic.iter().enumerate() {
        let original = flat[i];
        flat[i] = original + step;
        let up = loss_at(&flat)?;
        flat[i] = original - step;
        let down = loss_at(&flat)?;
        flat[i] = original;
        let numeric = (up - down) / (2.0 * step);
        let rel = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
        worst = worst.max(rel);
    }
    Ok(GradCheck {
        num_params: analytic.len(),
        max_relative_error: worst,
    })
}
