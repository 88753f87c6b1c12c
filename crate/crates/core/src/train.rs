//! Full-batch gradient descent for [`ModelParams`].
//!
//! Each parameter's step is divided by the number of votes that touch it
//! (at least one). Without this, the stable step size shrinks with the
//! busiest note's vote count, and no fixed learning rate works across
//! datasets of different density.

use rand::Rng;

use crate::dataset::RatingsDataset;
use crate::error::{Error, Result};
use crate::model::{gradient_into, loss_unchecked, ModelParams, RegConfig};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    /// Half-width of the uniform initialization interval.
    pub init_scale: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the relative loss change between epochs drops below this.
    pub tolerance: f64,
    pub reg: RegConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            init_scale: 0.05,
            learning_rate: 0.05,
            max_epochs: 2000,
            tolerance: 1e-7,
            reg: RegConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Error::Contract(format!("{what} must be positive, got {v}"));
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::Contract(format!(
                "init_scale must be finite and nonnegative, got {}",
                self.init_scale
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(bad("learning_rate", self.learning_rate));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(bad("tolerance", self.tolerance));
        }
        if self.max_epochs == 0 {
            return Err(Error::Contract("max_epochs must be at least 1".into()));
        }
        self.reg.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_loss: f64,
    /// Loss after each epoch's update.
    pub loss_history: Vec<f64>,
    pub converged: bool,
}

/// Draws every parameter i.i.d. from `[-init_scale, init_scale)`.
///
/// Draw order is user intercepts, user factors, note intercepts, note factors.
pub fn init_params(data: &RatingsDataset, cfg: &TrainConfig) -> ModelParams {
    let mut rng = stream_rng(cfg.seed, stream::INIT);
    let mut params = ModelParams::zeros(data.num_users(), data.num_notes());
    for p in params.iter_mut() {
        *p = cfg.init_scale * (2.0 * rng.random::<f64>() - 1.0);
    }
    params
}

/// Fits the model to `data` and returns canonicalized parameters.
pub fn fit(data: &RatingsDataset, cfg: &TrainConfig) -> Result<(ModelParams, TrainReport)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Contract("cannot fit an empty dataset".into()));
    }

    let step_scale = |counts: Vec<usize>| -> Vec<f64> {
        counts
            .into_iter()
            .map(|c| cfg.learning_rate / c.max(1) as f64)
            .collect()
    };
    let user_step = step_scale(data.user_vote_counts());
    let note_step = step_scale(data.note_vote_counts());

    let mut params = init_params(data, cfg);
    let mut grad = ModelParams::zeros(params.num_users(), params.num_notes());
    let mut prev = loss_unchecked(&params, data, &cfg.reg);
    let mut history = Vec::new();
    let mut converged = false;

    for epoch in 1..=cfg.max_epochs {
        gradient_into(&params, data, &cfg.reg, &mut grad);
        apply_step(&mut params.user_intercepts, &grad.user_intercepts, &user_step);
        apply_step(&mut params.user_factors, &grad.user_factors, &user_step);
        apply_step(&mut params.note_intercepts, &grad.note_intercepts, &note_step);
        apply_step(&mut params.note_factors, &grad.note_factors, &note_step);

        let current = loss_unchecked(&params, data, &cfg.reg);
        if !current.is_finite() || !params.is_finite() {
            return Err(Error::Diverged { epoch, loss: current });
        }
        history.push(current);

        let change = (prev - current).abs();
        if change == 0.0 || change / prev.abs() < cfg.tolerance {
            converged = true;
            break;
        }
        prev = current;
    }

    let report = TrainReport {
        epochs_run: history.len(),
        final_loss: *history.last().expect("max_epochs >= 1"),
        loss_history: history,
        converged,
    };
    Ok((canonicalize(params), report))
}

fn apply_step(values: &mut [f64], grad: &[f64], step: &[f64]) {
    for ((v, g), s) in values.iter_mut().zip(grad).zip(step) {
        *v -= s * g;
    }
}

/// Fixes the global factor sign: the user factor with the largest magnitude
/// (lowest index on ties) is made nonnegative.
pub fn canonicalize(mut params: ModelParams) -> ModelParams {
    let mut pivot: Option<f64> = None;
    for &f in &params.user_factors {
        if pivot.is_none_or(|p| f.abs() > p.abs()) {
            pivot = Some(f);
        }
    }
    if pivot.is_some_and(|p| p < 0.0) {
        params.negate_factors();
    }
    params
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Vote;
    use crate::model::predict;

    fn small() -> RatingsDataset {
        RatingsDataset::from_votes([
            Vote::new("a", "x", 1.0),
            Vote::new("a", "y", -1.0),
            Vote::new("b", "x", 1.0),
            Vote::new("b", "y", 1.0),
            Vote::new("c", "y", -1.0),
        ])
        .unwrap()
    }

    #[test]
    fn zero_scale_gives_zero_params() {
        let cfg = TrainConfig {
            init_scale: 0.0,
            ..Default::default()
        };
        assert!(init_params(&small(), &cfg).iter().all(|x| x == 0.0));
    }

    #[test]
    fn init_is_seeded() {
        let d = small();
        let cfg = TrainConfig::default();
        assert_eq!(init_params(&d, &cfg), init_params(&d, &cfg));
        let p1 = init_params(&d, &TrainConfig { seed: 1, ..cfg });
        let p2 = init_params(&d, &TrainConfig { seed: 2, ..cfg });
        assert_ne!(p1, p2);
        assert!(p1.iter().all(|x| x.abs() <= cfg.init_scale));
    }

    #[test]
    fn canonicalize_examples() {
        let zero = ModelParams::zeros(2, 1);
        assert_eq!(canonicalize(zero.clone()), zero);

        let p = ModelParams {
            user_intercepts: vec![0.0, 0.0],
            user_factors: vec![-0.9, 0.3],
            note_intercepts: vec![0.0],
            note_factors: vec![0.5],
        };
        let c = canonicalize(p);
        assert_eq!(c.user_factors, [0.9, -0.3]);
        assert_eq!(c.note_factors, [-0.5]);
        assert_eq!(canonicalize(c.clone()), c);
    }

    #[test]
    fn canonicalize_tie_uses_lowest_index() {
        let p = ModelParams {
            user_intercepts: vec![0.0; 2],
            user_factors: vec![-0.5, 0.5],
            note_intercepts: vec![],
            note_factors: vec![],
        };
        assert_eq!(canonicalize(p).user_factors, [0.5, -0.5]);
    }

    #[test]
    fn canonicalize_keeps_predictions() {
        let d = small();
        let p = init_params(
            &d,
            &TrainConfig {
                seed: 3,
                init_scale: 1.0,
                ..Default::default()
            },
        );
        let c = canonicalize(p.clone());
        for u in 0..d.num_users() {
            for n in 0..d.num_notes() {
                assert_eq!(predict(&p, u, n).unwrap(), predict(&c, u, n).unwrap());
            }
        }
    }

    #[test]
    fn single_vote_fits_exactly() {
        let d = RatingsDataset::from_votes([Vote::new("u", "n", 1.0)]).unwrap();
        let cfg = TrainConfig {
            reg: RegConfig::NONE,
            ..Default::default()
        };
        let (_, report) = fit(&d, &cfg).unwrap();
        assert!(report.final_loss <= 1e-6, "{report:?}");
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(matches!(
            fit(&RatingsDataset::default(), &TrainConfig::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn divergence_names_epoch() {
        let cfg = TrainConfig {
            learning_rate: 50.0,
            ..Default::default()
        };
        match fit(&small(), &cfg) {
            Err(Error::Diverged { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn report_is_consistent() {
        let (params, report) = fit(&small(), &TrainConfig::default()).unwrap();
        assert!(params.is_finite());
        assert_eq!(report.epochs_run, report.loss_history.len());
        assert_eq!(Some(&report.final_loss), report.loss_history.last());
        assert!(report.epochs_run <= 2000);
    }

    #[test]
    fn invalid_config() {
        let d = small();
        for cfg in [
            TrainConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
            TrainConfig {
                max_epochs: 0,
                ..Default::default()
            },
            TrainConfig {
                tolerance: -1.0,
                ..Default::default()
            },
            TrainConfig {
                init_scale: f64::NAN,
                ..Default::default()
            },
        ] {
            assert!(fit(&d, &cfg).is_err(), "{cfg:?}");
        }
    }
}
