//! The one-factor bridging model.
//!
//! A user `u` is predicted to rate note `n` as
//!
//! ```text
//! r̂(u, n) = i_u + i_n + f_u · f_n
//! ```
//!
//! where the intercepts capture viewpoint-independent approval and the
//! factors capture the viewpoint axis. Parameters are fit by minimizing the
//! squared error over observed votes plus an optional L2 penalty.

use crate::dataset::RatingsDataset;
use crate::error::{Error, Result};

/// Per-user and per-note intercepts and factors.
///
/// The same shape doubles as the container for loss gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub user_intercepts: Vec<f64>,
    pub user_factors: Vec<f64>,
    pub note_intercepts: Vec<f64>,
    pub note_factors: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(num_users: usize, num_notes: usize) -> Self {
        ModelParams {
            user_intercepts: vec![0.0; num_users],
            user_factors: vec![0.0; num_users],
            note_intercepts: vec![0.0; num_notes],
            note_factors: vec![0.0; num_notes],
        }
    }

    pub fn num_users(&self) -> usize {
        self.user_intercepts.len()
    }

    pub fn num_notes(&self) -> usize {
        self.note_intercepts.len()
    }

    /// Checks that the four arrays agree pairwise in length.
    pub fn check_shape(&self) -> Result<()> {
        if self.user_factors.len() != self.user_intercepts.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} user intercepts vs {} user factors",
                self.user_intercepts.len(),
                self.user_factors.len()
            )));
        }
        if self.note_factors.len() != self.note_intercepts.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} note intercepts vs {} note factors",
                self.note_intercepts.len(),
                self.note_factors.len()
            )));
        }
        Ok(())
    }

    pub fn check_dims(&self, data: &RatingsDataset) -> Result<()> {
        self.check_shape()?;
        if self.num_users() != data.num_users() || self.num_notes() != data.num_notes() {
            return Err(Error::DimensionMismatch(format!(
                "params are {}x{} (users x notes), dataset is {}x{}",
                self.num_users(),
                self.num_notes(),
                data.num_users(),
                data.num_notes()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    /// All values in a fixed order: user intercepts, user factors, note
    /// intercepts, note factors.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.user_intercepts
            .iter()
            .chain(&self.user_factors)
            .chain(&self.note_intercepts)
            .chain(&self.note_factors)
            .copied()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.user_intercepts
            .iter_mut()
            .chain(&mut self.user_factors)
            .chain(&mut self.note_intercepts)
            .chain(&mut self.note_factors)
    }

    /// Flattens in the order of [`iter`](Self::iter).
    pub fn to_flat(&self) -> Vec<f64> {
        self.iter().collect()
    }

    /// Inverse of [`to_flat`](Self::to_flat).
    pub fn from_flat(num_users: usize, num_notes: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != 2 * (num_users + num_notes) {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {num_users} users and {num_notes} notes",
                flat.len()
            )));
        }
        let (users, notes) = flat.split_at(2 * num_users);
        let (ui, uf) = users.split_at(num_users);
        let (ni, nf) = notes.split_at(num_notes);
        Ok(ModelParams {
            user_intercepts: ui.to_vec(),
            user_factors: uf.to_vec(),
            note_intercepts: ni.to_vec(),
            note_factors: nf.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        2 * (self.num_users() + self.num_notes())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Negates every user and note factor. Predictions are unchanged.
    pub fn negate_factors(&mut self) {
        for f in self.user_factors.iter_mut().chain(&mut self.note_factors) {
            *f = -*f;
        }
    }
}

/// L2 penalty coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegConfig {
    pub lambda_intercept: f64,
    pub lambda_factor: f64,
}

impl RegConfig {
    pub const NONE: RegConfig = RegConfig {
        lambda_intercept: 0.0,
        lambda_factor: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if ok(self.lambda_intercept) && ok(self.lambda_factor) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "regularization must be finite and nonnegative, got {self:?}"
            )))
        }
    }
}

impl Default for RegConfig {
    /// Intercepts are penalized more heavily than factors, which keeps note
    /// intercepts conservative.
    fn default() -> Self {
        RegConfig {
            lambda_intercept: 0.15,
            lambda_factor: 0.03,
        }
    }
}

/// Predicted rating of `user` on `note`.
pub fn predict(params: &ModelParams, user: usize, note: usize) -> Result<f64> {
    params.check_shape()?;
    if user >= params.num_users() {
        return Err(Error::IndexOutOfRange {
            kind: "user",
            index: user,
            len: params.num_users(),
        });
    }
    if note >= params.num_notes() {
        return Err(Error::IndexOutOfRange {
            kind: "note",
            index: note,
            len: params.num_notes(),
        });
    }
    Ok(predict_unchecked(params, user, note))
}

#[inline]
pub(crate) fn predict_unchecked(params: &ModelParams, user: usize, note: usize) -> f64 {
    params.user_intercepts[user] + params.note_intercepts[note] + params.user_factors[user] * params.note_factors[note]
}

/// Sum of squared residuals over observed votes plus the L2 penalty.
pub fn loss(params: &ModelParams, data: &RatingsDataset, reg: &RegConfig) -> Result<f64> {
    params.check_dims(data)?;
    Ok(loss_unchecked(params, data, reg))
}

pub(crate) fn loss_unchecked(params: &ModelParams, data: &RatingsDataset, reg: &RegConfig) -> f64 {
    let sse: f64 = data
        .votes()
        .iter()
        .map(|v| {
            let e = predict_unchecked(params, v.user, v.note) - v.rating;
            e * e
        })
        .sum();
    sse + penalty(params, reg)
}

fn penalty(params: &ModelParams, reg: &RegConfig) -> f64 {
    let sq = |xs: &[f64]| xs.iter().map(|x| x * x).sum::<f64>();
    let mut p = 0.0;
    if reg.lambda_intercept != 0.0 {
        p += reg.lambda_intercept * (sq(&params.user_intercepts) + sq(&params.note_intercepts));
    }
    if reg.lambda_factor != 0.0 {
        p += reg.lambda_factor * (sq(&params.user_factors) + sq(&params.note_factors));
    }
    p
}

/// Analytic gradient of [`loss`] with respect to every parameter.
pub fn gradient(params: &ModelParams, data: &RatingsDataset, reg: &RegConfig) -> Result<ModelParams> {
    params.check_dims(data)?;
    let mut grad = ModelParams::zeros(params.num_users(), params.num_notes());
    gradient_into(params, data, reg, &mut grad);
    Ok(grad)
}

/// Writes the gradient into `grad`, which must already have the right shape.
pub(crate) fn gradient_into(params: &ModelParams, data: &RatingsDataset, reg: &RegConfig, grad: &mut ModelParams) {
    let two_li = 2.0 * reg.lambda_intercept;
    let two_lf = 2.0 * reg.lambda_factor;
    for (g, p) in grad.user_intercepts.iter_mut().zip(&params.user_intercepts) {
        *g = two_li * p;
    }
    for (g, p) in grad.note_intercepts.iter_mut().zip(&params.note_intercepts) {
        *g = two_li * p;
    }
    for (g, p) in grad.user_factors.iter_mut().zip(&params.user_factors) {
        *g = two_lf * p;
    }
    for (g, p) in grad.note_factors.iter_mut().zip(&params.note_factors) {
        *g = two_lf * p;
    }
    for v in data.votes() {
        let (u, n) = (v.user, v.note);
        let e2 = 2.0 * (predict_unchecked(params, u, n) - v.rating);
        grad.user_intercepts[u] += e2;
        grad.note_intercepts[n] += e2;
        grad.user_factors[u] += e2 * params.note_factors[n];
        grad.note_factors[n] += e2 * params.user_factors[u];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Vote;

    fn one_by_one(iu: f64, fu: f64, in_: f64, fn_: f64) -> ModelParams {
        ModelParams {
            user_intercepts: vec![iu],
            user_factors: vec![fu],
            note_intercepts: vec![in_],
            note_factors: vec![fn_],
        }
    }

    fn single_vote(r: f64) -> RatingsDataset {
        RatingsDataset::from_votes([Vote::new("u", "n", r)]).unwrap()
    }

    #[test]
    fn predict_zero_params() {
        assert_eq!(predict(&ModelParams::zeros(1, 1), 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn predict_factor_alignment() {
        assert_eq!(predict(&one_by_one(0.0, -1.0, 0.0, -1.0), 0, 0).unwrap(), 1.0);
        assert_eq!(predict(&one_by_one(0.0, 1.0, 0.0, -1.0), 0, 0).unwrap(), -1.0);
    }

    #[test]
    fn predict_arithmetic() {
        let p = predict(&one_by_one(0.2, 0.8, 0.5, -0.5), 0, 0).unwrap();
        assert!((p - 0.3).abs() < 1e-15, "{p}");
    }

    #[test]
    fn predict_out_of_range() {
        let p = ModelParams::zeros(2, 3);
        assert!(matches!(
            predict(&p, 2, 0),
            Err(Error::IndexOutOfRange { kind: "user", .. })
        ));
        assert!(matches!(
            predict(&p, 0, 3),
            Err(Error::IndexOutOfRange { kind: "note", .. })
        ));
    }

    #[test]
    fn loss_examples() {
        let empty = RatingsDataset::default();
        assert_eq!(loss(&ModelParams::zeros(0, 0), &empty, &RegConfig::NONE).unwrap(), 0.0);

        let d = single_vote(1.0);
        assert_eq!(
            loss(&one_by_one(0.5, 1.0, 0.0, 0.5), &d, &RegConfig::NONE).unwrap(),
            0.0
        );
        assert_eq!(loss(&ModelParams::zeros(1, 1), &d, &RegConfig::NONE).unwrap(), 1.0);
    }

    #[test]
    fn loss_penalty_terms() {
        let d = single_vote(1.0);
        let p = one_by_one(1.0, 2.0, 0.0, 0.0);
        let reg = RegConfig {
            lambda_intercept: 0.5,
            lambda_factor: 0.25,
        };
        // residual 0, penalty 0.5 * 1 + 0.25 * 4
        assert_eq!(loss(&p, &d, &reg).unwrap(), 1.5);
    }

    #[test]
    fn loss_dimension_mismatch() {
        let d = single_vote(1.0);
        assert!(matches!(
            loss(&ModelParams::zeros(2, 1), &d, &RegConfig::NONE),
            Err(Error::DimensionMismatch(_))
        ));
        let mut ragged = ModelParams::zeros(1, 1);
        ragged.note_factors.push(0.0);
        assert!(gradient(&ragged, &d, &RegConfig::NONE).is_err());
    }

    #[test]
    fn gradient_examples() {
        let empty = RatingsDataset::default();
        let g = gradient(&ModelParams::zeros(0, 0), &empty, &RegConfig::NONE).unwrap();
        assert!(g.is_empty());

        let g = gradient(&ModelParams::zeros(1, 1), &single_vote(1.0), &RegConfig::NONE).unwrap();
        assert_eq!(g.user_intercepts, [-2.0]);
        assert_eq!(g.note_intercepts, [-2.0]);
        assert_eq!(g.user_factors, [0.0]);
        assert_eq!(g.note_factors, [0.0]);
    }

    #[test]
    fn intercept_has_unit_slope() {
        let mut p = one_by_one(0.1, 0.3, -0.2, 0.7);
        let before = predict(&p, 0, 0).unwrap();
        p.note_intercepts[0] += 0.25;
        let after = predict(&p, 0, 0).unwrap();
        assert!((after - before - 0.25).abs() < 1e-15);
    }

    #[test]
    fn default_reg_penalizes_intercepts_more() {
        let r = RegConfig::default();
        assert_eq!((r.lambda_intercept, r.lambda_factor), (0.15, 0.03));
        assert!(RegConfig {
            lambda_intercept: -1.0,
            lambda_factor: 0.0
        }
        .validate()
        .is_err());
    }
}
