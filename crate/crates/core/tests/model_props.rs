//! Properties of the loss, gradient and factor-sign convention, checked
//! against finite differences and direct evaluation.

use bridging_core::experiment::random_instance;
use bridging_core::{canonicalize, gradient, loss, predict, DatasetBuilder, DuplicatePolicy, ModelParams, RegConfig};
use proptest::prelude::*;

fn reg_strategy() -> impl Strategy<Value = RegConfig> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(lambda_intercept, lambda_factor)| RegConfig {
        lambda_intercept,
        lambda_factor,
    })
}

/// Loss written out term by term from the vote list.
fn reference_loss(p: &ModelParams, data: &bridging_core::RatingsDataset, reg: &RegConfig) -> f64 {
    let mut total = 0.0;
    for v in data.votes() {
        let e = p.user_intercepts[v.user] + p.note_intercepts[v.note] + p.user_factors[v.user] * p.note_factors[v.note]
            - v.rating;
        total += e * e;
    }
    let sq = |xs: &[f64]| xs.iter().map(|x| x * x).sum::<f64>();
    total
        + reg.lambda_intercept * (sq(&p.user_intercepts) + sq(&p.note_intercepts))
        + reg.lambda_factor * (sq(&p.user_factors) + sq(&p.note_factors))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_central_differences(
        seed in any::<u64>(),
        users in 1usize..10,
        notes in 1usize..10,
        density in 0.0..1.0f64,
        reg in reg_strategy(),
    ) {
        let (data, params) = random_instance(seed, users, notes, density).unwrap();
        let analytic = gradient(&params, &data, &reg).unwrap().to_flat();
        let mut flat = params.to_flat();
        let h = 1e-5;
        for (i, g) in analytic.iter().enumerate() {
            let x = flat[i];
            flat[i] = x + h;
            let up = reference_loss(&ModelParams::from_flat(users, notes, &flat).unwrap(), &data, &reg);
            flat[i] = x - h;
            let down = reference_loss(&ModelParams::from_flat(users, notes, &flat).unwrap(), &data, &reg);
            flat[i] = x;
            let numeric = (up - down) / (2.0 * h);
            let rel = (g - numeric).abs() / 1f64.max(g.abs()).max(numeric.abs());
            prop_assert!(rel < 1e-6, "param {i}: analytic {g} numeric {numeric}");
        }
    }

    #[test]
    fn loss_matches_reference_and_is_nonnegative(
        seed in any::<u64>(),
        users in 1usize..10,
        notes in 1usize..10,
        density in 0.0..1.0f64,
        reg in reg_strategy(),
    ) {
        let (data, params) = random_instance(seed, users, notes, density).unwrap();
        let l = loss(&params, &data, &reg).unwrap();
        prop_assert!(l >= 0.0);
        let r = reference_loss(&params, &data, &reg);
        prop_assert!((l - r).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn negating_factors_changes_nothing_observable(
        seed in any::<u64>(),
        users in 1usize..10,
        notes in 1usize..10,
        reg in reg_strategy(),
    ) {
        let (data, params) = random_instance(seed, users, notes, 0.5).unwrap();
        let mut flipped = params.clone();
        flipped.negate_factors();
        prop_assert_eq!(loss(&params, &data, &reg).unwrap(), loss(&flipped, &data, &reg).unwrap());
        for u in 0..users {
            for n in 0..notes {
                prop_assert_eq!(predict(&params, u, n).unwrap(), predict(&flipped, u, n).unwrap());
            }
        }
        // the gradient flips sign on factor coordinates only
        let (g, gf) = (gradient(&params, &data, &reg).unwrap(), gradient(&flipped, &data, &reg).unwrap());
        prop_assert_eq!(&g.user_intercepts, &gf.user_intercepts);
        prop_assert_eq!(&g.note_intercepts, &gf.note_intercepts);
        for (a, b) in g.user_factors.iter().zip(&gf.user_factors).chain(g.note_factors.iter().zip(&gf.note_factors)) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn canonicalize_is_idempotent_and_keeps_predictions(seed in any::<u64>(), users in 1usize..10, notes in 1usize..6) {
        let (_, params) = random_instance(seed, users, notes, 0.0).unwrap();
        let once = canonicalize(params.clone());
        prop_assert_eq!(canonicalize(once.clone()), once.clone());
        let pivot = once
            .user_factors
            .iter()
            .copied()
            .fold(0.0f64, |best, f| if f.abs() > best.abs() { f } else { best });
        prop_assert!(pivot >= 0.0);
        for u in 0..users {
            for n in 0..notes {
                prop_assert_eq!(predict(&params, u, n).unwrap(), predict(&once, u, n).unwrap());
            }
        }
        let mut flipped = params.clone();
        flipped.negate_factors();
        prop_assert_eq!(canonicalize(flipped), once);
    }

    #[test]
    fn loss_is_zero_exactly_on_perfect_fit(seed in any::<u64>(), users in 1usize..8, notes in 1usize..8) {
        let (_, mut params) = random_instance(seed, users, notes, 0.0).unwrap();
        for p in params.iter_mut() {
            *p *= 0.3; // keeps predictions inside [-1, 1]
        }
        let mut b = DatasetBuilder::new(DuplicatePolicy::Reject);
        for u in 0..users {
            for n in 0..notes {
                b.push(&format!("u{u}"), &format!("n{n}"), predict(&params, u, n).unwrap()).unwrap();
            }
        }
        let data = b.finish();
        prop_assert_eq!(loss(&params, &data, &RegConfig::NONE).unwrap(), 0.0);
        // any perturbation of a voted parameter makes the fit imperfect
        let mut off = params.clone();
        off.note_intercepts[0] += 1e-3;
        prop_assert!(loss(&off, &data, &RegConfig::NONE).unwrap() > 0.0);
    }
}

#[test]
fn zero_gradient_at_zero_with_zero_ratings() {
    let mut b = DatasetBuilder::new(DuplicatePolicy::Reject);
    b.push("u", "n", 0.0).unwrap();
    let data = b.finish();
    let g = gradient(&ModelParams::zeros(1, 1), &data, &RegConfig::default()).unwrap();
    assert!(g.iter().all(|x| x == 0.0));
}

#[test]
fn factors_of_unvoted_entities_only_feel_regularization() {
    let mut b = DatasetBuilder::new(DuplicatePolicy::Reject);
    b.add_user("lurker").unwrap();
    b.push("u", "n", 1.0).unwrap();
    let data = b.finish();
    let mut p = ModelParams::zeros(2, 1);
    p.user_intercepts[0] = 0.5;
    p.user_factors[0] = -0.25;
    let reg = RegConfig::default();
    let g = gradient(&p, &data, &reg).unwrap();
    assert_eq!(g.user_intercepts[0], 2.0 * reg.lambda_intercept * 0.5);
    assert_eq!(g.user_factors[0], 2.0 * reg.lambda_factor * -0.25);
}
