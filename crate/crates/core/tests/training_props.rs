use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use strength_core::datagen::{generate_dataset, train_teacher, SplitSizes, TeacherConfig, TierSpec};
use strength_core::features::encode_features;
use strength_core::game::{Action, GameSpec, GameState, RankLabel, StateActionPair};
use strength_core::inference::build_profile;
use strength_core::training::{
    bt_listwise_grad, bt_listwise_loss, composite_score, perturb_to_infinity, sample_rank_batch, train,
    win_probability, default_scorer_spec, RankDataset, TrainConfig,
};

fn means() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, 2..8)
}

proptest! {
    #[test]
    fn loss_is_translation_invariant(m in means(), c in -50.0f64..50.0) {
        let shifted: Vec<f64> = m.iter().map(|x| x + c).collect();
        let (a, b) = (bt_listwise_loss(&m).unwrap(), bt_listwise_loss(&shifted).unwrap());
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        let (p, q) = (win_probability(&m).unwrap(), win_probability(&shifted).unwrap());
        prop_assert!((p - q).abs() < 1e-12);
        // Invariance to a common shift means the gradient sums to zero.
        let g: f64 = bt_listwise_grad(&m).unwrap().iter().sum();
        prop_assert!(g.abs() < 1e-9);
    }

    #[test]
    fn loss_is_monotone_at_the_ends(m in means(), d in 0.01f64..3.0) {
        let base = bt_listwise_loss(&m).unwrap();
        let mut up_first = m.clone();
        up_first[0] += d;
        prop_assert!(bt_listwise_loss(&up_first).unwrap() < base);
        let mut up_last = m.clone();
        *up_last.last_mut().unwrap() += d;
        prop_assert!(bt_listwise_loss(&up_last).unwrap() > base);
    }

    #[test]
    fn composite_ignores_repetition(b in proptest::collection::vec(-5.0f64..5.0, 1..20), k in 1usize..6) {
        let repeated: Vec<f64> = b.iter().cycle().take(b.len() * k).copied().collect();
        let (x, y) = (composite_score(&b).unwrap(), composite_score(&repeated).unwrap());
        prop_assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn perturbation_is_uniform_over_legal_moves() {
    let spec = GameSpec::hex(3).unwrap();
    let state = GameState::from_diagram(spec, "X.. .O. ...").unwrap();
    let pair = StateActionPair::new(state, Action(1), RankLabel::Rank(2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let legal: Vec<Action> = state.legal_actions().unwrap();
    let draws = 70_000;
    let mut counts = vec![0usize; spec.num_cells()];
    for _ in 0..draws {
        let p = perturb_to_infinity(&pair, &mut rng).unwrap();
        assert_eq!(p.state, state);
        assert_eq!(p.rank, RankLabel::Infinity);
        counts[p.action.index()] += 1;
    }
    assert_eq!(counts[0] + counts[4], 0);
    let expected = draws as f64 / legal.len() as f64;
    let chi2: f64 = legal
        .iter()
        .map(|a| (counts[a.index()] as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((legal.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    assert!(chi2 < critical, "chi2 {chi2} >= {critical}");
}

#[test]
fn batches_have_one_row_per_rank_plus_infinity() {
    let game = GameSpec::tictactoe();
    let tiers: Vec<TierSpec> = [40, 4]
        .into_iter()
        .enumerate()
        .map(|(i, budget)| TierSpec {
            tier: i as u32 + 1,
            budget,
            temperature: 0.3,
        })
        .collect();
    let sizes = SplitSizes {
        train: 10,
        candidate: 0,
        query: 0,
    };
    let data = generate_dataset(&tiers, None, game, sizes, 1).unwrap();
    let ds = RankDataset::from_records(data.train).unwrap();
    let config = TrainConfig {
        m: 5,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let batch = sample_rank_batch(&ds, &config, &mut rng).unwrap();
    assert_eq!(batch.rows.len(), 3);
    assert!(batch.has_infinity());
    for row in &batch.rows {
        assert_eq!(row.pairs.len(), 5);
        assert!(row.pairs.iter().all(|p| p.rank == row.label));
    }
    // Sampling within a rank is without replacement.
    for row in &batch.rows[..2] {
        for (i, a) in row.pairs.iter().enumerate() {
            assert!(row.pairs[i + 1..].iter().all(|b| b != a));
        }
    }
}

/// With the infinity rank enabled, training pushes random moves below every
/// real rank on the training data.
#[test]
fn infinity_rank_ends_up_weakest() {
    let game = GameSpec::tictactoe();
    let tiers: Vec<TierSpec> = [200, 24, 2]
        .into_iter()
        .enumerate()
        .map(|(i, budget)| TierSpec {
            tier: i as u32 + 1,
            budget,
            temperature: 0.3,
        })
        .collect();
    let sizes = SplitSizes {
        train: 60,
        candidate: 0,
        query: 0,
    };
    let teacher = train_teacher(
        game,
        &TeacherConfig {
            games: 100,
            budget: 200,
            hidden: 16,
            steps: 2000,
            prior_temperature: 3.0,
            seed: 2,
            ..Default::default()
        },
    )
    .unwrap();
    let data = generate_dataset(&tiers, Some(&teacher), game, sizes, 3).unwrap();
    let ds = RankDataset::from_records(data.train).unwrap();
    let config = TrainConfig {
        steps: 6000,
        lr: 0.02,
        lr_halve_at: 4500,
        log_interval: 1500,
        seed: 5,
        ..Default::default()
    };
    let (params, log) = train(&ds, default_scorer_spec(game, 16), &config).unwrap();
    assert_eq!(log.rows.len(), 4);
    let profile = build_profile(&params, &ds).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut inf = Vec::new();
    for r in 1..=3 {
        for p in ds.pairs(r) {
            let q = perturb_to_infinity(p, &mut rng).unwrap();
            inf.push(params.forward(&encode_features(game, &q)).unwrap().beta);
        }
    }
    let inf_mean = composite_score(&inf).unwrap();
    for r in 1..=3 {
        assert!(inf_mean < profile.mean(r), "inf {inf_mean} vs rank {r} {}", profile.mean(r));
    }
}
