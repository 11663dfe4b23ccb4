//! Tiered agents and synthetic rank-labelled datasets.
//!
//! Tier agents run MCTS with random-playout values and a tier specific
//! budget, and sample their move from the visit counts at a fixed
//! temperature. Lower tier index means larger budget, so tier 1 is the
//! strongest. Move priors come from a small teacher policy trained on games of
//! a strong network-free searcher (see [`train_teacher`]); without a teacher
//! the priors are uniform.
//!
//! A budget of `b` means `b` child evaluations after the root is expanded,
//! i.e. `b + 1` simulations. Budget 1 plays from the priors alone.

use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{initial_state, Action, GameError, GameSpec, GameState};
use crate::record::{read_records, write_records, GameRecord, RecordError};
use crate::scorer::{ScorerError, ScorerParams};
use crate::training::{default_scorer_spec, train, RankDataset, TrainConfig, TrainError};
use crate::search::{
    decide, mcts_search_with, sa_decide, Evaluator, RolloutEvaluator, ScorerEvaluator, SearchConfig,
    SearchError, SearchMode,
};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid tiers: {0}")]
    InvalidTiers(String),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

/// Picks moves. `reset` reseeds all internal randomness.
pub trait Agent {
    fn reset(&mut self, seed: u64);
    fn select(&mut self, state: &GameState) -> Result<Action, SearchError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierSpec {
    /// 1 is the strongest tier.
    pub tier: u32,
    pub budget: usize,
    /// Sampling temperature over visit counts; 0 plays the most visited move.
    pub temperature: f64,
}

impl TierSpec {
    /// The default five tiers: budgets 512/128/32/8/2 at temperature 0.3.
    pub fn default_ladder() -> Vec<TierSpec> {
        [512, 128, 32, 8, 2]
            .into_iter()
            .enumerate()
            .map(|(i, budget)| TierSpec {
                tier: i as u32 + 1,
                budget,
                temperature: 0.3,
            })
            .collect()
    }
}

/// Tiers must be numbered `1..=n` in order and get strictly weaker: a smaller
/// budget, or an equal budget with a higher temperature.
pub fn validate_tiers(tiers: &[TierSpec]) -> Result<(), DatagenError> {
    if tiers.len() < 2 {
        return Err(DatagenError::InvalidTiers("need at least 2 tiers".into()));
    }
    for (i, t) in tiers.iter().enumerate() {
        if t.tier != i as u32 + 1 {
            return Err(DatagenError::InvalidTiers(format!("tier {} out of order", t.tier)));
        }
        if t.budget == 0 || !(t.temperature.is_finite() && t.temperature >= 0.0) {
            return Err(DatagenError::InvalidTiers(format!(
                "tier {}: budget must be >= 1 and temperature >= 0",
                t.tier
            )));
        }
    }
    for w in tiers.windows(2) {
        let weaker = w[1].budget < w[0].budget
            || (w[1].budget == w[0].budget && w[1].temperature > w[0].temperature);
        if !weaker {
            return Err(DatagenError::InvalidTiers(format!(
                "tier {} is not weaker than tier {}",
                w[1].tier, w[0].tier
            )));
        }
    }
    Ok(())
}

/// Samples an index with probability proportional to `weights^(1/T)`, or the
/// first maximum when `T = 0`.
fn sample_tempered<R: Rng + ?Sized>(weights: &[f64], temperature: f64, rng: &mut R) -> usize {
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if temperature == 0.0 {
        return weights.iter().position(|&w| w == max).unwrap_or(0);
    }
    let scaled: Vec<f64> = weights.iter().map(|w| (w / max).powf(1.0 / temperature)).collect();
    WeightedIndex::new(&scaled).map_or(0, |d| d.sample(rng))
}

/// Policy network supplying tier-agent priors, with the temperature applied
/// to its move probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Teacher {
    pub params: ScorerParams,
    pub prior_temperature: f64,
}

/// MCTS player of one tier.
pub struct TierAgent<'a> {
    spec: TierSpec,
    teacher: Option<&'a Teacher>,
    evaluator: RolloutEvaluator<'a>,
    rng: ChaCha8Rng,
    priors: Vec<f64>,
}

impl<'a> TierAgent<'a> {
    pub fn new(spec: TierSpec, teacher: Option<&'a Teacher>, seed: u64) -> Self {
        let mut agent = TierAgent {
            spec,
            teacher,
            evaluator: RolloutEvaluator::new(0),
            rng: ChaCha8Rng::seed_from_u64(0),
            priors: Vec::new(),
        };
        agent.reset(seed);
        agent
    }

    pub fn spec(&self) -> TierSpec {
        self.spec
    }
}

impl Agent for TierAgent<'_> {
    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        let eval_seed = self.rng.gen();
        self.evaluator = match self.teacher {
            Some(t) => RolloutEvaluator::with_prior(&t.params, t.prior_temperature, eval_seed),
            None => RolloutEvaluator::new(eval_seed),
        };
    }

    fn select(&mut self, state: &GameState) -> Result<Action, SearchError> {
        let legal: Vec<Action> = state.legal_actions()?;
        if self.spec.budget == 1 {
            self.evaluator.evaluate(state, &mut self.priors)?;
            let i = sample_tempered(&self.priors, self.spec.temperature, &mut self.rng);
            return Ok(legal[i]);
        }
        let config = SearchConfig {
            simulations: self.spec.budget + 1,
            mode: SearchMode::Vanilla,
            ..Default::default()
        };
        let result = mcts_search_with(&mut self.evaluator, state, &config)?;
        if self.spec.temperature == 0.0 {
            return Ok(result.chosen);
        }
        let i = sa_decide(&result.visits, 1.0 / self.spec.temperature, 0.0, &mut self.rng)?;
        Ok(result.actions[i])
    }
}

/// Network-guided player in any search mode.
pub struct SearchAgent<'a> {
    params: &'a ScorerParams,
    config: SearchConfig,
    rng: ChaCha8Rng,
}

impl<'a> SearchAgent<'a> {
    pub fn new(params: &'a ScorerParams, config: SearchConfig, seed: u64) -> Self {
        SearchAgent {
            params,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }
}

impl Agent for SearchAgent<'_> {
    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn select(&mut self, state: &GameState) -> Result<Action, SearchError> {
        let mut evaluator = ScorerEvaluator::new(self.params);
        let result = mcts_search_with(&mut evaluator, state, &self.config)?;
        decide(&result, &self.config, &mut self.rng)
    }
}

/// Options for a single game.
#[derive(Debug, Clone)]
pub struct GameSetup {
    pub game: GameSpec,
    pub id: String,
    pub side_labels: [u32; 2],
    /// Uniformly random moves played before the agents take over.
    pub opening_plies: usize,
    pub seed: u64,
}

/// Plays `first` against `second` to the end. Both agents are reseeded from
/// `setup.seed`, so the record is a pure function of the setup.
pub fn play_game(
    first: &mut dyn Agent,
    second: &mut dyn Agent,
    setup: &GameSetup,
) -> Result<GameRecord, DatagenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    first.reset(rng.gen());
    second.reset(rng.gen());
    let mut state = initial_state(setup.game)?;
    let mut moves = Vec::new();
    while !state.is_terminal() {
        let action = if moves.len() < setup.opening_plies {
            let legal = state.legal_actions()?;
            legal[rng.gen_range(0..legal.len())]
        } else if state.to_move().index() == 0 {
            first.select(&state)?
        } else {
            second.select(&state)?
        };
        state = state.apply(action)?;
        moves.push(action);
    }
    let record = GameRecord {
        id: setup.id.clone(),
        game: setup.game,
        side_labels: setup.side_labels,
        moves,
        outcome: state.terminal_value().expect("finished") as i8,
        seed: setup.seed,
    };
    record.validate()?;
    Ok(record)
}

/// Games per tier in each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub candidate: usize,
    pub query: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.candidate + self.query
    }
}

/// Generated records per split, each ordered by tier then game index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratedDataset {
    pub train: Vec<GameRecord>,
    pub candidate: Vec<GameRecord>,
    pub query: Vec<GameRecord>,
}

impl GeneratedDataset {
    pub const SPLITS: [&'static str; 3] = ["train", "candidate", "query"];

    pub fn split(&self, name: &str) -> Option<&[GameRecord]> {
        match name {
            "train" => Some(&self.train),
            "candidate" => Some(&self.candidate),
            "query" => Some(&self.query),
            _ => None,
        }
    }

    /// Writes `<dir>/<split>/tier_<i>.jsonl` for every split and tier.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, DatagenError> {
        let mut written = Vec::new();
        for name in Self::SPLITS {
            let records = self.split(name).expect("known split");
            let mut tiers: Vec<u32> = records.iter().map(|r| r.side_labels[0]).collect();
            tiers.dedup();
            for tier in tiers {
                let path = dir.as_ref().join(name).join(format!("tier_{tier}.jsonl"));
                let subset: Vec<GameRecord> = records
                    .iter()
                    .filter(|r| r.side_labels[0] == tier)
                    .cloned()
                    .collect();
                write_records(&path, &subset)?;
                written.push(path);
            }
        }
        Ok(written)
    }

    /// Reads a directory written by [`GeneratedDataset::write`]. Each split
    /// takes `tier_1.jsonl`, `tier_2.jsonl`, ... up to the first missing file.
    pub fn read(dir: impl AsRef<Path>) -> Result<GeneratedDataset, DatagenError> {
        let mut out = GeneratedDataset::default();
        for name in Self::SPLITS {
            let records = match name {
                "train" => &mut out.train,
                "candidate" => &mut out.candidate,
                _ => &mut out.query,
            };
            for tier in 1.. {
                let path = dir.as_ref().join(name).join(format!("tier_{tier}.jsonl"));
                if !path.exists() {
                    break;
                }
                records.extend(read_records(&path)?);
            }
        }
        Ok(out)
    }
}

/// Seed of game `index` of a tier, from one ChaCha stream per tier.
pub fn game_seed(seed: u64, tier: u32, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tier as u64);
    rng.set_word_pos(2 * index as u128);
    rng.gen()
}

/// Self-play games for every tier, split into disjoint train, candidate and
/// query sets. Every record is replay-validated.
pub fn generate_dataset(
    tiers: &[TierSpec],
    teacher: Option<&Teacher>,
    game: GameSpec,
    sizes: SplitSizes,
    seed: u64,
) -> Result<GeneratedDataset, DatagenError> {
    validate_tiers(tiers)?;
    let mut out = GeneratedDataset::default();
    for spec in tiers {
        let mut a = TierAgent::new(*spec, teacher, 0);
        let mut b = TierAgent::new(*spec, teacher, 0);
        for index in 0..sizes.total() {
            let setup = GameSetup {
                game,
                id: format!("t{}-{index:06}", spec.tier),
                side_labels: [spec.tier, spec.tier],
                opening_plies: 0,
                seed: game_seed(seed, spec.tier, index),
            };
            let record = play_game(&mut a, &mut b, &setup)?;
            let split = if index < sizes.train {
                &mut out.train
            } else if index < sizes.train + sizes.candidate {
                &mut out.candidate
            } else {
                &mut out.query
            };
            split.push(record);
        }
    }
    Ok(out)
}

/// Settings for the teacher policy that supplies tier-agent priors.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherConfig {
    /// Self-play games of the network-free searcher.
    pub games: usize,
    pub budget: usize,
    pub temperature: f64,
    pub hidden: usize,
    pub steps: usize,
    pub lr: f64,
    /// Temperature on the trained policy when it is used as a prior.
    pub prior_temperature: f64,
    pub seed: u64,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        TeacherConfig {
            games: 200,
            budget: 512,
            temperature: 0.3,
            hidden: 64,
            steps: 5_000,
            lr: 0.05,
            prior_temperature: 3.0,
            seed: 0,
        }
    }
}

/// Trains policy and value heads on self-play games of a network-free
/// searcher. The strength head is left untrained.
pub fn train_teacher(game: GameSpec, config: &TeacherConfig) -> Result<Teacher, DatagenError> {
    let spec = TierSpec {
        tier: 1,
        budget: config.budget,
        temperature: config.temperature,
    };
    let mut a = TierAgent::new(spec, None, 0);
    let mut b = TierAgent::new(spec, None, 0);
    let mut records = Vec::with_capacity(config.games);
    for index in 0..config.games {
        let setup = GameSetup {
            game,
            id: format!("teacher-{index:06}"),
            side_labels: [1, 1],
            opening_plies: 0,
            seed: game_seed(config.seed, 0, index),
        };
        records.push(play_game(&mut a, &mut b, &setup)?);
    }
    let dataset = RankDataset::from_records(records)?;
    let train_config = TrainConfig {
        steps: config.steps,
        lr: config.lr,
        lr_halve_at: config.steps * 3 / 4,
        include_infinity: false,
        w_strength: 0.0,
        seed: config.seed,
        log_interval: config.steps.max(1),
        ..Default::default()
    };
    let (params, _) = train(&dataset, default_scorer_spec(game, config.hidden), &train_config)?;
    Ok(Teacher {
        params,
        prior_temperature: config.prior_temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_is_valid() {
        validate_tiers(&TierSpec::default_ladder()).unwrap();
        let mut bad = TierSpec::default_ladder();
        bad[2].budget = 512;
        assert!(validate_tiers(&bad).is_err());
        assert!(validate_tiers(&bad[..1]).is_err());
    }

    #[test]
    fn tempered_sampling_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_tempered(&[0.2, 0.5, 0.5], 0.0, &mut rng), 1);
        for _ in 0..100 {
            assert_eq!(sample_tempered(&[1.0, 0.5], 0.01, &mut rng), 0);
        }
    }

    #[test]
    fn game_seeds_differ() {
        let a = game_seed(1, 1, 0);
        assert_ne!(a, game_seed(1, 1, 1));
        assert_ne!(a, game_seed(1, 2, 0));
        assert_ne!(a, game_seed(2, 1, 0));
        assert_eq!(a, game_seed(1, 1, 0));
    }

    #[test]
    fn play_is_deterministic() {
        let game = GameSpec::hex(4).unwrap();
        let tier = TierSpec {
            tier: 1,
            budget: 16,
            temperature: 0.3,
        };
        let (mut a, mut b) = (TierAgent::new(tier, None, 1), TierAgent::new(tier, None, 2));
        let setup = GameSetup {
            game,
            id: "x".into(),
            side_labels: [1, 1],
            opening_plies: 0,
            seed: 9,
        };
        let r1 = play_game(&mut a, &mut b, &setup).unwrap();
        let r2 = play_game(&mut a, &mut b, &setup).unwrap();
        assert_eq!(r1, r2);
        r1.validate().unwrap();
    }
}
