//! Strength profiles and rank prediction from averaged strength scores.
//!
//! A profile stores, for every rank of a labelled candidate set, the mean
//! strength score overall and at each move depth. An unlabelled group of games
//! is assigned the rank whose overall mean is nearest to the group's mean.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::{encode_into, feature_len};
use crate::record::{GameRecord, RecordError};
use crate::scorer::{softmax, ScorerError, ScorerParams, Trace};
use crate::training::RankDataset;

pub const PROFILE_HEADER: &str = "#strength-profile v1";

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("rank {0} has no scored moves")]
    EmptyRank(u32),
    #[error("asked for {requested} games but rank {rank} has only {available}")]
    NotEnoughGames {
        rank: u32,
        requested: usize,
        available: usize,
    },
    #[error("profile has {profile} ranks but query has {query}")]
    RankMismatch { profile: usize, query: usize },
    #[error("scorer has no rank-classification head")]
    NoRankHead,
    #[error("invalid prediction config: {0}")]
    InvalidConfig(String),
    #[error("profile parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which moves of a game contribute to its scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveFilter {
    All,
    First(usize),
    Last(usize),
    /// One uniformly chosen move per game, redrawn every time the filter runs.
    OnePerGame,
}

impl MoveFilter {
    pub fn validate(&self) -> Result<(), InferenceError> {
        match self {
            MoveFilter::First(0) | MoveFilter::Last(0) => {
                Err(InferenceError::InvalidConfig("move filter K must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Applies the filter to a game's per-move values (in move order).
    pub fn select<'a, T, R: Rng + ?Sized>(&self, moves: &'a [T], rng: &mut R) -> &'a [T] {
        match *self {
            MoveFilter::All => moves,
            MoveFilter::First(k) => &moves[..k.min(moves.len())],
            MoveFilter::Last(k) => &moves[moves.len().saturating_sub(k)..],
            MoveFilter::OnePerGame if moves.is_empty() => moves,
            MoveFilter::OnePerGame => {
                let i = rng.gen_range(0..moves.len());
                &moves[i..=i]
            }
        }
    }
}

impl std::fmt::Display for MoveFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MoveFilter::All => write!(f, "all"),
            MoveFilter::First(k) => write!(f, "first{k}"),
            MoveFilter::Last(k) => write!(f, "last{k}"),
            MoveFilter::OnePerGame => write!(f, "one"),
        }
    }
}

impl std::str::FromStr for MoveFilter {
    type Err = InferenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InferenceError::InvalidConfig(format!("unknown move filter '{s}'"));
        let filter = match s {
            "all" => MoveFilter::All,
            "one" => MoveFilter::OnePerGame,
            _ if s.starts_with("first") => MoveFilter::First(s[5..].parse().map_err(|_| bad())?),
            _ if s.starts_with("last") => MoveFilter::Last(s[4..].parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        filter.validate()?;
        Ok(filter)
    }
}

/// Strength scores of every move of a game, as `(depth, β)` in move order.
pub fn score_all_moves(
    params: &ScorerParams,
    record: &GameRecord,
) -> Result<Vec<(usize, f64)>, InferenceError> {
    let states = record.replay()?;
    let mut x = vec![0.0; feature_len(record.game)];
    let mut trace = Trace::default();
    let mut out = Vec::with_capacity(record.moves.len());
    for (state, action) in states.iter().zip(&record.moves) {
        encode_into(state, Some(action.index()), &mut x);
        params.forward_into(&x, &mut trace)?;
        out.push((state.depth(), trace.beta));
    }
    Ok(out)
}

/// Strength scores of the moves retained by `filter`.
pub fn score_game<R: Rng + ?Sized>(
    params: &ScorerParams,
    record: &GameRecord,
    filter: MoveFilter,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>, InferenceError> {
    filter.validate()?;
    let all = score_all_moves(params, record)?;
    Ok(filter.select(&all, rng).to_vec())
}

/// Per-move rank probabilities from the classification head.
pub fn rank_probabilities(
    params: &ScorerParams,
    record: &GameRecord,
) -> Result<Vec<Vec<f64>>, InferenceError> {
    if params.spec().ranks == 0 {
        return Err(InferenceError::NoRankHead);
    }
    let states = record.replay()?;
    let mut x = vec![0.0; feature_len(record.game)];
    let mut trace = Trace::default();
    let mut out = Vec::with_capacity(record.moves.len());
    for (state, action) in states.iter().zip(&record.moves) {
        encode_into(state, Some(action.index()), &mut x);
        params.forward_into(&x, &mut trace)?;
        out.push(softmax(&trace.rank_logits));
    }
    Ok(out)
}

/// Mean strength score per rank, overall and per move depth.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthProfile {
    sums: Vec<f64>,
    counts: Vec<usize>,
    depth_sums: Vec<Vec<f64>>,
    depth_counts: Vec<Vec<usize>>,
}

impl StrengthProfile {
    /// Empty accumulator for `ranks` ranks.
    pub fn new(ranks: usize) -> Self {
        StrengthProfile {
            sums: vec![0.0; ranks],
            counts: vec![0; ranks],
            depth_sums: vec![Vec::new(); ranks],
            depth_counts: vec![Vec::new(); ranks],
        }
    }

    /// Adds one scored move of a 1-based rank.
    pub fn add(&mut self, rank: u32, depth: usize, beta: f64) {
        let r = rank as usize - 1;
        self.sums[r] += beta;
        self.counts[r] += 1;
        if self.depth_sums[r].len() <= depth {
            self.depth_sums[r].resize(depth + 1, 0.0);
            self.depth_counts[r].resize(depth + 1, 0);
        }
        self.depth_sums[r][depth] += beta;
        self.depth_counts[r][depth] += 1;
    }

    /// Count-weighted union of two profiles over the same ranks.
    pub fn merge(&self, other: &StrengthProfile) -> Result<StrengthProfile, InferenceError> {
        if self.num_ranks() != other.num_ranks() {
            return Err(InferenceError::RankMismatch {
                profile: self.num_ranks(),
                query: other.num_ranks(),
            });
        }
        let mut out = self.clone();
        for r in 0..self.num_ranks() {
            out.sums[r] += other.sums[r];
            out.counts[r] += other.counts[r];
            let d = other.depth_sums[r].len();
            if out.depth_sums[r].len() < d {
                out.depth_sums[r].resize(d, 0.0);
                out.depth_counts[r].resize(d, 0);
            }
            for i in 0..d {
                out.depth_sums[r][i] += other.depth_sums[r][i];
                out.depth_counts[r][i] += other.depth_counts[r][i];
            }
        }
        Ok(out)
    }

    pub fn num_ranks(&self) -> usize {
        self.sums.len()
    }

    /// One past the deepest depth with any samples.
    pub fn max_depth(&self) -> usize {
        self.depth_counts.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn count(&self, rank: u32) -> usize {
        self.counts[rank as usize - 1]
    }

    /// Overall mean of a 1-based rank.
    pub fn mean(&self, rank: u32) -> f64 {
        let r = rank as usize - 1;
        self.sums[r] / self.counts[r] as f64
    }

    pub fn means(&self) -> Vec<f64> {
        (1..=self.num_ranks() as u32).map(|r| self.mean(r)).collect()
    }

    pub fn depth_count(&self, rank: u32, depth: usize) -> usize {
        self.depth_counts[rank as usize - 1].get(depth).copied().unwrap_or(0)
    }

    /// Mean at one depth, or `None` where that depth has no samples.
    pub fn depth_mean(&self, rank: u32, depth: usize) -> Option<f64> {
        let r = rank as usize - 1;
        match self.depth_count(rank, depth) {
            0 => None,
            n => Some(self.depth_sums[r][depth] / n as f64),
        }
    }

    /// Target score for a rank at a depth, falling back to the overall mean.
    pub fn target(&self, rank: u32, depth: usize) -> f64 {
        self.depth_mean(rank, depth).unwrap_or_else(|| self.mean(rank))
    }

    fn check_populated(&self) -> Result<(), InferenceError> {
        match self.counts.iter().position(|&c| c == 0) {
            Some(r) => Err(InferenceError::EmptyRank(r as u32 + 1)),
            None => Ok(()),
        }
    }

    /// Text form: a header line, then `rank depth mean count` rows where
    /// `depth` is `all` for the overall mean.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{PROFILE_HEADER} ranks={} max_depth={}\n# rank depth mean count\n",
            self.num_ranks(),
            self.max_depth()
        );
        for r in 1..=self.num_ranks() as u32 {
            let _ = writeln!(out, "{r} all {:?} {}", self.mean(r), self.count(r));
            for d in 0..self.depth_counts[r as usize - 1].len() {
                if let Some(m) = self.depth_mean(r, d) {
                    let _ = writeln!(out, "{r} {d} {m:?} {}", self.depth_count(r, d));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<StrengthProfile, InferenceError> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: &str| InferenceError::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| err(0, "empty profile"))?;
        let ranks = header
            .strip_prefix(PROFILE_HEADER)
            .and_then(|rest| rest.split_whitespace().find_map(|kv| kv.strip_prefix("ranks=")))
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| err(0, "bad header"))?;
        let mut profile = StrengthProfile::new(ranks);
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err(i, "expected 4 fields"));
            }
            let rank: usize = f[0].parse().map_err(|_| err(i, "bad rank"))?;
            if rank == 0 || rank > ranks {
                return Err(err(i, "rank out of range"));
            }
            let mean: f64 = f[2].parse().map_err(|_| err(i, "bad mean"))?;
            let count: usize = f[3].parse().map_err(|_| err(i, "bad count"))?;
            let r = rank - 1;
            if f[1] == "all" {
                profile.sums[r] = mean * count as f64;
                profile.counts[r] = count;
            } else {
                let d: usize = f[1].parse().map_err(|_| err(i, "bad depth"))?;
                if profile.depth_sums[r].len() <= d {
                    profile.depth_sums[r].resize(d + 1, 0.0);
                    profile.depth_counts[r].resize(d + 1, 0);
                }
                profile.depth_sums[r][d] = mean * count as f64;
                profile.depth_counts[r][d] = count;
            }
        }
        profile.check_populated()?;
        Ok(profile)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InferenceError> {
        if let Some(parent) = path.as_ref().parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<StrengthProfile, InferenceError> {
        StrengthProfile::from_text(&fs::read_to_string(path)?)
    }
}

/// Scores every move of every candidate game.
pub fn build_profile(
    params: &ScorerParams,
    candidate: &RankDataset,
) -> Result<StrengthProfile, InferenceError> {
    let mut profile = StrengthProfile::new(candidate.num_ranks());
    for r in 1..=candidate.num_ranks() as u32 {
        for record in candidate.games(r) {
            let states = record.replay()?;
            let mut x = vec![0.0; feature_len(record.game)];
            let mut trace = Trace::default();
            for (state, action) in states.iter().zip(&record.moves) {
                if record.label_for(state) != r {
                    continue;
                }
                encode_into(state, Some(action.index()), &mut x);
                params.forward_into(&x, &mut trace)?;
                profile.add(r, state.depth(), trace.beta);
            }
        }
    }
    profile.check_populated()?;
    Ok(profile)
}

/// Nearest overall mean; ties go to the stronger (smaller) rank.
pub fn predict_rank(profile: &StrengthProfile, query_mean: f64) -> u32 {
    let mut best = 1;
    let mut best_dist = f64::INFINITY;
    for r in 1..=profile.num_ranks() as u32 {
        let d = (query_mean - profile.mean(r)).abs();
        if d < best_dist {
            best = r;
            best_dist = d;
        }
    }
    best
}

/// Sum of per-position rank probabilities, argmax with ties to the stronger rank.
pub fn sl_predict_sum(probs: &[Vec<f64>]) -> u32 {
    let n = probs.first().map_or(0, Vec::len);
    let mut totals = vec![0.0; n];
    for p in probs {
        for (t, v) in totals.iter_mut().zip(p) {
            *t += v;
        }
    }
    argmax_first(&totals) as u32 + 1
}

/// Most frequent per-position argmax rank, ties to the stronger rank.
pub fn sl_predict_vote(probs: &[Vec<f64>]) -> u32 {
    let n = probs.first().map_or(0, Vec::len);
    let mut votes = vec![0.0; n];
    for p in probs {
        votes[argmax_first(p)] += 1.0;
    }
    argmax_first(&votes) as u32 + 1
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    /// Nearest composite strength score.
    Strength,
    SlSum,
    SlVote,
}

impl std::str::FromStr for Predictor {
    type Err = InferenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "se" | "strength" => Ok(Predictor::Strength),
            "sl-sum" => Ok(Predictor::SlSum),
            "sl-vote" => Ok(Predictor::SlVote),
            _ => Err(InferenceError::InvalidConfig(format!("unknown predictor '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionConfig {
    /// Games per prediction.
    pub games: usize,
    pub repeats: usize,
    /// Allowed rank distance for a prediction to count as correct.
    pub tolerance: u32,
    pub filter: MoveFilter,
    pub predictor: Predictor,
    pub seed: u64,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        PredictionConfig {
            games: 20,
            repeats: 500,
            tolerance: 0,
            filter: MoveFilter::All,
            predictor: Predictor::Strength,
            seed: 0,
        }
    }
}

impl PredictionConfig {
    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.games == 0 {
            return Err(InferenceError::InvalidConfig("games must be >= 1".into()));
        }
        if self.repeats == 0 {
            return Err(InferenceError::InvalidConfig("repeats must be >= 1".into()));
        }
        self.filter.validate()
    }
}

/// Per-move scores of one query game; rank probabilities only for the
/// classification predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGame {
    pub betas: Vec<f64>,
    pub rank_probs: Vec<Vec<f64>>,
}

/// Query games scored once, grouped by true rank, so repeated resampling does
/// not rerun the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredQuery {
    ranks: Vec<Vec<ScoredGame>>,
}

impl ScoredQuery {
    pub fn num_ranks(&self) -> usize {
        self.ranks.len()
    }

    pub fn games(&self, rank: u32) -> &[ScoredGame] {
        &self.ranks[rank as usize - 1]
    }
}

/// Scores the moves played by each rank in its query games.
pub fn score_query(
    params: &ScorerParams,
    query: &RankDataset,
    with_rank_probs: bool,
) -> Result<ScoredQuery, InferenceError> {
    let mut ranks = Vec::with_capacity(query.num_ranks());
    for r in 1..=query.num_ranks() as u32 {
        let mut games = Vec::new();
        for record in query.games(r) {
            let states = record.replay()?;
            let betas = score_all_moves(params, record)?;
            let probs = if with_rank_probs {
                rank_probabilities(params, record)?
            } else {
                Vec::new()
            };
            let own: Vec<usize> = (0..record.moves.len())
                .filter(|&i| record.label_for(&states[i]) == r)
                .collect();
            games.push(ScoredGame {
                betas: own.iter().map(|&i| betas[i].1).collect(),
                rank_probs: if with_rank_probs {
                    own.iter().map(|&i| probs[i].clone()).collect()
                } else {
                    Vec::new()
                },
            });
        }
        ranks.push(games);
    }
    Ok(ScoredQuery { ranks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub games: usize,
    pub rank: u32,
    pub accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub tolerance: u32,
    pub repeats: usize,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyCurve {
    /// Mean accuracy over ranks for one `N`.
    pub fn mean_accuracy(&self, games: usize) -> Option<f64> {
        let rows: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.games == games)
            .map(|r| r.accuracy)
            .collect();
        (!rows.is_empty()).then(|| rows.iter().sum::<f64>() / rows.len() as f64)
    }

    pub fn game_counts(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.games).collect();
        ns.dedup();
        ns
    }
}

/// 95% normal-approximation interval for a proportion, clipped to `[0, 1]`.
pub fn normal_ci(p: f64, trials: usize) -> (f64, f64) {
    let half = 1.96 * (p * (1.0 - p) / trials as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// Accuracy of rank prediction for every `N` in `game_counts` and every true
/// rank, over `config.repeats` random draws of `N` query games.
pub fn accuracy_curve_scored(
    profile: &StrengthProfile,
    scored: &ScoredQuery,
    game_counts: &[usize],
    config: &PredictionConfig,
) -> Result<AccuracyCurve, InferenceError> {
    config.validate()?;
    if config.predictor == Predictor::Strength && profile.num_ranks() != scored.num_ranks() {
        return Err(InferenceError::RankMismatch {
            profile: profile.num_ranks(),
            query: scored.num_ranks(),
        });
    }
    let mut rows = Vec::new();
    for &n in game_counts {
        for r in 1..=scored.num_ranks() as u32 {
            let games = scored.games(r);
            if n == 0 || n > games.len() {
                return Err(InferenceError::NotEnoughGames {
                    rank: r,
                    requested: n,
                    available: games.len(),
                });
            }
            // Independent stream per (N, rank) so adding an N leaves others unchanged.
            let mut rng = ChaCha8Rng::seed_from_u64(
                config.seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((r as u64) << 48),
            );
            let mut correct = 0usize;
            for _ in 0..config.repeats {
                let picked = index::sample(&mut rng, games.len(), n);
                let predicted = match config.predictor {
                    Predictor::Strength => {
                        let (mut sum, mut count) = (0.0, 0usize);
                        for i in picked.iter() {
                            let kept = config.filter.select(&games[i].betas, &mut rng);
                            sum += kept.iter().sum::<f64>();
                            count += kept.len();
                        }
                        predict_rank(profile, sum / count.max(1) as f64)
                    }
                    Predictor::SlSum | Predictor::SlVote => {
                        let mut probs = Vec::new();
                        for i in picked.iter() {
                            if games[i].rank_probs.is_empty() && !games[i].betas.is_empty() {
                                return Err(InferenceError::NoRankHead);
                            }
                            probs.extend_from_slice(config.filter.select(&games[i].rank_probs, &mut rng));
                        }
                        if config.predictor == Predictor::SlSum {
                            sl_predict_sum(&probs)
                        } else {
                            sl_predict_vote(&probs)
                        }
                    }
                };
                if predicted.abs_diff(r) <= config.tolerance {
                    correct += 1;
                }
            }
            let accuracy = correct as f64 / config.repeats as f64;
            let (ci_low, ci_high) = normal_ci(accuracy, config.repeats);
            rows.push(AccuracyRow {
                games: n,
                rank: r,
                accuracy,
                ci_low,
                ci_high,
            });
        }
    }
    Ok(AccuracyCurve {
        tolerance: config.tolerance,
        repeats: config.repeats,
        rows,
    })
}

pub fn accuracy_curve(
    params: &ScorerParams,
    profile: &StrengthProfile,
    query: &RankDataset,
    game_counts: &[usize],
    config: &PredictionConfig,
) -> Result<AccuracyCurve, InferenceError> {
    let with_probs = config.predictor != Predictor::Strength;
    let scored = score_query(params, query, with_probs)?;
    accuracy_curve_scored(profile, &scored, game_counts, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile_with_means(means: &[f64]) -> StrengthProfile {
        let mut p = StrengthProfile::new(means.len());
        for (i, &m) in means.iter().enumerate() {
            p.add(i as u32 + 1, 0, m);
        }
        p
    }

    #[test]
    fn predict_examples() {
        let p = profile_with_means(&[1.0, -1.0]);
        assert_eq!(predict_rank(&p, 0.8), 1);
        assert_eq!(predict_rank(&p, 0.0), 1);
        assert_eq!(predict_rank(&p, -0.3), 2);
        let p = profile_with_means(&[3.0, 2.0, 1.0, 0.0]);
        assert_eq!(predict_rank(&p, 1.0), 3);
    }

    #[test]
    fn sl_aggregation() {
        let one = vec![vec![0.2, 0.7, 0.1]];
        assert_eq!(sl_predict_sum(&one), 2);
        assert_eq!(sl_predict_vote(&one), 2);
        let tied = vec![vec![0.6, 0.4], vec![0.4, 0.6]];
        assert_eq!(sl_predict_sum(&tied), 1);
        assert_eq!(sl_predict_vote(&tied), 1);
        let all_k = vec![vec![0.1, 0.1, 0.8]; 4];
        assert_eq!(sl_predict_sum(&all_k), 3);
        assert_eq!(sl_predict_vote(&all_k), 3);
    }

    #[test]
    fn filters() {
        let moves: Vec<usize> = (0..12).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(MoveFilter::All.select(&moves, &mut rng).len(), 12);
        assert_eq!(MoveFilter::First(5).select(&moves, &mut rng), &[0, 1, 2, 3, 4]);
        assert_eq!(MoveFilter::Last(2).select(&moves, &mut rng), &[10, 11]);
        assert_eq!(MoveFilter::First(50).select(&moves, &mut rng).len(), 12);
        assert_eq!(MoveFilter::OnePerGame.select(&moves, &mut rng).len(), 1);
        assert!("first0".parse::<MoveFilter>().is_err());
        assert_eq!("last50".parse::<MoveFilter>().unwrap(), MoveFilter::Last(50));
    }

    #[test]
    fn depth_fallback_and_text_round_trip() {
        let mut p = StrengthProfile::new(2);
        p.add(1, 0, 1.0);
        p.add(1, 1, 3.0);
        p.add(2, 0, -1.0);
        assert_eq!(p.mean(1), 2.0);
        assert_eq!(p.target(1, 1), 3.0);
        assert_eq!(p.target(2, 1), -1.0);
        assert_eq!(p.target(1, 40), 2.0);
        assert_eq!(p.max_depth(), 2);
        let q = StrengthProfile::from_text(&p.to_text()).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn ci_bounds() {
        assert_eq!(normal_ci(1.0, 100), (1.0, 1.0));
        let (lo, hi) = normal_ci(0.5, 100);
        assert!((hi - lo - 2.0 * 1.96 * 0.05).abs() < 1e-12);
    }
}
