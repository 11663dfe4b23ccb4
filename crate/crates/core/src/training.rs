//! Listwise Bradley-Terry training of the strength head.
//!
//! A rank's composite strength is the geometric mean of `λ = e^β` over sampled
//! moves, which is `e^{β̄}` with `β̄` the arithmetic mean of the scores. Ranks
//! ordered strongest first are fitted by maximising the probability of that
//! order under the generalised Bradley-Terry model:
//!
//! ```text
//! L = -Σ_{i=1}^{n-1} log( e^{β̄_i} / Σ_{j=i}^{n} e^{β̄_j} )
//! ```
//!
//! The policy and value heads are trained jointly (cross-entropy against the
//! recorded move, squared error against the game outcome) on real moves only.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::{encode_into, feature_len};
use crate::game::{GameSpec, RankLabel, StateActionPair};
use crate::record::{GameRecord, RecordError};
use crate::scorer::{
    init_params, save_checkpoint, sgd_step_in_place, ScorerError, ScorerParams, ScorerSpec, Trace,
    Upstream,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("need at least {min} values, got {got}")]
    TooFew { min: usize, got: usize },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("rank {rank} out of range 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("rank {rank} has {available} state-action pairs, need {needed}")]
    InsufficientData {
        rank: u32,
        available: usize,
        needed: usize,
    },
    #[error("dataset has no games for rank {0}")]
    EmptyRank(u32),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("cannot perturb a terminal position")]
    Terminal,
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Arithmetic mean of strength scores; `exp` of it is the geometric mean of
/// the corresponding Bradley-Terry strengths.
pub fn composite_score(betas: &[f64]) -> Result<f64, TrainError> {
    if betas.is_empty() {
        return Err(TrainError::TooFew { min: 1, got: 0 });
    }
    if betas.iter().any(|b| !b.is_finite()) {
        return Err(TrainError::NonFinite("strength scores"));
    }
    Ok(betas.iter().sum::<f64>() / betas.len() as f64)
}

/// Probability that the first entry beats all others: `softmax(means)[0]`.
pub fn win_probability(score_means: &[f64]) -> Result<f64, TrainError> {
    check_means(score_means)?;
    let max = score_means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = score_means.iter().map(|b| (b - max).exp()).sum();
    Ok((score_means[0] - max).exp() / sum)
}

fn check_means(score_means: &[f64]) -> Result<(), TrainError> {
    if score_means.len() < 2 {
        return Err(TrainError::TooFew {
            min: 2,
            got: score_means.len(),
        });
    }
    if score_means.iter().any(|b| !b.is_finite()) {
        return Err(TrainError::NonFinite("composite scores"));
    }
    Ok(())
}

/// `(max, log Σ e^{x - max})` for every suffix `x[i..]`, so the suffix
/// log-sum-exp is `max + log_sum`.
fn suffix_logsumexp(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut lse = vec![0.0; n];
    let mut max = x[n - 1];
    let mut sum = 1.0;
    lse[n - 1] = max;
    for i in (0..n - 1).rev() {
        if x[i] > max {
            sum = sum * (max - x[i]).exp() + 1.0;
            max = x[i];
        } else {
            sum += (x[i] - max).exp();
        }
        lse[i] = max + sum.ln();
    }
    lse
}

/// Negative log-likelihood of the order `score_means[0] ≻ score_means[1] ≻ …`.
pub fn bt_listwise_loss(score_means: &[f64]) -> Result<f64, TrainError> {
    check_means(score_means)?;
    let lse = suffix_logsumexp(score_means);
    let n = score_means.len();
    Ok((0..n - 1).map(|i| lse[i] - score_means[i]).sum())
}

/// Gradient of [`bt_listwise_loss`] with respect to each composite score.
pub fn bt_listwise_grad(score_means: &[f64]) -> Result<Vec<f64>, TrainError> {
    check_means(score_means)?;
    let n = score_means.len();
    let lse = suffix_logsumexp(score_means);
    let mut grad = vec![0.0; n];
    for i in 0..n - 1 {
        grad[i] -= 1.0;
        for k in i..n {
            grad[k] += (score_means[k] - lse[i]).exp();
        }
    }
    Ok(grad)
}

/// Cross-entropy of rank logits against a 1-based true rank.
pub fn sl_classification_loss(logits: &[f64], true_rank: usize) -> Result<f64, TrainError> {
    if logits.len() < 2 {
        return Err(TrainError::TooFew {
            min: 2,
            got: logits.len(),
        });
    }
    if true_rank == 0 || true_rank > logits.len() {
        return Err(TrainError::RankOutOfRange {
            rank: true_rank,
            n: logits.len(),
        });
    }
    let lse = suffix_logsumexp(logits)[0];
    Ok(lse - logits[true_rank - 1])
}

/// Replaces the move with a uniformly random legal move and labels the pair
/// with the synthetic weakest rank.
pub fn perturb_to_infinity<R: Rng + ?Sized>(
    pair: &StateActionPair,
    rng: &mut R,
) -> Result<StateActionPair, TrainError> {
    if pair.state.is_terminal() {
        return Err(TrainError::Terminal);
    }
    let legal: Vec<_> = pair.state.empty_cells().collect();
    let action = legal[rng.gen_range(0..legal.len())];
    Ok(StateActionPair {
        state: pair.state,
        action,
        rank: RankLabel::Infinity,
        outcome: pair.outcome,
    })
}

/// Rank-labelled games and their state-action pairs, indexed by rank
/// (1 strongest).
#[derive(Debug, Clone)]
pub struct RankDataset {
    game: GameSpec,
    games: Vec<Vec<GameRecord>>,
    pairs: Vec<Vec<StateActionPair>>,
}

impl RankDataset {
    /// Groups records by label. Labels must cover `1..=n` with no gaps.
    pub fn from_records(records: impl IntoIterator<Item = GameRecord>) -> Result<Self, TrainError> {
        let mut games: Vec<Vec<GameRecord>> = Vec::new();
        let mut pairs: Vec<Vec<StateActionPair>> = Vec::new();
        let mut game = None;
        for record in records {
            game.get_or_insert(record.game);
            let max_label = *record.side_labels.iter().max().expect("two labels") as usize;
            if record.side_labels.contains(&0) {
                return Err(TrainError::RankOutOfRange { rank: 0, n: max_label });
            }
            if games.len() < max_label {
                games.resize_with(max_label, Vec::new);
                pairs.resize_with(max_label, Vec::new);
            }
            for pair in record.pairs()? {
                if let RankLabel::Rank(r) = pair.rank {
                    pairs[r as usize - 1].push(pair);
                }
            }
            let [a, b] = record.side_labels;
            if a != b {
                games[b as usize - 1].push(record.clone());
            }
            games[a as usize - 1].push(record);
        }
        let game = game.ok_or(TrainError::EmptyRank(1))?;
        if let Some(i) = games.iter().position(|g| g.is_empty()) {
            return Err(TrainError::EmptyRank(i as u32 + 1));
        }
        Ok(RankDataset { game, games, pairs })
    }

    /// Keeps only the listed ranks and relabels them `1..=k` in the given
    /// (strongest first) order.
    pub fn subset(&self, ranks: &[u32]) -> Result<RankDataset, TrainError> {
        let n = self.num_ranks();
        let mut games = Vec::new();
        let mut pairs = Vec::new();
        for (new, &r) in ranks.iter().enumerate() {
            if r == 0 || r as usize > n {
                return Err(TrainError::RankOutOfRange { rank: r as usize, n });
            }
            let label = new as u32 + 1;
            games.push(
                self.games[r as usize - 1]
                    .iter()
                    .cloned()
                    .map(|mut g| {
                        g.side_labels = [label, label];
                        g
                    })
                    .collect(),
            );
            pairs.push(
                self.pairs[r as usize - 1]
                    .iter()
                    .map(|p| StateActionPair {
                        rank: RankLabel::Rank(label),
                        ..*p
                    })
                    .collect(),
            );
        }
        Ok(RankDataset {
            game: self.game,
            games,
            pairs,
        })
    }

    pub fn game(&self) -> GameSpec {
        self.game
    }

    pub fn num_ranks(&self) -> usize {
        self.games.len()
    }

    /// Games of a 1-based rank.
    pub fn games(&self, rank: u32) -> &[GameRecord] {
        &self.games[rank as usize - 1]
    }

    pub fn pairs(&self, rank: u32) -> &[StateActionPair] {
        &self.pairs[rank as usize - 1]
    }

    pub fn total_games(&self) -> usize {
        self.games.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrengthObjective {
    /// Listwise Bradley-Terry on composite scores.
    BradleyTerry,
    /// Per-move rank classification through the rank head.
    Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Pairs sampled per rank per step.
    pub m: usize,
    pub lr: f64,
    /// Step at which the learning rate is halved.
    pub lr_halve_at: usize,
    pub steps: usize,
    pub include_infinity: bool,
    pub w_policy: f64,
    pub w_value: f64,
    pub w_strength: f64,
    pub seed: u64,
    pub log_interval: usize,
    pub objective: StrengthObjective,
    pub checkpoint_interval: usize,
    pub checkpoint_path: Option<PathBuf>,
    pub log_path: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            m: 7,
            lr: 0.01,
            lr_halve_at: 100_000,
            steps: 130_000,
            include_infinity: true,
            w_policy: 1.0,
            w_value: 1.0,
            w_strength: 1.0,
            seed: 0,
            log_interval: 100,
            objective: StrengthObjective::BradleyTerry,
            checkpoint_interval: 0,
            checkpoint_path: None,
            log_path: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.m < 1 {
            return Err(TrainError::InvalidConfig("m must be >= 1".into()));
        }
        if self.include_infinity && self.m < 2 {
            return Err(TrainError::InvalidConfig(
                "m must be >= 2 when the infinity rank is enabled".into(),
            ));
        }
        if [self.w_policy, self.w_value, self.w_strength]
            .iter()
            .any(|w| !(w.is_finite() && *w >= 0.0))
        {
            return Err(TrainError::InvalidConfig("loss weights must be >= 0".into()));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(TrainError::InvalidConfig("lr must be > 0".into()));
        }
        if self.log_interval == 0 {
            return Err(TrainError::InvalidConfig("log_interval must be >= 1".into()));
        }
        Ok(())
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        if step >= self.lr_halve_at {
            self.lr * 0.5
        } else {
            self.lr
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub label: RankLabel,
    pub pairs: Vec<StateActionPair>,
}

/// One training step's sample: `m` pairs for every rank, strongest first,
/// followed by the infinity row when enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct RankBatch {
    pub rows: Vec<BatchRow>,
}

impl RankBatch {
    pub fn has_infinity(&self) -> bool {
        self.rows.iter().any(|r| r.label == RankLabel::Infinity)
    }
}

pub fn sample_rank_batch<R: Rng + ?Sized>(
    dataset: &RankDataset,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<RankBatch, TrainError> {
    let n = dataset.num_ranks();
    let mut rows = Vec::with_capacity(n + 1);
    for r in 1..=n as u32 {
        let pool = dataset.pairs(r);
        if pool.len() < config.m {
            return Err(TrainError::InsufficientData {
                rank: r,
                available: pool.len(),
                needed: config.m,
            });
        }
        let pairs = index::sample(rng, pool.len(), config.m)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        rows.push(BatchRow {
            label: RankLabel::Rank(r),
            pairs,
        });
    }
    if config.include_infinity {
        let mut pairs = Vec::with_capacity(config.m);
        for _ in 0..config.m {
            let r = rng.gen_range(1..=n as u32);
            let pool = dataset.pairs(r);
            let source = &pool[rng.gen_range(0..pool.len())];
            pairs.push(perturb_to_infinity(source, rng)?);
        }
        rows.push(BatchRow {
            label: RankLabel::Infinity,
            pairs,
        });
    }
    Ok(RankBatch { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub strength: f64,
    pub policy: f64,
    pub value: f64,
    pub total: f64,
    /// Composite score per batch row, in row order.
    pub means: Vec<f64>,
}

/// Scratch buffers reused across steps.
#[derive(Debug, Default)]
pub struct StepBuffers {
    x: Vec<f64>,
    trace: Trace,
    grad: Vec<f64>,
    betas: Vec<Vec<f64>>,
    upstream: Upstream,
}

/// Loss and gradient of the joint objective on one batch, without updating.
pub fn batch_gradient(
    params: &ScorerParams,
    batch: &RankBatch,
    config: &TrainConfig,
    buf: &mut StepBuffers,
) -> Result<LossReport, TrainError> {
    let spec = params.spec();
    let game = batch
        .rows
        .first()
        .and_then(|r| r.pairs.first())
        .map(|p| p.state.spec())
        .ok_or(TrainError::TooFew { min: 1, got: 0 })?;
    if feature_len(game) != spec.input_len {
        return Err(ScorerError::LengthMismatch {
            expected: spec.input_len,
            got: feature_len(game),
        }
        .into());
    }
    buf.x.resize(spec.input_len, 0.0);
    buf.grad.clear();
    buf.grad.resize(params.len(), 0.0);

    let real_pairs: usize = batch
        .rows
        .iter()
        .filter(|r| r.label != RankLabel::Infinity)
        .map(|r| r.pairs.len())
        .sum();

    // Strength term.
    let mut strength = 0.0;
    let mut means = Vec::with_capacity(batch.rows.len());
    match config.objective {
        StrengthObjective::BradleyTerry => {
            buf.betas.resize(batch.rows.len(), Vec::new());
            for (row, betas) in batch.rows.iter().zip(buf.betas.iter_mut()) {
                betas.clear();
                for pair in &row.pairs {
                    encode_into(&pair.state, Some(pair.action.index()), &mut buf.x);
                    params.forward_into(&buf.x, &mut buf.trace)?;
                    betas.push(buf.trace.beta);
                }
                means.push(composite_score(betas)?);
            }
            if config.w_strength > 0.0 && means.len() >= 2 {
                strength = bt_listwise_loss(&means)?;
                let d_means = bt_listwise_grad(&means)?;
                for (row, d_mean) in batch.rows.iter().zip(d_means) {
                    let d_beta = config.w_strength * d_mean / row.pairs.len() as f64;
                    for pair in &row.pairs {
                        encode_into(&pair.state, Some(pair.action.index()), &mut buf.x);
                        params.forward_into(&buf.x, &mut buf.trace)?;
                        buf.upstream = Upstream {
                            d_beta,
                            ..Default::default()
                        };
                        params.accumulate_gradient(&buf.x, &mut buf.trace, &buf.upstream, &mut buf.grad)?;
                    }
                }
            }
        }
        StrengthObjective::Classification => {
            if spec.ranks == 0 {
                return Err(TrainError::InvalidConfig(
                    "classification objective needs a rank head".into(),
                ));
            }
            for row in batch.rows.iter().filter(|r| r.label != RankLabel::Infinity) {
                let RankLabel::Rank(r) = row.label else { unreachable!() };
                let mut row_sum = 0.0;
                for pair in &row.pairs {
                    encode_into(&pair.state, Some(pair.action.index()), &mut buf.x);
                    params.forward_into(&buf.x, &mut buf.trace)?;
                    let logits = &buf.trace.rank_logits;
                    strength += sl_classification_loss(logits, r as usize)? / real_pairs as f64;
                    row_sum += buf.trace.beta;
                    if config.w_strength > 0.0 {
                        let probs = crate::scorer::softmax(logits);
                        let scale = config.w_strength / real_pairs as f64;
                        let d: Vec<f64> = probs
                            .iter()
                            .enumerate()
                            .map(|(k, p)| scale * (p - if k + 1 == r as usize { 1.0 } else { 0.0 }))
                            .collect();
                        buf.upstream = Upstream {
                            d_rank_logits: d,
                            ..Default::default()
                        };
                        params.accumulate_gradient(&buf.x, &mut buf.trace, &buf.upstream, &mut buf.grad)?;
                    }
                }
                means.push(row_sum / row.pairs.len() as f64);
            }
        }
    }

    // Policy and value terms on the positions of real moves.
    let (mut policy, mut value) = (0.0, 0.0);
    if (config.w_policy > 0.0 || config.w_value > 0.0) && real_pairs > 0 {
        let scale = 1.0 / real_pairs as f64;
        let mut d_logits = vec![0.0; spec.actions];
        for row in batch.rows.iter().filter(|r| r.label != RankLabel::Infinity) {
            for pair in &row.pairs {
                encode_into(&pair.state, None, &mut buf.x);
                params.forward_into(&buf.x, &mut buf.trace)?;
                let logits = &buf.trace.logits;
                // Softmax restricted to legal moves.
                let max = pair
                    .state
                    .empty_cells()
                    .map(|a| logits[a.index()])
                    .fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = pair
                    .state
                    .empty_cells()
                    .map(|a| (logits[a.index()] - max).exp())
                    .sum();
                let log_z = max + sum.ln();
                policy += scale * (log_z - logits[pair.action.index()]);
                d_logits.fill(0.0);
                if config.w_policy > 0.0 {
                    for a in pair.state.empty_cells() {
                        d_logits[a.index()] = config.w_policy * scale * (logits[a.index()] - log_z).exp();
                    }
                    d_logits[pair.action.index()] -= config.w_policy * scale;
                }
                let target = pair.outcome.unwrap_or(0.0) * pair.state.to_move().sign();
                let err = buf.trace.value - target;
                value += scale * err * err;
                let d_value = if pair.outcome.is_some() {
                    config.w_value * scale * 2.0 * err
                } else {
                    0.0
                };
                buf.upstream = Upstream {
                    d_logits: d_logits.clone(),
                    d_value,
                    ..Default::default()
                };
                params.accumulate_gradient(&buf.x, &mut buf.trace, &buf.upstream, &mut buf.grad)?;
            }
        }
    }

    let total = config.w_strength * strength + config.w_policy * policy + config.w_value * value;
    if !total.is_finite() {
        return Err(TrainError::NonFinite("loss"));
    }
    Ok(LossReport {
        strength,
        policy,
        value,
        total,
        means,
    })
}

/// One SGD update on the joint loss.
pub fn train_step(
    params: &ScorerParams,
    batch: &RankBatch,
    config: &TrainConfig,
    lr: f64,
) -> Result<(ScorerParams, LossReport), TrainError> {
    let mut buf = StepBuffers::default();
    let report = batch_gradient(params, batch, config, &mut buf)?;
    let mut next = params.clone();
    sgd_step_in_place(&mut next, &buf.grad, lr)?;
    Ok((next, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub step: usize,
    pub lr: f64,
    pub report: LossReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
}

impl TrainingLog {
    pub const HEADER: &'static str = "# step lr L_strength L_policy L_value mean_beta...";

    pub fn format_row(row: &LogRow) -> String {
        let mut line = format!(
            "{} {} {:.6} {:.6} {:.6}",
            row.step, row.lr, row.report.strength, row.report.policy, row.report.value
        );
        for m in &row.report.means {
            let _ = write!(line, " {m:.6}");
        }
        line
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&Self::format_row(row));
            out.push('\n');
        }
        out
    }
}

/// Default architecture for a game: two hidden layers of width `hidden` and a
/// per-move strength readout on the move one-hot.
pub fn default_scorer_spec(game: GameSpec, hidden: usize) -> ScorerSpec {
    ScorerSpec::new(feature_len(game), hidden, 2, game.action_space())
        .with_move_readout(2 * game.num_cells())
}

/// Full training loop: sampling, joint SGD updates, halving learning rate,
/// periodic logging and checkpointing.
pub fn train(
    dataset: &RankDataset,
    spec: ScorerSpec,
    config: &TrainConfig,
) -> Result<(ScorerParams, TrainingLog), TrainError> {
    config.validate()?;
    let mut params = init_params(spec, config.seed)?;
    train_from(&mut params, dataset, config)
        .map(|log| (params, log))
}

/// Continues training `params` in place.
pub fn train_from(
    params: &mut ScorerParams,
    dataset: &RankDataset,
    config: &TrainConfig,
) -> Result<TrainingLog, TrainError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_ba7c_4000_0001);
    let mut buf = StepBuffers::default();
    let mut log = TrainingLog::default();
    let mut log_file = match &config.log_path {
        Some(path) => {
            let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{}", TrainingLog::HEADER)?;
            Some(f)
        }
        None => None,
    };
    for step in 0..config.steps {
        let batch = sample_rank_batch(dataset, config, &mut rng)?;
        let report = batch_gradient(params, &batch, config, &mut buf)?;
        let lr = config.lr_at(step);
        sgd_step_in_place(params, &buf.grad, lr)?;
        if (step + 1) % config.log_interval == 0 {
            let row = LogRow {
                step: step + 1,
                lr,
                report,
            };
            if let Some(f) = log_file.as_mut() {
                writeln!(f, "{}", TrainingLog::format_row(&row))?;
            }
            log.rows.push(row);
        }
        if config.checkpoint_interval > 0 && (step + 1) % config.checkpoint_interval == 0 {
            if let Some(path) = &config.checkpoint_path {
                save_checkpoint(params, path)?;
            }
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{initial_state, Action};
    use rand::SeedableRng;

    #[test]
    fn composite_examples() {
        assert_eq!(composite_score(&[2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert_eq!(composite_score(&[1.0, 3.0]).unwrap(), 2.0);
        assert!(composite_score(&[]).is_err());
    }

    #[test]
    fn win_probability_examples() {
        assert!((win_probability(&[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((win_probability(&[0.0, 0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((win_probability(&[1.0, 0.0]).unwrap() - e / (e + 1.0)).abs() < 1e-12);
        assert!((win_probability(&[1.0, 0.0]).unwrap() - 0.731059).abs() < 1e-6);
        assert!(win_probability(&[1.0]).is_err());
    }

    #[test]
    fn loss_closed_forms() {
        let ln2 = std::f64::consts::LN_2;
        for b in [-3.0, 0.0, 0.7, 40.0] {
            assert!((bt_listwise_loss(&[b, b]).unwrap() - ln2).abs() < 1e-12);
        }
        assert!((bt_listwise_loss(&[1.0, 0.0]).unwrap() - 0.313262).abs() < 1e-6);
        assert!((bt_listwise_loss(&[0.0, 0.0, 0.0]).unwrap() - 6f64.ln()).abs() < 1e-12);
        assert!(bt_listwise_loss(&[f64::NAN, 0.0]).is_err());
        // Large spreads stay finite.
        assert!(bt_listwise_loss(&[-800.0, 800.0]).unwrap().is_finite());
    }

    #[test]
    fn grad_two_ranks() {
        let g = bt_listwise_grad(&[0.0, 0.0]).unwrap();
        assert!((g[0] + 0.5).abs() < 1e-15 && (g[1] - 0.5).abs() < 1e-15);
        let g = bt_listwise_grad(&[2.0, -1.0]).unwrap();
        assert!((g[0] + g[1]).abs() < 1e-15);
    }

    #[test]
    fn sl_loss_examples() {
        let l = sl_classification_loss(&[0.0; 11], 4).unwrap();
        assert!((l - 11f64.ln()).abs() < 1e-12);
        assert!((l - 2.3979).abs() < 1e-4);
        let mut logits = vec![0.0; 5];
        logits[2] = 60.0;
        assert!(sl_classification_loss(&logits, 3).unwrap() < 1e-20);
        assert!(sl_classification_loss(&logits, 6).is_err());
        assert!(sl_classification_loss(&logits, 0).is_err());
    }

    #[test]
    fn perturb_forced_move() {
        let spec = GameSpec::tictactoe();
        // One empty cell left (index 8), no winner yet.
        let s = crate::game::GameState::from_diagram(spec, "XOX XOO OX.").unwrap();
        assert!(!s.is_terminal());
        let pair = StateActionPair::new(s, Action(8), RankLabel::Rank(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = perturb_to_infinity(&pair, &mut rng).unwrap();
        assert_eq!(p.action, Action(8));
        assert_eq!(p.rank, RankLabel::Infinity);

        let start = initial_state(spec).unwrap();
        let pair = StateActionPair::new(start, Action(4), RankLabel::Rank(1)).unwrap();
        for _ in 0..10_000 {
            let p = perturb_to_infinity(&pair, &mut rng).unwrap();
            assert!(start.is_legal(p.action));
        }
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::default();
        c.validate().unwrap();
        c.m = 1;
        assert!(c.validate().is_err());
        c.include_infinity = false;
        c.validate().unwrap();
        c.w_value = -1.0;
        assert!(c.validate().is_err());
        let c = TrainConfig {
            lr: 0.01,
            lr_halve_at: 10,
            ..Default::default()
        };
        assert_eq!(c.lr_at(9), 0.01);
        assert_eq!(c.lr_at(10), 0.005);
    }
}
