//! Experiment drivers: tournaments, Elo fitting, strength sweeps,
//! move-prediction accuracy, SA exponent calibration and limited-rank
//! training.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::datagen::{game_seed, play_game, Agent, DatagenError, GameSetup, SearchAgent};
use crate::game::GameSpec;
use crate::inference::{
    accuracy_curve_scored, build_profile, normal_ci, score_query, AccuracyCurve, InferenceError,
    PredictionConfig, StrengthProfile,
};
use crate::record::{GameRecord, RecordError};
use crate::scorer::{ScorerParams, ScorerSpec};
use crate::search::{decide, mcts_search, SearchConfig, SearchError, SearchMode, Target};
use crate::training::{train, RankDataset, TrainConfig, TrainError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("need at least {min} {what}, got {got}")]
    TooFew {
        what: &'static str,
        min: usize,
        got: usize,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Record(#[from] RecordError),
}

/// Settings shared by every game of a match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchSettings {
    pub game: GameSpec,
    /// Random opening moves, so that deterministic agents still play
    /// different games.
    pub opening_plies: usize,
    pub seed: u64,
}

/// Score of `a` against `b` over `games` games with colours alternating
/// (`a` moves first in even-numbered games). Draws count one half.
pub fn play_match(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    games: usize,
    settings: &MatchSettings,
) -> Result<f64, HarnessError> {
    let mut score = 0.0;
    for g in 0..games {
        // The same opening is used for both colour assignments of a pair.
        let setup = GameSetup {
            game: settings.game,
            id: format!("m{g}"),
            side_labels: [0, 0],
            opening_plies: settings.opening_plies,
            seed: game_seed(settings.seed, 0, g / 2),
        };
        let a_first = g % 2 == 0;
        let record = if a_first {
            play_game(a, b, &setup)?
        } else {
            play_game(b, a, &setup)?
        };
        let first_view = (record.outcome as f64 + 1.0) / 2.0;
        score += if a_first { first_view } else { 1.0 - first_view };
    }
    Ok(score)
}

/// `wins[i][j]`: score of agent `i` against agent `j` (draws count one
/// half); every pair played `games_per_pair` games.
#[derive(Debug, Clone, PartialEq)]
pub struct WinTable {
    pub names: Vec<String>,
    pub wins: Vec<Vec<f64>>,
    pub games_per_pair: usize,
}

impl WinTable {
    pub fn new(names: Vec<String>, games_per_pair: usize) -> Self {
        let n = names.len();
        WinTable {
            names,
            wins: vec![vec![0.0; n]; n],
            games_per_pair,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `w[i][j] + w[j][i] = G` for every pair.
    pub fn is_consistent(&self) -> bool {
        let g = self.games_per_pair as f64;
        (0..self.len()).all(|i| {
            (0..self.len()).all(|j| i == j || (self.wins[i][j] + self.wins[j][i] - g).abs() < 1e-9)
        })
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.wins[i][j] / self.games_per_pair as f64
    }

    /// Text form: a `#wintable games_per_pair=<G>` header, a name row, then
    /// one row per agent.
    pub fn to_text(&self) -> String {
        let mut out = format!("#wintable games_per_pair={}\n", self.games_per_pair);
        out.push_str(&self.names.join("\t"));
        out.push('\n');
        for row in &self.wins {
            let cells: Vec<String> = row.iter().map(|w| format!("{w}")).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<WinTable, HarnessError> {
        let bad = |m: &str| HarnessError::Invalid(format!("win table: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let g: usize = header
            .strip_prefix("#wintable games_per_pair=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad("bad header"))?;
        let names: Vec<String> = lines
            .next()
            .ok_or_else(|| bad("missing names"))?
            .split('\t')
            .map(str::to_string)
            .collect();
        let mut table = WinTable::new(names, g);
        for i in 0..table.len() {
            let row = lines.next().ok_or_else(|| bad("missing row"))?;
            let vals: Vec<f64> = row
                .split('\t')
                .map(|v| v.trim().parse().map_err(|_| bad("bad number")))
                .collect::<Result<_, _>>()?;
            if vals.len() != table.len() {
                return Err(bad("row length"));
            }
            table.wins[i] = vals;
        }
        if !table.is_consistent() {
            return Err(bad("w[i][j] + w[j][i] != G"));
        }
        Ok(table)
    }
}

/// Every pair of agents plays `games_per_pair` games, half with each colour.
pub fn round_robin(
    agents: &mut [Box<dyn Agent + '_>],
    names: Vec<String>,
    games_per_pair: usize,
    settings: &MatchSettings,
) -> Result<WinTable, HarnessError> {
    if agents.len() < 2 {
        return Err(HarnessError::TooFew {
            what: "agents",
            min: 2,
            got: agents.len(),
        });
    }
    let mut table = WinTable::new(names, games_per_pair);
    for i in 0..agents.len() {
        for j in i + 1..agents.len() {
            let (left, right) = agents.split_at_mut(j);
            let pair_settings = MatchSettings {
                seed: settings.seed.wrapping_add(((i * 1000 + j) as u64) << 20),
                ..*settings
            };
            let s = play_match(left[i].as_mut(), right[0].as_mut(), games_per_pair, &pair_settings)?;
            table.wins[i][j] = s;
            table.wins[j][i] = games_per_pair as f64 - s;
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EloMethod {
    /// Least squares between expected and observed win rates.
    SquaredError,
    /// Maximum likelihood of the observed results.
    MaxLikelihood,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EloRatings {
    pub ratings: Vec<f64>,
    /// Agents whose rating hit the ±1000 bound around the mean.
    pub clipped: Vec<bool>,
    pub iterations: usize,
    pub method: EloMethod,
}

pub const ELO_MEAN: f64 = 1500.0;
const ELO_CLIP: f64 = 1000.0;
const ELO_K: f64 = std::f64::consts::LN_10 / 400.0;

/// Expected score of a player rated `ri` against one rated `rj`.
pub fn elo_expected(ri: f64, rj: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((rj - ri) / 400.0))
}

/// Rating gap implied by a win rate: `400 log10(p / (1 - p))`.
pub fn elo_gap(p: f64) -> f64 {
    400.0 * (p / (1.0 - p)).log10()
}

/// Fits logistic ratings (scale 400, base 10) to a win table. Starts every
/// agent at 1500 and runs coordinate-wise Newton updates until no rating
/// moves by more than `1e-6`; ratings are re-centred on a mean of 1500 and
/// clipped to ±1000 around it.
pub fn fit_elo(table: &WinTable, method: EloMethod) -> Result<EloRatings, HarnessError> {
    let n = table.len();
    if n < 2 {
        return Err(HarnessError::TooFew {
            what: "agents",
            min: 2,
            got: n,
        });
    }
    if table.games_per_pair == 0 {
        return Err(HarnessError::Invalid("games_per_pair must be >= 1".into()));
    }
    let mut r = vec![ELO_MEAN; n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut max_change: f64 = 0.0;
        for i in 0..n {
            let (mut num, mut den) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                let e = elo_expected(r[i], r[j]);
                let s = table.rate(i, j);
                let slope = ELO_K * e * (1.0 - e);
                match method {
                    EloMethod::SquaredError => {
                        num += (s - e) * slope;
                        den += slope * slope;
                    }
                    EloMethod::MaxLikelihood => {
                        num += s - e;
                        den += slope;
                    }
                }
            }
            let step = if den > 0.0 { num / den } else { 0.0 };
            let old = r[i];
            r[i] = (r[i] + step).clamp(ELO_MEAN - ELO_CLIP, ELO_MEAN + ELO_CLIP);
            max_change = max_change.max((r[i] - old).abs());
        }
        let mean = r.iter().sum::<f64>() / n as f64;
        r.iter_mut()
            .for_each(|x| *x = (*x - mean + ELO_MEAN).clamp(ELO_MEAN - ELO_CLIP, ELO_MEAN + ELO_CLIP));
        if max_change < 1e-6 || iterations >= 100_000 {
            break;
        }
    }
    let clipped = r
        .iter()
        .map(|x| (x - ELO_MEAN).abs() >= ELO_CLIP - 1e-9)
        .collect();
    Ok(EloRatings {
        ratings: r,
        clipped,
        iterations,
        method,
    })
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                out[idx[k]] = avg;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let (mut vx, mut vy) = (0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// Two-sided p-value of the pooled two-proportion z-test.
pub fn two_proportion_p_value(x1: f64, n1: usize, x2: f64, n2: usize) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (x1 + x2) / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    let z = (x1 / n1f - x2 / n2f) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z.abs()))
}

/// SE search targeting one rank of a profile.
pub fn se_config(base: &SearchConfig, profile: &StrengthProfile, rank: u32) -> SearchConfig {
    SearchConfig {
        mode: SearchMode::Se,
        target: Target::from_profile(profile, rank),
        ..base.clone()
    }
}

/// SA search with exponent `z`.
pub fn sa_config(base: &SearchConfig, z: f64) -> SearchConfig {
    SearchConfig {
        mode: SearchMode::Sa,
        z,
        ..base.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub score: f64,
    pub games: usize,
    pub win_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Spearman correlation between row index and win rate.
    pub spearman: f64,
}

/// Plays every candidate configuration against a fixed baseline
/// configuration.
pub fn sweep_against(
    params: &ScorerParams,
    candidates: &[(String, SearchConfig)],
    baseline: &SearchConfig,
    games: usize,
    settings: &MatchSettings,
) -> Result<SweepResult, HarnessError> {
    let mut rows = Vec::new();
    for (i, (label, config)) in candidates.iter().enumerate() {
        let mut a = SearchAgent::new(params, config.clone(), 0);
        let mut b = SearchAgent::new(params, baseline.clone(), 0);
        let s = MatchSettings {
            seed: settings.seed.wrapping_add((i as u64) << 32),
            ..*settings
        };
        let score = play_match(&mut a, &mut b, games, &s)?;
        let win_rate = score / games as f64;
        let (ci_low, ci_high) = normal_ci(win_rate, games);
        rows.push(SweepRow {
            label: label.clone(),
            score,
            games,
            win_rate,
            ci_low,
            ci_high,
        });
    }
    let idx: Vec<f64> = (0..rows.len()).map(|i| i as f64).collect();
    let rates: Vec<f64> = rows.iter().map(|r| r.win_rate).collect();
    Ok(SweepResult {
        spearman: spearman(&idx, &rates),
        rows,
    })
}

/// SE agents targeting each rank in `targets` against an SE agent targeting
/// `baseline_rank`.
pub fn strength_sweep(
    params: &ScorerParams,
    profile: &StrengthProfile,
    base: &SearchConfig,
    targets: &[u32],
    baseline_rank: u32,
    games: usize,
    settings: &MatchSettings,
) -> Result<SweepResult, HarnessError> {
    let candidates: Vec<(String, SearchConfig)> = targets
        .iter()
        .map(|&r| (format!("se-r{r}"), se_config(base, profile, r)))
        .collect();
    sweep_against(params, &candidates, &se_config(base, profile, baseline_rank), games, settings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveAccuracy {
    pub correct: usize,
    pub positions: usize,
    pub accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fraction of the positions played by `rank` in `games` where the search's
/// decision equals the recorded move.
pub fn move_prediction_accuracy(
    params: &ScorerParams,
    config: &SearchConfig,
    games: &[GameRecord],
    rank: u32,
    seed: u64,
) -> Result<MoveAccuracy, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut correct, mut positions) = (0, 0);
    for record in games {
        let states = record.replay()?;
        for (state, &played) in states.iter().zip(&record.moves) {
            if record.label_for(state) != rank {
                continue;
            }
            let result = mcts_search(params, state, config)?;
            if decide(&result, config, &mut rng)? == played {
                correct += 1;
            }
            positions += 1;
        }
    }
    let accuracy = if positions == 0 {
        0.0
    } else {
        correct as f64 / positions as f64
    };
    let (ci_low, ci_high) = normal_ci(accuracy, positions.max(1));
    Ok(MoveAccuracy {
        correct,
        positions,
        accuracy,
        ci_low,
        ci_high,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub z: f64,
    pub win_rate: f64,
    /// `(z, win rate)` of every evaluation, in order.
    pub trace: Vec<(f64, f64)>,
}

/// Bisection on the SA exponent `z` in `[lo, hi]` so that SA's win rate
/// against `baseline` approaches `target_rate`. Larger `z` plays greedier and
/// is assumed to win more.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_sa_z(
    params: &ScorerParams,
    base: &SearchConfig,
    baseline: &SearchConfig,
    target_rate: f64,
    (mut lo, mut hi): (f64, f64),
    steps: usize,
    games: usize,
    settings: &MatchSettings,
) -> Result<Calibration, HarnessError> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(HarnessError::Invalid("calibration needs lo < hi".into()));
    }
    let mut trace = Vec::new();
    let mut best = (f64::INFINITY, lo, 0.0);
    for step in 0..steps.max(1) {
        let z = 0.5 * (lo + hi);
        let mut a = SearchAgent::new(params, sa_config(base, z), 0);
        let mut b = SearchAgent::new(params, baseline.clone(), 0);
        let s = MatchSettings {
            seed: settings.seed.wrapping_add((step as u64) << 32),
            ..*settings
        };
        let rate = play_match(&mut a, &mut b, games, &s)? / games as f64;
        trace.push((z, rate));
        let err = (rate - target_rate).abs();
        if err < best.0 {
            best = (err, z, rate);
        }
        if rate < target_rate {
            lo = z;
        } else {
            hi = z;
        }
    }
    Ok(Calibration {
        z: best.1,
        win_rate: best.2,
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct LimitedRankResult {
    pub params: ScorerParams,
    pub profile: StrengthProfile,
    pub curve: AccuracyCurve,
}

/// Trains on the kept ranks only, then profiles and evaluates on every rank.
#[allow(clippy::too_many_arguments)]
pub fn limited_rank_experiment(
    train_set: &RankDataset,
    kept: &[u32],
    candidate: &RankDataset,
    query: &RankDataset,
    spec: ScorerSpec,
    train_config: &TrainConfig,
    game_counts: &[usize],
    prediction: &PredictionConfig,
) -> Result<LimitedRankResult, HarnessError> {
    if kept.len() < 2 {
        return Err(HarnessError::TooFew {
            what: "kept ranks",
            min: 2,
            got: kept.len(),
        });
    }
    let subset = train_set.subset(kept)?;
    let (params, _) = train(&subset, spec, train_config)?;
    let profile = build_profile(&params, candidate)?;
    let scored = score_query(&params, query, false)?;
    let curve = accuracy_curve_scored(&profile, &scored, game_counts, prediction)?;
    Ok(LimitedRankResult {
        params,
        profile,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_from_rates(rates: &[Vec<f64>], g: usize) -> WinTable {
        let mut t = WinTable::new((0..rates.len()).map(|i| format!("a{i}")).collect(), g);
        for i in 0..rates.len() {
            for j in 0..rates.len() {
                if i != j {
                    t.wins[i][j] = rates[i][j] * g as f64;
                }
            }
        }
        t
    }

    #[test]
    fn elo_two_agents() {
        let even = table_from_rates(&[vec![0.0, 0.5], vec![0.5, 0.0]], 100);
        let r = fit_elo(&even, EloMethod::SquaredError).unwrap();
        assert!(r.ratings.iter().all(|x| (x - 1500.0).abs() < 1e-9));

        let t = table_from_rates(&[vec![0.0, 0.75], vec![0.25, 0.0]], 100);
        for m in [EloMethod::SquaredError, EloMethod::MaxLikelihood] {
            let r = fit_elo(&t, m).unwrap();
            let gap = r.ratings[0] - r.ratings[1];
            assert!((gap - 400.0 * 3f64.log10()).abs() < 1e-3, "{gap}");
            assert!((gap - 190.85).abs() < 0.5);
            assert!(((r.ratings[0] + r.ratings[1]) / 2.0 - 1500.0).abs() < 1e-9);
        }
    }

    #[test]
    fn elo_transitive_three() {
        let truth = [1400.0, 1500.0, 1600.0];
        let rates: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| elo_expected(truth[i], truth[j])).collect())
            .collect();
        let r = fit_elo(&table_from_rates(&rates, 1000), EloMethod::SquaredError).unwrap();
        for i in 0..3 {
            assert!((r.ratings[i] - truth[i]).abs() < 1.0);
        }
    }

    #[test]
    fn elo_degenerate_is_clipped() {
        let t = table_from_rates(&[vec![0.0, 1.0], vec![0.0, 0.0]], 10);
        let r = fit_elo(&t, EloMethod::SquaredError).unwrap();
        assert!(r.clipped.iter().any(|&c| c));
        assert!(r.ratings.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), 0.0);
    }

    #[test]
    fn two_proportion() {
        assert!((two_proportion_p_value(50.0, 100, 50.0, 100) - 1.0).abs() < 1e-12);
        // z = 2.8284 for 60/100 vs 40/100.
        let p = two_proportion_p_value(60.0, 100, 40.0, 100);
        assert!((p - 0.004678).abs() < 1e-4, "{p}");
    }

    #[test]
    fn win_table_text() {
        let mut t = WinTable::new(vec!["a".into(), "b".into()], 4);
        t.wins[0][1] = 3.0;
        t.wins[1][0] = 1.0;
        assert_eq!(WinTable::from_text(&t.to_text()).unwrap(), t);
        t.wins[1][0] = 2.0;
        assert!(WinTable::from_text(&t.to_text()).is_err());
    }
}
