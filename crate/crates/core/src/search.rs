//! Monte Carlo tree search with three decision styles.
//!
//! * `Vanilla`: PUCT selection, final move = most visited child.
//! * `Se`: the prior term of PUCT is reduced by `c1 * δ̂`, where `δ̂` is the
//!   tree-normalised distance between a child's subtree-mean strength score
//!   and a target score. Final move = most visited child.
//! * `Sa`: vanilla search, final move sampled in proportion to `N^z` after
//!   dropping children with `N < R * N_max`.
//!
//! Statistics live on edges: `N`, the summed value `W` from the view of the
//! player choosing the edge, and the summed leaf strength scores `B` of every
//! simulation that passed through the edge.

use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::{encode_into, feature_len};
use crate::game::{Action, GameError, GameState};
use crate::inference::StrengthProfile;
use crate::scorer::{ScorerError, ScorerParams, Trace};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("cannot search from a terminal position")]
    TerminalRoot,
    #[error("node has no children")]
    NoChildren,
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Supplies move priors, position values and move strength scores.
pub trait Evaluator {
    /// Fills `priors` with one probability per legal move, in
    /// [`GameState::empty_cells`] order, and returns the value of `state` for
    /// the player to move, in `[-1, 1]`.
    fn evaluate(&mut self, state: &GameState, priors: &mut Vec<f64>) -> Result<f64, SearchError>;

    /// Strength score of playing `action` in `state`.
    fn strength(&mut self, state: &GameState, action: Action) -> Result<f64, SearchError>;
}

/// Network-backed evaluator: masked softmax policy, tanh value, and the
/// strength head on the move encoding.
pub struct ScorerEvaluator<'a> {
    params: &'a ScorerParams,
    x: Vec<f64>,
    trace: Trace,
}

impl<'a> ScorerEvaluator<'a> {
    pub fn new(params: &'a ScorerParams) -> Self {
        ScorerEvaluator {
            params,
            x: vec![0.0; params.spec().input_len],
            trace: Trace::default(),
        }
    }

    fn check(&self, state: &GameState) -> Result<(), SearchError> {
        let need = feature_len(state.spec());
        if need != self.x.len() {
            return Err(ScorerError::LengthMismatch {
                expected: self.x.len(),
                got: need,
            }
            .into());
        }
        Ok(())
    }
}

impl Evaluator for ScorerEvaluator<'_> {
    fn evaluate(&mut self, state: &GameState, priors: &mut Vec<f64>) -> Result<f64, SearchError> {
        self.check(state)?;
        encode_into(state, None, &mut self.x);
        self.params.forward_into(&self.x, &mut self.trace)?;
        priors.clear();
        let logits = &self.trace.logits;
        let max = state
            .empty_cells()
            .map(|a| logits[a.index()])
            .fold(f64::NEG_INFINITY, f64::max);
        priors.extend(state.empty_cells().map(|a| (logits[a.index()] - max).exp()));
        let sum: f64 = priors.iter().sum();
        priors.iter_mut().for_each(|p| *p /= sum);
        Ok(self.trace.value)
    }

    fn strength(&mut self, state: &GameState, action: Action) -> Result<f64, SearchError> {
        self.check(state)?;
        encode_into(state, Some(action.index()), &mut self.x);
        self.params.forward_into(&self.x, &mut self.trace)?;
        Ok(self.trace.beta)
    }
}

/// Random-playout evaluator: the value is the result of one uniformly random
/// playout. Priors come from an optional policy network, flattened by a
/// temperature, otherwise they are uniform with a small seeded jitter that
/// breaks ties between equal moves. Strength scores are always zero.
pub struct RolloutEvaluator<'a> {
    rng: ChaCha8Rng,
    prior: Option<(ScorerEvaluator<'a>, f64)>,
}

impl<'a> RolloutEvaluator<'a> {
    pub fn new(seed: u64) -> Self {
        RolloutEvaluator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            prior: None,
        }
    }

    /// Takes priors proportional to `policy^(1/temperature)` from the policy
    /// head of `params`.
    pub fn with_prior(params: &'a ScorerParams, temperature: f64, seed: u64) -> Self {
        RolloutEvaluator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            prior: Some((ScorerEvaluator::new(params), temperature)),
        }
    }
}

impl Evaluator for RolloutEvaluator<'_> {
    fn evaluate(&mut self, state: &GameState, priors: &mut Vec<f64>) -> Result<f64, SearchError> {
        match &mut self.prior {
            Some((net, temperature)) => {
                net.evaluate(state, priors)?;
                if *temperature != 1.0 {
                    priors.iter_mut().for_each(|p| *p = p.powf(1.0 / *temperature));
                    let sum: f64 = priors.iter().sum();
                    priors.iter_mut().for_each(|p| *p /= sum);
                }
            }
            None => {
                priors.clear();
                priors.extend(state.empty_cells().map(|_| 1.0 + 0.01 * self.rng.gen::<f64>()));
                let sum: f64 = priors.iter().sum();
                priors.iter_mut().for_each(|p| *p /= sum);
            }
        }

        let me = state.to_move();
        let mut s = *state;
        let mut empty: Vec<Action> = s.empty_cells().collect();
        while !s.is_terminal() {
            let i = self.rng.gen_range(0..empty.len());
            s = s.apply(empty.swap_remove(i))?;
        }
        let outcome = s.terminal_value().expect("terminal");
        Ok(outcome * me.sign())
    }

    fn strength(&mut self, _state: &GameState, _action: Action) -> Result<f64, SearchError> {
        Ok(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Vanilla,
    Se,
    Sa,
}

impl std::str::FromStr for SearchMode {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vanilla" => Ok(SearchMode::Vanilla),
            "se" => Ok(SearchMode::Se),
            "sa" => Ok(SearchMode::Sa),
            _ => Err(SearchError::InvalidConfig(format!("unknown mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchMode::Vanilla => "vanilla",
            SearchMode::Se => "se",
            SearchMode::Sa => "sa",
        })
    }
}

/// Target strength score, optionally varying with the depth of the root.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Fixed(f64),
    /// Per-depth targets; depths past the table (or `NaN` entries) use the
    /// fallback.
    PerDepth { by_depth: Vec<f64>, fallback: f64 },
}

impl Target {
    /// Per-depth targets of one rank from a profile.
    pub fn from_profile(profile: &StrengthProfile, rank: u32) -> Target {
        let by_depth = (0..profile.max_depth())
            .map(|d| profile.depth_mean(rank, d).unwrap_or(f64::NAN))
            .collect();
        Target::PerDepth {
            by_depth,
            fallback: profile.mean(rank),
        }
    }

    pub fn at(&self, depth: usize) -> f64 {
        match self {
            Target::Fixed(t) => *t,
            Target::PerDepth { by_depth, fallback } => match by_depth.get(depth) {
                Some(t) if t.is_finite() => *t,
                _ => *fallback,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub simulations: usize,
    /// Exploration constant.
    pub c: f64,
    pub mode: SearchMode,
    /// Weight of the strength-distance penalty (SE mode).
    pub c1: f64,
    pub target: Target,
    /// Visit-count exponent (SA mode).
    pub z: f64,
    /// Relative visit threshold below which children are dropped (SA mode).
    pub r: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            simulations: 800,
            c: 1.25,
            mode: SearchMode::Vanilla,
            c1: 1.0,
            target: Target::Fixed(0.0),
            z: 1.0,
            r: 0.1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.simulations < 1 {
            return Err(SearchError::InvalidConfig("simulations must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return Err(SearchError::InvalidConfig("r must be in [0, 1]".into()));
        }
        if !self.c.is_finite() || !self.c1.is_finite() || !self.z.is_finite() {
            return Err(SearchError::InvalidConfig("c, c1 and z must be finite".into()));
        }
        Ok(())
    }
}

/// Statistics of one edge `(s, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeStats {
    pub prior: f64,
    pub n: u32,
    /// Summed value from the view of the player choosing this edge.
    pub w: f64,
    /// Summed strength scores of the leaves reached through this edge.
    pub b: f64,
}

impl EdgeStats {
    pub fn with_prior(prior: f64) -> Self {
        EdgeStats {
            prior,
            ..Default::default()
        }
    }

    /// Mean value; 0 for unvisited edges.
    pub fn q(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.w / self.n as f64
        }
    }

    /// Mean subtree strength score, defined once visited.
    pub fn beta_mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.b / self.n as f64)
    }
}

fn argmax_first(scores: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// `sqrt` of the visit count of the node owning `children`: its own
/// expansion visit plus the visits of its children.
fn exploration_scale(children: &[EdgeStats]) -> f64 {
    (1.0 + children.iter().map(|e| e.n as f64).sum::<f64>()).sqrt()
}

/// Index maximising `Q + c * P * sqrt(N_parent) / (1 + N)`; ties go to the
/// lowest index.
pub fn puct_select(children: &[EdgeStats], c: f64) -> Result<usize, SearchError> {
    let scale = exploration_scale(children);
    argmax_first(
        children
            .iter()
            .map(|e| e.q() + c * e.prior * scale / (1.0 + e.n as f64)),
    )
    .ok_or(SearchError::NoChildren)
}

/// Index maximising `Q + c * (P - c1 * δ̂) * sqrt(N_parent) / (1 + N)`. The
/// reduced prior may go negative.
pub fn se_puct_select(
    children: &[EdgeStats],
    delta_hat: &[f64],
    c: f64,
    c1: f64,
) -> Result<usize, SearchError> {
    let scale = exploration_scale(children);
    argmax_first(
        children
            .iter()
            .zip(delta_hat)
            .map(|(e, d)| e.q() + c * (e.prior - c1 * d) * scale / (1.0 + e.n as f64)),
    )
    .ok_or(SearchError::NoChildren)
}

/// Min-max normalisation to `[0, 1]`; all zeros when every value is equal.
pub fn normalize_delta(deltas: &[f64]) -> Vec<f64> {
    let min = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    deltas
        .iter()
        .map(|d| if max > min { (d - min) / (max - min) } else { 0.0 })
        .collect()
}

/// Adds one simulation to every edge of `path` (root first). `value` is
/// from the view of the player to move at the leaf, so the last edge, chosen
/// by the opponent, receives `-value` and signs alternate upwards.
pub fn backup(edges: &mut [EdgeStats], path: &[usize], value: f64, beta: f64) {
    let mut v = -value;
    for &e in path.iter().rev() {
        let edge = &mut edges[e];
        edge.n += 1;
        edge.w += v;
        edge.b += beta;
        v = -v;
    }
}

/// Root statistics and the most-visited move of a finished search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub actions: Vec<Action>,
    pub visits: Vec<u32>,
    pub q: Vec<f64>,
    pub priors: Vec<f64>,
    pub beta_mean: Vec<Option<f64>>,
    pub delta_hat: Vec<f64>,
    /// Target used for the root, when searching in SE mode.
    pub target: Option<f64>,
    pub chosen: Action,
    pub principal_variation: Vec<Action>,
}

impl SearchResult {
    /// Debug table: one row per root move.
    pub fn to_table(&self) -> String {
        let mut out = String::from("action N Q P beta_mean delta_hat\n");
        for i in 0..self.actions.len() {
            let beta = self.beta_mean[i].map_or("-".to_string(), |b| format!("{b:.4}"));
            let _ = writeln!(
                out,
                "{} {} {:.4} {:.4} {} {:.4}",
                self.actions[i], self.visits[i], self.q[i], self.priors[i], beta, self.delta_hat[i]
            );
        }
        out
    }
}

const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    state: GameState,
    first_edge: u32,
    num_edges: u32,
}

struct Tree {
    nodes: Vec<Node>,
    edges: Vec<EdgeStats>,
    actions: Vec<Action>,
    betas: Vec<f64>,
    children: Vec<u32>,
}

impl Tree {
    fn new(capacity: usize) -> Self {
        Tree {
            nodes: Vec::with_capacity(capacity),
            edges: Vec::with_capacity(capacity * 8),
            actions: Vec::with_capacity(capacity * 8),
            betas: Vec::with_capacity(capacity * 8),
            children: Vec::with_capacity(capacity * 8),
        }
    }

    /// Adds a node and, if not terminal, evaluates it and creates its edges.
    /// Returns the value for the player to move there.
    fn add_node<E: Evaluator + ?Sized>(
        &mut self,
        state: GameState,
        evaluator: &mut E,
        priors: &mut Vec<f64>,
    ) -> Result<f64, SearchError> {
        let first_edge = self.edges.len() as u32;
        let value = match state.terminal_value() {
            Some(outcome) => outcome * state.to_move().sign(),
            None => {
                let v = evaluator.evaluate(&state, priors)?;
                for (a, &p) in state.empty_cells().zip(priors.iter()) {
                    self.edges.push(EdgeStats::with_prior(p));
                    self.actions.push(a);
                    self.betas.push(0.0);
                    self.children.push(NO_CHILD);
                }
                v
            }
        };
        self.nodes.push(Node {
            state,
            first_edge,
            num_edges: self.edges.len() as u32 - first_edge,
        });
        Ok(value)
    }

    fn edge_range(&self, node: usize) -> std::ops::Range<usize> {
        let n = &self.nodes[node];
        n.first_edge as usize..(n.first_edge + n.num_edges) as usize
    }
}

/// Runs a search from `state` with the given evaluator.
pub fn mcts_search_with<E: Evaluator + ?Sized>(
    evaluator: &mut E,
    state: &GameState,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    config.validate()?;
    if state.is_terminal() {
        return Err(SearchError::TerminalRoot);
    }
    let se = config.mode == SearchMode::Se;
    let target = config.target.at(state.depth());
    let mut tree = Tree::new(config.simulations);
    let mut priors = Vec::new();
    tree.add_node(*state, evaluator, &mut priors)?;

    let mut path = Vec::new();
    let mut delta_hat = Vec::new();
    for _ in 1..config.simulations {
        // Tree-wide min/max of the strength distance over visited edges.
        let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
        if se {
            for e in tree.edges.iter().filter(|e| e.n > 0) {
                let d = (e.b / e.n as f64 - target).abs();
                dmin = dmin.min(d);
                dmax = dmax.max(d);
            }
        }

        path.clear();
        let mut node = 0usize;
        let (value, beta) = loop {
            let range = tree.edge_range(node);
            let children = &tree.edges[range.clone()];
            let pick = if se {
                delta_hat.clear();
                delta_hat.extend(children.iter().map(|e| match e.beta_mean() {
                    Some(m) if dmax > dmin => ((m - target).abs() - dmin) / (dmax - dmin),
                    _ => 0.0,
                }));
                se_puct_select(children, &delta_hat, config.c, config.c1)?
            } else {
                puct_select(children, config.c)?
            };
            let e = range.start + pick;
            path.push(e);
            let child = tree.children[e];
            if child == NO_CHILD {
                let parent_state = tree.nodes[node].state;
                let action = tree.actions[e];
                let next = parent_state.apply(action)?;
                if se {
                    tree.betas[e] = evaluator.strength(&parent_state, action)?;
                }
                tree.children[e] = tree.nodes.len() as u32;
                let v = tree.add_node(next, evaluator, &mut priors)?;
                break (v, tree.betas[e]);
            }
            let child = child as usize;
            let child_state = &tree.nodes[child].state;
            if let Some(outcome) = child_state.terminal_value() {
                break (outcome * child_state.to_move().sign(), tree.betas[e]);
            }
            node = child;
        };
        backup(&mut tree.edges, &path, value, beta);
    }

    let range = tree.edge_range(0);
    let root = &tree.edges[range.clone()];
    let visits: Vec<u32> = root.iter().map(|e| e.n).collect();
    let root_priors: Vec<f64> = root.iter().map(|e| e.prior).collect();
    let delta: Vec<f64> = {
        let d: Vec<Option<f64>> = root
            .iter()
            .map(|e| e.beta_mean().map(|m| (m - target).abs()))
            .collect();
        let defined: Vec<f64> = d.iter().flatten().copied().collect();
        let norm = normalize_delta(&defined);
        let mut it = norm.into_iter();
        d.iter()
            .map(|x| if x.is_some() { it.next().unwrap_or(0.0) } else { 0.0 })
            .collect()
    };
    let chosen = range.start + most_visited(&visits, &root_priors);

    let mut pv = vec![tree.actions[chosen]];
    let mut at = tree.children[chosen];
    while at != NO_CHILD {
        let r = tree.edge_range(at as usize);
        if r.is_empty() {
            break;
        }
        let v: Vec<u32> = tree.edges[r.clone()].iter().map(|e| e.n).collect();
        if v.iter().all(|&n| n == 0) {
            break;
        }
        let e = r.start + most_visited(&v, &[]);
        pv.push(tree.actions[e]);
        at = tree.children[e];
    }

    Ok(SearchResult {
        actions: tree.actions[range.clone()].to_vec(),
        visits,
        q: root.iter().map(EdgeStats::q).collect(),
        priors: root_priors,
        beta_mean: root.iter().map(EdgeStats::beta_mean).collect(),
        delta_hat: delta,
        target: se.then_some(target),
        chosen: tree.actions[chosen],
        principal_variation: pv,
    })
}

/// Runs a search evaluated by the scorer network.
pub fn mcts_search(
    params: &ScorerParams,
    state: &GameState,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    mcts_search_with(&mut ScorerEvaluator::new(params), state, config)
}

/// Index of the most visited child, ties to the lowest index; when nothing
/// was visited, the highest prior.
fn most_visited(visits: &[u32], priors: &[f64]) -> usize {
    if visits.iter().all(|&n| n == 0) && !priors.is_empty() {
        return argmax_first(priors.iter().copied()).unwrap_or(0);
    }
    argmax_first(visits.iter().map(|&n| n as f64)).unwrap_or(0)
}

/// Samples an index with probability proportional to `N^z` among children
/// with `N >= r * N_max`. Unvisited children are never chosen unless no child
/// was visited, in which case the choice is uniform.
pub fn sa_decide<R: Rng + ?Sized>(counts: &[u32], z: f64, r: f64, rng: &mut R) -> Result<usize, SearchError> {
    if counts.is_empty() {
        return Err(SearchError::NoChildren);
    }
    let max = *counts.iter().max().expect("non-empty") as f64;
    if max == 0.0 {
        return Ok(rng.gen_range(0..counts.len()));
    }
    let weights: Vec<f64> = counts
        .iter()
        .map(|&n| {
            let n = n as f64;
            if n == 0.0 || n < r * max {
                0.0
            } else {
                (n / max).powf(z)
            }
        })
        .collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| SearchError::InvalidConfig(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Final move: most visited for vanilla and SE, proportional sampling for SA.
pub fn decide<R: Rng + ?Sized>(
    result: &SearchResult,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<Action, SearchError> {
    match config.mode {
        SearchMode::Vanilla | SearchMode::Se => Ok(result.chosen),
        SearchMode::Sa => Ok(result.actions[sa_decide(&result.visits, config.z, config.r, rng)?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{initial_state, GameSpec};

    fn edge(prior: f64, n: u32, w: f64) -> EdgeStats {
        EdgeStats { prior, n, w, b: 0.0 }
    }

    #[test]
    fn puct_examples() {
        let fresh = [edge(0.5, 0, 0.0), edge(0.3, 0, 0.0), edge(0.2, 0, 0.0)];
        assert_eq!(puct_select(&fresh, 1.25).unwrap(), 0);
        let q = [edge(0.5, 10, 9.0), edge(0.5, 10, 1.0)];
        assert_eq!(puct_select(&q, 1.25).unwrap(), 0);
        let c0 = [edge(0.9, 3, 0.3), edge(0.05, 3, 1.5), edge(0.05, 4, 2.0)];
        assert_eq!(puct_select(&c0, 0.0).unwrap(), 1);
        assert!(puct_select(&[], 1.0).is_err());
        // Equal scores: lowest index.
        assert_eq!(puct_select(&[edge(0.5, 1, 0.0), edge(0.5, 1, 0.0)], 1.0).unwrap(), 0);
    }

    #[test]
    fn se_puct_examples() {
        let kids = [edge(0.4, 2, 0.2), edge(0.4, 2, 0.2)];
        assert_eq!(se_puct_select(&kids, &[0.0, 1.0], 1.25, 1.0).unwrap(), 0);
        assert_eq!(se_puct_select(&kids, &[1.0, 0.0], 1.25, 1.0).unwrap(), 1);

        // Hand-computed: parent visits 1 + 3 + 1 + 0 = 5, sqrt(5) = 2.2360680.
        // child 0: 0.5/3 + 1.5 * (0.2 - 2*0.9) * 2.236068 / 4 = -1.17497
        // child 1: -1.0    + 1.5 * (0.5 - 2*0.0) * 2.236068 / 2 = -0.16147
        // child 2: 0       + 1.5 * (0.3 - 2*0.4) * 2.236068 / 1 = -1.67705
        let kids = [edge(0.2, 3, 0.5), edge(0.5, 1, -1.0), edge(0.3, 0, 0.0)];
        assert_eq!(se_puct_select(&kids, &[0.9, 0.0, 0.4], 1.5, 2.0).unwrap(), 1);
        // With δ̂ on child 1 the unvisited child 2 wins:
        // child 1: -1 + 1.5*(0.5-2)*2.236068/2 = -3.51558, child 2: 1.5*0.3*2.236 = 1.00623
        assert_eq!(se_puct_select(&kids, &[0.9, 1.0, 0.0], 1.5, 2.0).unwrap(), 2);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_delta(&[0.2, 0.7]), vec![0.0, 1.0]);
        assert_eq!(normalize_delta(&[0.3, 0.3, 0.3]), vec![0.0; 3]);
        let d = normalize_delta(&[1.0, 2.0, 4.0]);
        assert_eq!(d[0], 0.0);
        assert!((d[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d[2], 1.0);
    }

    #[test]
    fn backup_examples() {
        let mut edges = vec![EdgeStats::default(); 3];
        backup(&mut edges, &[0], -1.0, 0.5);
        assert_eq!(edges[0].n, 1);
        assert_eq!(edges[0].q(), 1.0);
        assert_eq!(edges[0].beta_mean(), Some(0.5));
        backup(&mut edges, &[0], 1.0, 0.5);
        assert_eq!(edges[0].q(), 0.0);

        // Alternating signs along a path.
        let mut edges = vec![EdgeStats::default(); 3];
        backup(&mut edges, &[0, 1, 2], 1.0, 0.25);
        assert_eq!([edges[0].w, edges[1].w, edges[2].w], [-1.0, 1.0, -1.0]);
        assert!(edges.iter().all(|e| e.b == 0.25 && e.n == 1));
    }

    #[test]
    fn sa_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(sa_decide(&[8, 2], 1.0, 0.5, &mut rng).unwrap(), 0);
            assert_ne!(sa_decide(&[8, 0, 2], -1.0, 0.0, &mut rng).unwrap(), 1);
        }
        let n = 20_000;
        let zeros = (0..n)
            .filter(|_| sa_decide(&[8, 2], 0.0, 0.0, &mut rng).unwrap() == 0)
            .count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 0.02);
        let big = (0..n)
            .filter(|_| sa_decide(&[8, 2], 64.0, 0.0, &mut rng).unwrap() == 0)
            .count();
        assert_eq!(big, n);
    }

    #[test]
    fn one_simulation_only_expands_root() {
        let s = initial_state(GameSpec::hex(3).unwrap()).unwrap();
        let mut ev = RolloutEvaluator::new(1);
        let cfg = SearchConfig {
            simulations: 1,
            ..Default::default()
        };
        let res = mcts_search_with(&mut ev, &s, &cfg).unwrap();
        assert_eq!(res.visits.iter().sum::<u32>(), 0);
        assert_eq!(res.actions.len(), 9);
        assert!((res.priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn target_lookup() {
        let t = Target::PerDepth {
            by_depth: vec![1.0, f64::NAN, 3.0],
            fallback: -1.0,
        };
        assert_eq!(t.at(0), 1.0);
        assert_eq!(t.at(1), -1.0);
        assert_eq!(t.at(2), 3.0);
        assert_eq!(t.at(9), -1.0);
    }
}
