//! Fixed-length numeric encoding of a position and a move.
//!
//! Layout for a board with `C` cells (length `3C + 5`):
//!
//! | slots        | meaning                                  |
//! |--------------|------------------------------------------|
//! | `0..C`       | 1.0 where the first player has a stone   |
//! | `C..2C`      | 1.0 where the second player has a stone  |
//! | `2C..3C`     | one-hot of the move (all zero: no move)  |
//! | `3C`         | 1.0 if the first player is to move       |
//! | `3C+1..3C+5` | move context (zero when there is no move) |
//!
//! The move context gives the fraction of the move's adjacent cells holding
//! the mover's stones, then the opponent's, followed by the same two
//! fractions over Hex bridge cells (always zero for tic-tac-toe).
//!
//! The no-move form ([`encode_state`]) is used for policy and value
//! evaluation of a position; the pair form ([`encode_features`]) is used for
//! the strength score of a move.

use crate::game::{adjacent_cells, hex_bridges, Cell, GameKind, GameSpec, GameState, Player, StateActionPair};

const CONTEXT_LEN: usize = 4;

pub type FeatureVector = Vec<f64>;

pub fn feature_len(spec: GameSpec) -> usize {
    3 * spec.num_cells() + 1 + CONTEXT_LEN
}

pub fn encode_features(spec: GameSpec, pair: &StateActionPair) -> FeatureVector {
    let mut out = vec![0.0; feature_len(spec)];
    encode_into(&pair.state, Some(pair.action.index()), &mut out);
    out
}

pub fn encode_state(state: &GameState) -> FeatureVector {
    let mut out = vec![0.0; feature_len(state.spec())];
    encode_into(state, None, &mut out);
    out
}

/// Writes the encoding into a caller-provided buffer of length
/// [`feature_len`].
pub fn encode_into(state: &GameState, action: Option<usize>, out: &mut [f64]) {
    let cells = state.spec().num_cells();
    debug_assert_eq!(out.len(), feature_len(state.spec()));
    out.fill(0.0);
    for (i, cell) in state.cells().iter().enumerate() {
        match cell {
            Cell::Stone(Player::First) => out[i] = 1.0,
            Cell::Stone(Player::Second) => out[cells + i] = 1.0,
            Cell::Empty => {}
        }
    }
    if state.to_move() == Player::First {
        out[3 * cells] = 1.0;
    }
    if let Some(a) = action {
        out[2 * cells + a] = 1.0;
        let me = Cell::Stone(state.to_move());
        let them = Cell::Stone(state.to_move().other());
        let ctx = 3 * cells + 1;
        let spec = state.spec();
        let adjacent = adjacent_cells(spec, a);
        let total = adjacent.iter().flatten().count().max(1) as f64;
        for &j in adjacent.iter().flatten() {
            let cell = state.cell(j);
            out[ctx] += (cell == me) as u8 as f64 / total;
            out[ctx + 1] += (cell == them) as u8 as f64 / total;
        }
        if spec.kind() == GameKind::Hex {
            let n = spec.size();
            let bridges = hex_bridges(n, a / n, a % n);
            let total = bridges.iter().flatten().count().max(1) as f64;
            for &j in bridges.iter().flatten() {
                let cell = state.cell(j);
                out[ctx + 2] += (cell == me) as u8 as f64 / total;
                out[ctx + 3] += (cell == them) as u8 as f64 / total;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{initial_state, Action, RankLabel};

    #[test]
    fn deterministic_and_length_stable() {
        let spec = GameSpec::hex(5).unwrap();
        let s = initial_state(spec).unwrap().apply(Action(12)).unwrap();
        let pair = StateActionPair::new(s, Action(3), RankLabel::Rank(1)).unwrap();
        let a = encode_features(spec, &pair);
        let b = encode_features(spec, &pair);
        assert_eq!(a, b);
        // 25 + 25 + 25 + 1 + 4
        assert_eq!(a.len(), 80);
        assert_eq!(feature_len(GameSpec::tictactoe()), 32);
    }

    #[test]
    fn actions_differ_only_in_action_slots() {
        let spec = GameSpec::tictactoe();
        let s = initial_state(spec).unwrap();
        let p0 = StateActionPair::new(s, Action(0), RankLabel::Rank(1)).unwrap();
        let p1 = StateActionPair::new(s, Action(1), RankLabel::Rank(1)).unwrap();
        let (a, b) = (encode_features(spec, &p0), encode_features(spec, &p1));
        let differing: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
        assert_eq!(differing, vec![18, 19]);
    }

    #[test]
    fn move_context() {
        let spec = GameSpec::hex(3).unwrap();
        // X to move. Cell 3 touches 0 and 4 (mine), 1 (theirs) and 6; its
        // bridge cells 2 and 7 are empty.
        let s = GameState::from_diagram(spec, "XO. .X. ..O").unwrap();
        let pair = StateActionPair::new(s, crate::game::Action(3), RankLabel::Rank(1)).unwrap();
        let x = encode_features(spec, &pair);
        assert_eq!(&x[28..], &[0.5, 0.25, 0.0, 0.0]);
    }

    #[test]
    fn state_encoding_has_no_action() {
        let s = initial_state(GameSpec::tictactoe()).unwrap();
        let x = encode_state(&s);
        assert!(x[18..27].iter().all(|&v| v == 0.0));
        assert_eq!(x[27], 1.0);
        assert!(x[28..].iter().all(|&v| v == 0.0));
    }
}
