//! Exhaustive minimax for boards small enough to solve outright
//! (tic-tac-toe, Hex up to 3x3). Used as a ground truth for search tests.

use std::collections::HashMap;

use crate::game::{Action, Cell, GameError, GameSpec, GameState};

/// Memoised game-theoretic values, keyed by game and board contents.
#[derive(Debug, Default)]
pub struct Solver {
    memo: HashMap<(GameSpec, Vec<Cell>), i8>,
}

impl Solver {
    pub fn new() -> Self {
        Solver::default()
    }

    /// Value of `state` for the player to move: 1 win, 0 draw, -1 loss.
    pub fn value(&mut self, state: &GameState) -> Result<i8, GameError> {
        if let Some(v) = state.terminal_value() {
            return Ok((v * state.to_move().sign()) as i8);
        }
        let key = (state.spec(), state.cells().to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut best = -1;
        for a in state.legal_actions()? {
            best = best.max(-self.value(&state.apply(a)?)?);
            if best == 1 {
                break;
            }
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    /// Value for the mover of playing `action` in `state`.
    pub fn action_value(&mut self, state: &GameState, action: Action) -> Result<i8, GameError> {
        Ok(-self.value(&state.apply(action)?)?)
    }

    /// Whether `action` throws away value: some other move achieves a
    /// strictly better game-theoretic result.
    pub fn is_mistake(&mut self, state: &GameState, action: Action) -> Result<bool, GameError> {
        Ok(self.action_value(state, action)? < self.value(state)?)
    }
}
