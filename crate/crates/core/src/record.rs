//! Game records and the line-oriented record file format.
//!
//! A record file starts with the header line `#strength-records v1`; every
//! following non-empty line is one JSON object with the fields, in order,
//! `id`, `game`, `side_labels`, `moves`, `outcome`, `seed`:
//!
//! ```text
//! #strength-records v1
//! {"id":"t1-000003","game":"hex5","side_labels":[1,1],"moves":[12,7,13],"outcome":1,"seed":991}
//! ```
//!
//! `side_labels[0]` is the rank of the first player, `side_labels[1]` of the
//! second. `outcome` is +1/0/-1 from the first player's view.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{initial_state, Action, GameError, GameSpec, GameState, RankLabel, StateActionPair};

pub const RECORD_HEADER: &str = "#strength-records v1";

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record {id}: move {index} ({action}) is illegal: {source}")]
    IllegalMove {
        id: String,
        index: usize,
        action: usize,
        source: GameError,
    },
    #[error("record {id}: game does not end after its last move")]
    Unfinished { id: String },
    #[error("record {id}: stored outcome {stored} does not match replayed outcome {replayed}")]
    OutcomeMismatch { id: String, stored: i8, replayed: i8 },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub id: String,
    pub game: GameSpec,
    pub side_labels: [u32; 2],
    pub moves: Vec<Action>,
    pub outcome: i8,
    pub seed: u64,
}

impl GameRecord {
    /// Replays the moves and returns every position, from the initial one to
    /// the final one (`moves.len() + 1` states).
    pub fn replay(&self) -> Result<Vec<GameState>, RecordError> {
        let mut state = initial_state(self.game)?;
        let mut states = Vec::with_capacity(self.moves.len() + 1);
        states.push(state);
        for (index, &action) in self.moves.iter().enumerate() {
            state = state.apply(action).map_err(|source| RecordError::IllegalMove {
                id: self.id.clone(),
                index,
                action: action.index(),
                source,
            })?;
            states.push(state);
        }
        Ok(states)
    }

    /// Checks that the record replays to a finished game with the stored outcome.
    pub fn validate(&self) -> Result<(), RecordError> {
        let states = self.replay()?;
        let last = states.last().expect("at least the initial state");
        let replayed = last.terminal_value().ok_or_else(|| RecordError::Unfinished {
            id: self.id.clone(),
        })? as i8;
        if replayed != self.outcome {
            return Err(RecordError::OutcomeMismatch {
                id: self.id.clone(),
                stored: self.outcome,
                replayed,
            });
        }
        Ok(())
    }

    /// Rank of whoever moves in `state`.
    pub fn label_for(&self, state: &GameState) -> u32 {
        self.side_labels[state.to_move().index()]
    }

    /// All state-action pairs of the game, labelled with the mover's rank and
    /// carrying the final outcome.
    pub fn pairs(&self) -> Result<Vec<StateActionPair>, RecordError> {
        let states = self.replay()?;
        Ok(self
            .moves
            .iter()
            .zip(&states)
            .map(|(&action, state)| StateActionPair {
                state: *state,
                action,
                rank: RankLabel::Rank(self.label_for(state)),
                outcome: Some(self.outcome as f64),
            })
            .collect())
    }
}

pub fn write_records(path: impl AsRef<Path>, records: &[GameRecord]) -> Result<(), RecordError> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{RECORD_HEADER}")?;
    for record in records {
        let line = serde_json::to_string(record).map_err(io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<GameRecord>, RecordError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = BufReader::new(fs::File::open(path)?);
    let mut records = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim() == RECORD_HEADER => {}
        Some((_, Ok(header))) => {
            return Err(RecordError::Parse {
                path: display,
                line: 1,
                msg: format!("expected header '{RECORD_HEADER}', found '{header}'"),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(RecordError::Parse {
                path: display,
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| RecordError::Parse {
            path: display.clone(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GameRecord {
        GameRecord {
            id: "g1".into(),
            game: GameSpec::tictactoe(),
            side_labels: [2, 2],
            moves: [0, 3, 1, 4, 2].into_iter().map(Action).collect(),
            outcome: 1,
            seed: 5,
        }
    }

    #[test]
    fn replay_and_validate() {
        let r = sample();
        assert_eq!(r.replay().unwrap().len(), 6);
        r.validate().unwrap();
        let pairs = r.pairs().unwrap();
        assert_eq!(pairs.len(), 5);
        assert!(pairs.iter().all(|p| p.rank == RankLabel::Rank(2)));
        assert_eq!(pairs[3].depth(), 3);

        let mut bad = sample();
        bad.outcome = -1;
        assert!(matches!(bad.validate(), Err(RecordError::OutcomeMismatch { .. })));
        let mut illegal = sample();
        illegal.moves[1] = Action(0);
        assert!(matches!(illegal.validate(), Err(RecordError::IllegalMove { index: 1, .. })));
        let mut short = sample();
        short.moves.pop();
        assert!(matches!(short.validate(), Err(RecordError::Unfinished { .. })));
    }

    #[test]
    fn file_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("games.jsonl");
        write_records(&path, &[sample()]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "#strength-records v1\n{\"id\":\"g1\",\"game\":\"tictactoe\",\"side_labels\":[2,2],\"moves\":[0,3,1,4,2],\"outcome\":1,\"seed\":5}\n"
        );
        assert_eq!(read_records(&path).unwrap(), vec![sample()]);

        fs::write(&path, "{\"id\":1}\n").unwrap();
        assert!(matches!(read_records(&path), Err(RecordError::Parse { line: 1, .. })));
    }
}
