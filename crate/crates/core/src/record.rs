//! Game transcripts.
//!
//! A [`GameRecord`] is stored as pretty-printed JSON, one file per game.
//! Field order is fixed by the struct definitions, so serializing a parsed
//! record reproduces the original bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, BoardError, Cell, GameStatus, Player, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Engines {
    /// Strategy id or `"human"`.
    pub x: String,
    pub o: String,
}

impl Default for Engines {
    fn default() -> Self {
        Engines {
            x: "human".into(),
            o: "human".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveEntry {
    pub player: Player,
    pub row: u8,
    pub col: u8,
}

impl MoveEntry {
    pub fn new(player: Player, cell: Cell) -> Self {
        MoveEntry {
            player,
            row: cell.row,
            col: cell.col,
        }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResult {
    /// `None` for a draw.
    pub winner: Option<Player>,
    /// Set when Breaker won before the board filled up.
    pub adjudicated: bool,
}

impl GameResult {
    pub fn from_status(status: GameStatus, board: &Board, variant: Variant) -> Option<GameResult> {
        match status {
            GameStatus::InProgress { .. } => None,
            GameStatus::Draw => Some(GameResult {
                winner: None,
                adjudicated: false,
            }),
            GameStatus::Won(p) => Some(GameResult {
                winner: Some(p),
                adjudicated: variant == Variant::MakerBreaker && p == Player::O && !board.is_full(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub id: String,
    pub n: usize,
    pub variant: Variant,
    pub engines: Engines,
    pub moves: Vec<MoveEntry>,
    pub result: Option<GameResult>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("move {index}: {source}")]
    IllegalMove { index: usize, source: BoardError },
    #[error("move {index} is by {got}, expected {expected}")]
    OutOfTurn {
        index: usize,
        expected: Player,
        got: Player,
    },
    #[error("game ended before move {0}")]
    PlayAfterEnd(usize),
    #[error("stored result {stored:?} does not match replayed result {replayed:?}")]
    ResultMismatch {
        stored: Option<GameResult>,
        replayed: Option<GameResult>,
    },
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
}

impl GameRecord {
    pub fn new(id: impl Into<String>, n: usize, variant: Variant, engines: Engines) -> Self {
        GameRecord {
            id: id.into(),
            n,
            variant,
            engines,
            moves: Vec::new(),
            result: None,
        }
    }

    /// Replays the moves and returns the final position and its result.
    pub fn replay(&self) -> Result<(Board, Option<GameResult>), RecordError> {
        let mut board = Board::new(self.n)?;
        for (index, m) in self.moves.iter().enumerate() {
            if board.status(self.variant).is_over() {
                return Err(RecordError::PlayAfterEnd(index));
            }
            let expected = board.to_move();
            if m.player != expected {
                return Err(RecordError::OutOfTurn {
                    index,
                    expected,
                    got: m.player,
                });
            }
            board = board
                .play(m.player, m.cell(), self.variant)
                .map_err(|source| RecordError::IllegalMove { index, source })?;
        }
        let result = GameResult::from_status(board.status(self.variant), &board, self.variant);
        Ok((board, result))
    }

    /// Replays and checks the stored result.
    pub fn verify(&self) -> Result<Board, RecordError> {
        let (board, replayed) = self.replay()?;
        if replayed != self.result {
            return Err(RecordError::ResultMismatch {
                stored: self.result,
                replayed,
            });
        }
        Ok(board)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records always serialize")
    }

    pub fn from_json(text: &str) -> Result<GameRecord, RecordError> {
        Ok(serde_json::from_str(text)?)
    }

    /// One line per move, e.g. `1. X (1,1)`, then the result.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.moves.iter().enumerate() {
            out.push_str(&format!("{}. {} {}\n", i + 1, m.player, m.cell()));
        }
        out.push_str(&match self.result {
            None => "in progress\n".to_string(),
            Some(GameResult { winner: None, .. }) => "draw\n".to_string(),
            Some(GameResult {
                winner: Some(p),
                adjudicated,
            }) => format!("{p} wins{}\n", if adjudicated { " (adjudicated)" } else { "" }),
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: u8, col: u8) -> Cell {
        Cell::new(r, col)
    }

    fn record(variant: Variant, moves: &[(Player, Cell)]) -> GameRecord {
        let mut r = GameRecord::new("g1", 3, variant, Engines::default());
        r.moves = moves.iter().map(|&(p, c)| MoveEntry::new(p, c)).collect();
        r.result = r.replay().unwrap().1;
        r
    }

    #[test]
    fn replay_finds_the_winner() {
        use Player::*;
        let r = record(
            Variant::Strong,
            &[(X, c(1, 1)), (O, c(1, 2)), (X, c(2, 2)), (O, c(2, 1)), (X, c(3, 3))],
        );
        assert_eq!(
            r.result,
            Some(GameResult {
                winner: Some(X),
                adjudicated: false
            })
        );
        r.verify().unwrap();
        assert!(r.transcript().ends_with("X wins\n"));
    }

    #[test]
    fn maker_breaker_adjudication_is_marked() {
        use Player::*;
        let r = record(
            Variant::MakerBreaker,
            &[
                (X, c(1, 1)),
                (O, c(2, 1)),
                (X, c(3, 3)),
                (O, c(2, 2)),
                (X, c(1, 2)),
                (O, c(2, 3)),
            ],
        );
        assert_eq!(
            r.result,
            Some(GameResult {
                winner: Some(O),
                adjudicated: true
            })
        );
    }

    #[test]
    fn replay_rejects_bad_histories() {
        use Player::*;
        let mut r = GameRecord::new("g", 3, Variant::Strong, Engines::default());
        r.moves = vec![MoveEntry::new(O, c(1, 1))];
        assert!(matches!(r.replay(), Err(RecordError::OutOfTurn { .. })));
        r.moves = vec![MoveEntry::new(X, c(1, 1)), MoveEntry::new(O, c(1, 1))];
        assert!(matches!(r.replay(), Err(RecordError::IllegalMove { index: 1, .. })));
        r.moves = vec![MoveEntry::new(X, c(1, 1))];
        r.result = Some(GameResult {
            winner: None,
            adjudicated: false,
        });
        assert!(matches!(r.verify(), Err(RecordError::ResultMismatch { .. })));
    }

    #[test]
    fn json_layout_is_stable() {
        use Player::*;
        let r = record(Variant::Strong, &[(X, c(1, 1))]);
        let json = r.to_json();
        assert_eq!(GameRecord::from_json(&json).unwrap(), r);
        assert_eq!(GameRecord::from_json(&json).unwrap().to_json(), json);
        assert!(json.contains("\"variant\": \"strong\""));
        assert!(json.contains("\"result\": null"));
        assert!(GameRecord::from_json("{}").is_err());
    }
}
