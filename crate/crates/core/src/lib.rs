//! Exact engine for the transversal n-game: two players alternately claim
//! cells of an n×n grid and the first to own n cells with no two in a
//! common row or column wins.

pub mod board;
pub mod harness;
mod matching;
pub mod record;
pub mod solver;
pub mod strategy;
pub mod transforms;

pub use board::{Board, BoardError, Cell, GameStatus, Player, Variant, MAX_N};
pub use harness::{cross_check_solver, verify_exhaustive, verify_random, HarnessError, VerificationReport};
pub use record::{Engines, GameRecord, GameResult, MoveEntry, RecordError};
pub use solver::{best_line, solve, SolveError, SolveOptions, SolveResult, Solver, Value};
pub use strategy::{Strategy, StrategyError, StrategyId};
pub use transforms::{canonical_key, GoodTransform, KeyMode, PositionKey, TransformError};
