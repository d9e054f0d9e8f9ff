//! Deterministic move policies.
//!
//! The proof strategies reason about a normalized picture of the board.
//! Each keeps a `frame`, a good transform from real coordinates to that
//! picture, and composes every row/column swap the argument performs into
//! it. The real board is never relabelled: moves chosen in frame
//! coordinates are translated back through the inverse frame.

mod maker_breaker;
mod prop2;
mod theorem1;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::board::{Board, Cell, Player, Variant};
use crate::solver::{SolveError, SolveOptions, Solver};

pub use maker_breaker::{maker_breaker_next, maker_breaker_table, MakerBreakerState};
pub use prop2::{prop2_o_draw_next, prop2_x_draw_next, Prop2OState, Prop2XState};
pub use theorem1::{
    check_star, compute_s_o, normalize_checkpoint, theorem1_next, CaseData, CaseTag, Phase, Theorem1State,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("board does not follow from this strategy's own history: {0}")]
    InconsistentHistory(String),
    #[error("it is not {0}'s turn")]
    NotOurTurn(Player),
    #[error("the game is already over")]
    GameOver,
    #[error("strategy does not apply here: {0}")]
    Unsupported(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Solver(#[from] SolveError),
}

/// A player policy that can be driven move by move.
pub trait Strategy: Send + Sync {
    fn id(&self) -> StrategyId;
    fn player(&self) -> Player;
    fn next_move(&mut self, board: &Board, last_opponent_move: Option<Cell>) -> Result<Cell, StrategyError>;
    fn box_clone(&self) -> Box<dyn Strategy>;
}

impl Clone for Box<dyn Strategy> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyId {
    Theorem1,
    Prop2XDraw,
    Prop2ODraw,
    MakerBreaker,
    SolverPerfect,
    Random(u64),
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyId::Theorem1 => f.write_str("theorem1"),
            StrategyId::Prop2XDraw => f.write_str("prop2-x-draw"),
            StrategyId::Prop2ODraw => f.write_str("prop2-o-draw"),
            StrategyId::MakerBreaker => f.write_str("maker-breaker"),
            StrategyId::SolverPerfect => f.write_str("solver-perfect"),
            StrategyId::Random(seed) => write!(f, "random({seed})"),
        }
    }
}

impl FromStr for StrategyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theorem1" => Ok(StrategyId::Theorem1),
            "prop2-x-draw" => Ok(StrategyId::Prop2XDraw),
            "prop2-o-draw" => Ok(StrategyId::Prop2ODraw),
            "maker-breaker" => Ok(StrategyId::MakerBreaker),
            "solver-perfect" => Ok(StrategyId::SolverPerfect),
            "random" => Ok(StrategyId::Random(0)),
            other => other
                .strip_prefix("random(")
                .and_then(|rest| rest.strip_suffix(')'))
                .and_then(|seed| seed.trim().parse().ok())
                .map(StrategyId::Random)
                .ok_or_else(|| format!("unknown strategy `{other}`")),
        }
    }
}

impl StrategyId {
    /// The side this strategy is written for, if it is fixed.
    pub fn fixed_player(self) -> Option<Player> {
        match self {
            StrategyId::Theorem1 | StrategyId::Prop2XDraw | StrategyId::MakerBreaker => Some(Player::X),
            StrategyId::Prop2ODraw => Some(Player::O),
            StrategyId::SolverPerfect | StrategyId::Random(_) => None,
        }
    }

    pub fn instantiate(self, n: usize, variant: Variant, player: Player) -> Result<Box<dyn Strategy>, StrategyError> {
        if let Some(p) = self.fixed_player() {
            if p != player {
                return Err(StrategyError::Unsupported(format!("{self} only plays {p}")));
            }
        }
        Ok(match self {
            StrategyId::Theorem1 => {
                if variant != Variant::Strong {
                    return Err(StrategyError::Unsupported("theorem1 plays the strong game".into()));
                }
                Box::new(Theorem1State::new(n)?)
            }
            StrategyId::Prop2XDraw => Box::new(Prop2XState::new(n)?),
            StrategyId::Prop2ODraw => Box::new(Prop2OState::new(n)?),
            StrategyId::MakerBreaker => {
                if variant != Variant::MakerBreaker {
                    return Err(StrategyError::Unsupported(
                        "maker-breaker plays the Maker-Breaker game".into(),
                    ));
                }
                Box::new(MakerBreakerState::new(n)?)
            }
            StrategyId::SolverPerfect => Box::new(SolverPerfect::new(n, variant, player)?),
            StrategyId::Random(seed) => Box::new(RandomPlayer::new(player, seed)),
        })
    }
}

/// Difference between the board a strategy last left and the board it is
/// handed now: exactly one new opponent stone, nothing else.
pub(crate) fn opponent_reply(
    seen: &Board,
    now: &Board,
    me: Player,
    claimed: Option<Cell>,
) -> Result<Option<Cell>, StrategyError> {
    if seen.n() != now.n() {
        return Err(StrategyError::InconsistentHistory("board size changed".into()));
    }
    let opp = me.opponent();
    let mut added = None;
    for cell in seen.cells() {
        let (was, is) = (seen.get(cell), now.get(cell));
        if was == is {
            continue;
        }
        if was.is_some() || is != Some(opp) || added.is_some() {
            return Err(StrategyError::InconsistentHistory(format!(
                "unexpected change at {cell}"
            )));
        }
        added = Some(cell);
    }
    if claimed.is_some() && claimed != added {
        return Err(StrategyError::InconsistentHistory(format!(
            "reported last move {:?} does not match the board",
            claimed
        )));
    }
    Ok(added)
}

/// Fallback once a scripted line has run out: win if possible, otherwise
/// block, otherwise the first empty cell.
pub(crate) fn tail_move(b: &Board, me: Player, variant: Variant) -> Option<Cell> {
    if let Some(&c) = b.threats(me).first() {
        if variant == Variant::Strong || me == Player::X {
            return Some(c);
        }
    }
    if variant == Variant::Strong || me == Player::O {
        if let Some(&c) = b.threats(me.opponent()).first() {
            return Some(c);
        }
    }
    b.empty_cells().first().copied()
}

pub(crate) fn ensure_turn(b: &Board, me: Player, variant: Variant) -> Result<(), StrategyError> {
    if b.status(variant).is_over() {
        return Err(StrategyError::GameOver);
    }
    if b.to_move() != me {
        return Err(StrategyError::NotOurTurn(me));
    }
    Ok(())
}

/// Uniformly random legal moves from a seeded generator.
#[derive(Clone)]
pub struct RandomPlayer {
    player: Player,
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomPlayer {
    pub fn new(player: Player, seed: u64) -> Self {
        RandomPlayer {
            player,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Strategy for RandomPlayer {
    fn id(&self) -> StrategyId {
        StrategyId::Random(self.seed)
    }

    fn player(&self) -> Player {
        self.player
    }

    fn next_move(&mut self, board: &Board, _last: Option<Cell>) -> Result<Cell, StrategyError> {
        if board.to_move() != self.player {
            return Err(StrategyError::NotOurTurn(self.player));
        }
        board
            .empty_cells()
            .choose(&mut self.rng)
            .copied()
            .ok_or(StrategyError::GameOver)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

/// Plays the solver's best move. Clones share one table.
#[derive(Clone)]
pub struct SolverPerfect {
    player: Player,
    variant: Variant,
    solver: Arc<Mutex<Solver>>,
}

impl SolverPerfect {
    pub fn new(n: usize, variant: Variant, player: Player) -> Result<Self, StrategyError> {
        let opts = SolveOptions::default();
        if n > opts.full_game_bound {
            return Err(StrategyError::Unsupported(format!(
                "solver-perfect is limited to n <= {}",
                opts.full_game_bound
            )));
        }
        Ok(SolverPerfect {
            player,
            variant,
            solver: Arc::new(Mutex::new(Solver::new(opts))),
        })
    }
}

impl Strategy for SolverPerfect {
    fn id(&self) -> StrategyId {
        StrategyId::SolverPerfect
    }

    fn player(&self) -> Player {
        self.player
    }

    fn next_move(&mut self, board: &Board, _last: Option<Cell>) -> Result<Cell, StrategyError> {
        ensure_turn(board, self.player, self.variant)?;
        let mut solver = self.solver.lock().unwrap_or_else(|e| e.into_inner());
        let r = solver.solve(board, self.player, self.variant)?;
        r.best_move.ok_or(StrategyError::GameOver)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in [
            StrategyId::Theorem1,
            StrategyId::Prop2XDraw,
            StrategyId::Prop2ODraw,
            StrategyId::MakerBreaker,
            StrategyId::SolverPerfect,
            StrategyId::Random(42),
        ] {
            assert_eq!(id.to_string().parse::<StrategyId>(), Ok(id));
        }
        assert_eq!("random".parse::<StrategyId>(), Ok(StrategyId::Random(0)));
        assert!("random(x)".parse::<StrategyId>().is_err());
        assert!("minimax".parse::<StrategyId>().is_err());
    }

    #[test]
    fn instantiate_checks_sides_and_variants() {
        assert!(StrategyId::Theorem1.instantiate(4, Variant::Strong, Player::O).is_err());
        assert!(StrategyId::Theorem1
            .instantiate(4, Variant::MakerBreaker, Player::X)
            .is_err());
        assert!(StrategyId::Theorem1.instantiate(3, Variant::Strong, Player::X).is_err());
        assert!(StrategyId::Prop2ODraw
            .instantiate(3, Variant::Strong, Player::O)
            .is_ok());
        assert!(StrategyId::SolverPerfect
            .instantiate(5, Variant::Strong, Player::O)
            .is_err());
        assert!(StrategyId::Random(1).instantiate(7, Variant::Strong, Player::O).is_ok());
    }

    #[test]
    fn reply_detection() {
        let a = Board::from_cells(3, &[Cell::new(1, 1)], &[]).unwrap();
        let b = a.with_stone(Player::O, Cell::new(2, 2)).unwrap();
        assert_eq!(opponent_reply(&a, &b, Player::X, None), Ok(Some(Cell::new(2, 2))));
        assert!(opponent_reply(&a, &b, Player::X, Some(Cell::new(3, 3))).is_err());
        let c = b.with_stone(Player::O, Cell::new(3, 3)).unwrap();
        assert!(opponent_reply(&a, &c, Player::X, None).is_err());
        let d = a.with_stone(Player::X, Cell::new(3, 3)).unwrap();
        assert!(opponent_reply(&a, &d, Player::X, None).is_err());
    }

    #[test]
    fn random_player_is_seeded() {
        let b = Board::new(5).unwrap();
        let mut a = RandomPlayer::new(Player::X, 9);
        let mut c = RandomPlayer::new(Player::X, 9);
        assert_eq!(a.next_move(&b, None), c.next_move(&b, None));
    }
}
