//! Maker's win for n ≥ 4 by reduction to smaller grids.
//!
//! The strategy tracks an active sub-grid (lists of real rows and columns)
//! whose top-left cell Maker already owns. If Breaker answers in the
//! sub-grid's first row or column, or outside it, the first row and column
//! are dropped and Maker opens the smaller grid in its corner. If Breaker
//! answers at (a,b) deeper in, Maker takes (a,c) for the smallest c ∉ {1,b}
//! and drops row a and column c. Every dropped row/column pair meets in a
//! Maker cell, so a transversal of the final 4×4 grid completes a real one.
//! That 4×4 game is played from a solver-derived move table.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{ensure_turn, opponent_reply, Strategy, StrategyError, StrategyId};
use crate::board::{Board, Cell, Player, Variant};
use crate::solver::{SolveOptions, Solver, Value};

const BASE: usize = 4;

/// 4×4 position as (X mask, O mask), bit `4 * r + c`.
type BaseKey = (u16, u16);

fn base_key(b: &Board) -> BaseKey {
    let p = b.packed().expect("4x4 packs");
    (p as u16, (p >> 64) as u16)
}

fn base_solver() -> Solver {
    Solver::new(SolveOptions {
        memo_capacity: 1 << 18,
        ..SolveOptions::default()
    })
}

/// Winning Maker moves for every 4×4 position with Maker to move that can
/// arise once Maker holds (1,1) and follows the table, including positions
/// where Breaker spent moves outside the grid.
pub fn maker_breaker_table() -> &'static HashMap<BaseKey, Cell> {
    static TABLE: OnceLock<HashMap<BaseKey, Cell>> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn build_table() -> HashMap<BaseKey, Cell> {
    let mut solver = base_solver();
    let mut table = HashMap::new();
    let start = Board::from_cells(BASE, &[Cell::new(1, 1)], &[]).expect("valid");
    let mut stack = vec![start];
    // `stack` holds positions with Breaker to move (or to pass).
    let mut visited = std::collections::HashSet::new();
    while let Some(q) = stack.pop() {
        if !visited.insert(base_key(&q)) {
            continue;
        }
        let mut options: Vec<Board> = q.empty_cells().into_iter().map(|e| q.placed(Player::O, e)).collect();
        options.push(q);
        for p in options {
            if p.status(Variant::MakerBreaker).is_over() || table.contains_key(&base_key(&p)) {
                continue;
            }
            let r = solver
                .solve_any(&p, Player::X, Variant::MakerBreaker)
                .expect("4x4 positions are within the solver's bound");
            assert_eq!(r.value, Value::FirstPlayerWin, "Maker must win the 4x4 base from {p:?}");
            let m = r.best_move.expect("game in progress");
            table.insert(base_key(&p), m);
            let next = p.placed(Player::X, m);
            if !next.status(Variant::MakerBreaker).is_over() {
                stack.push(next);
            }
        }
    }
    table
}

#[derive(Debug, Clone)]
pub struct MakerBreakerState {
    n: usize,
    rows: Vec<u8>,
    cols: Vec<u8>,
    started: bool,
    seen: Board,
}

fn invariant(msg: impl Into<String>) -> StrategyError {
    StrategyError::InvariantViolated(msg.into())
}

impl MakerBreakerState {
    pub fn new(n: usize) -> Result<Self, StrategyError> {
        if n < BASE {
            return Err(StrategyError::Unsupported(format!(
                "maker-breaker needs n >= 4, got {n}"
            )));
        }
        let lines: Vec<u8> = (1..=n as u8).collect();
        Ok(MakerBreakerState {
            n,
            rows: lines.clone(),
            cols: lines,
            started: false,
            seen: Board::new(n).map_err(|e| StrategyError::Unsupported(e.to_string()))?,
        })
    }

    /// Real rows and columns of the active sub-grid.
    pub fn subgrid(&self) -> (&[u8], &[u8]) {
        (&self.rows, &self.cols)
    }

    fn project(&self, b: &Board) -> Board {
        let mut p = Board::new(self.rows.len()).expect("valid size");
        for (i, &r) in self.rows.iter().enumerate() {
            for (j, &c) in self.cols.iter().enumerate() {
                if let Some(owner) = b.get(Cell::new(r, c)) {
                    p.set(owner, Cell::new(i as u8 + 1, j as u8 + 1));
                }
            }
        }
        p
    }

    fn corner(&self) -> Cell {
        Cell::new(self.rows[0], self.cols[0])
    }

    fn base_move(&self, b: &Board) -> Result<Cell, StrategyError> {
        let p = self.project(b);
        let local = match maker_breaker_table().get(&base_key(&p)) {
            Some(&m) => m,
            None => {
                let r = base_solver().solve_any(&p, Player::X, Variant::MakerBreaker)?;
                if r.value != Value::FirstPlayerWin {
                    return Err(invariant(format!("4x4 base position is not a Maker win:\n{p}")));
                }
                r.best_move.ok_or_else(|| invariant("base game already decided"))?
            }
        };
        Ok(Cell::new(self.rows[local.r()], self.cols[local.c()]))
    }
}

pub fn maker_breaker_next(
    state: &MakerBreakerState,
    b: &Board,
    last_opponent_move: Option<Cell>,
) -> Result<(Cell, MakerBreakerState), StrategyError> {
    let mut st = state.clone();
    if b.n() != st.n {
        return Err(StrategyError::InconsistentHistory(
            "board size differs from the strategy's".into(),
        ));
    }
    ensure_turn(b, Player::X, Variant::MakerBreaker)?;

    let mv = if !st.started {
        if b.stones() != 0 {
            return Err(StrategyError::InconsistentHistory(
                "maker-breaker must start from the empty board".into(),
            ));
        }
        st.started = true;
        st.corner()
    } else {
        let o = opponent_reply(&st.seen, b, Player::X, last_opponent_move)?
            .ok_or_else(|| StrategyError::InconsistentHistory("no Breaker move since Maker's last move".into()))?;
        if let Some(&win) = b.threats(Player::X).first() {
            win
        } else if st.rows.len() > BASE {
            // Active grid: Maker's corner plus at most Breaker's new stone.
            let proj = st.project(b);
            if proj.get(Cell::new(1, 1)) != Some(Player::X) || proj.count(Player::X) != 1 || proj.count(Player::O) > 1 {
                return Err(invariant("active sub-grid should hold only Maker's corner"));
            }
            let i = st.rows.iter().position(|&r| r == o.row);
            let j = st.cols.iter().position(|&c| c == o.col);
            match (i, j) {
                (Some(i), Some(j)) if i > 0 && j > 0 => {
                    let jc = (1..st.cols.len()).find(|&t| t != j).expect("at least 4 columns");
                    let m = Cell::new(st.rows[i], st.cols[jc]);
                    st.rows.remove(i);
                    st.cols.remove(jc);
                    m
                }
                _ => {
                    st.rows.remove(0);
                    st.cols.remove(0);
                    st.corner()
                }
            }
        } else {
            st.base_move(b)?
        }
    };

    if !b.is_empty_cell(mv) {
        return Err(invariant(format!("chosen cell {mv} is occupied")));
    }
    st.seen = b.placed(Player::X, mv);
    Ok((mv, st))
}

impl Strategy for MakerBreakerState {
    fn id(&self) -> StrategyId {
        StrategyId::MakerBreaker
    }

    fn player(&self) -> Player {
        Player::X
    }

    fn next_move(&mut self, board: &Board, last: Option<Cell>) -> Result<Cell, StrategyError> {
        let (m, st) = maker_breaker_next(self, board, last)?;
        *self = st;
        Ok(m)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::GameStatus;

    fn mb_status(b: &Board) -> GameStatus {
        b.status(Variant::MakerBreaker)
    }

    fn c(r: u8, col: u8) -> Cell {
        Cell::new(r, col)
    }

    #[test]
    fn opens_in_the_corner() {
        for n in 4..=8 {
            let (m, _) =
                maker_breaker_next(&MakerBreakerState::new(n).unwrap(), &Board::new(n).unwrap(), None).unwrap();
            assert_eq!(m, c(1, 1));
        }
        assert!(MakerBreakerState::new(3).is_err());
    }

    #[test]
    fn deep_reply_takes_smallest_column() {
        let st = MakerBreakerState::new(5).unwrap();
        let b = Board::new(5).unwrap();
        let (m, st) = maker_breaker_next(&st, &b, None).unwrap();
        let b = b
            .apply_move(Player::X, m)
            .unwrap()
            .apply_move(Player::O, c(3, 4))
            .unwrap();
        let (m, st) = maker_breaker_next(&st, &b, Some(c(3, 4))).unwrap();
        assert_eq!(m, c(3, 2));
        assert_eq!(st.subgrid(), (&[1u8, 2, 4, 5][..], &[1u8, 3, 4, 5][..]));
    }

    #[test]
    fn edge_reply_restarts_in_the_next_corner() {
        let st = MakerBreakerState::new(6).unwrap();
        let b = Board::new(6).unwrap();
        let (m, st) = maker_breaker_next(&st, &b, None).unwrap();
        let b = b
            .apply_move(Player::X, m)
            .unwrap()
            .apply_move(Player::O, c(4, 1))
            .unwrap();
        let (m, st) = maker_breaker_next(&st, &b, None).unwrap();
        assert_eq!(m, c(2, 2));
        assert_eq!(st.subgrid().0, &[2u8, 3, 4, 5, 6][..]);
    }

    #[test]
    fn table_moves_are_solver_wins() {
        let table = maker_breaker_table();
        assert!(!table.is_empty());
        let mut solver = base_solver();
        for (&(xm, om), &m) in table {
            let mut p = Board::new(4).unwrap();
            for bit in 0..16u8 {
                let cell = c(bit / 4 + 1, bit % 4 + 1);
                if xm & (1 << bit) != 0 {
                    p.set(Player::X, cell);
                }
                if om & (1 << bit) != 0 {
                    p.set(Player::O, cell);
                }
            }
            assert!(!mb_status(&p).is_over());
            let after = p.placed(Player::X, m);
            let value = match mb_status(&after) {
                GameStatus::Won(Player::X) => Value::FirstPlayerWin,
                GameStatus::InProgress { .. } => {
                    solver
                        .solve_any(&after, Player::O, Variant::MakerBreaker)
                        .unwrap()
                        .value
                }
                _ => Value::SecondPlayerWin,
            };
            assert_eq!(value, Value::FirstPlayerWin, "{p:?} -> {m}");
        }
    }
}
