//! Perfect-play values by depth-first negamax over three outcomes.
//!
//! Values are from the mover's point of view: `1` win, `0` draw, `-1` loss.
//! A node stops expanding as soon as it finds a winning child, so every
//! stored value is exact and the table never needs bounds.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Cell, GameStatus, Player, Variant};
use crate::transforms::canonical_board;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Value {
    FirstPlayerWin,
    SecondPlayerWin,
    Draw,
}

impl Value {
    fn from_mover(v: i8, mover: Player) -> Value {
        match (v, mover) {
            (0, _) => Value::Draw,
            (1, Player::X) | (-1, Player::O) => Value::FirstPlayerWin,
            _ => Value::SecondPlayerWin,
        }
    }

    pub fn winner(self) -> Option<Player> {
        match self {
            Value::FirstPlayerWin => Some(Player::X),
            Value::SecondPlayerWin => Some(Player::O),
            Value::Draw => None,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Value::FirstPlayerWin => "FirstPlayerWin",
            Value::SecondPlayerWin => "SecondPlayerWin",
            Value::Draw => "Draw",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Use exact canonical keys near the root (n ≤ 4 only).
    pub symmetry: bool,
    pub node_limit: Option<u64>,
    /// Number of table slots; rounded up to a power of two.
    pub memo_capacity: usize,
    /// Largest n solved from any position.
    pub full_game_bound: usize,
    /// Beyond `full_game_bound`, positions with at most this many empty
    /// cells are still accepted (n ≤ 8).
    pub max_empty_cells: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            symmetry: false,
            node_limit: None,
            memo_capacity: 1 << 21,
            full_game_bound: 4,
            max_empty_cells: 14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub value: Value,
    pub best_move: Option<Cell>,
    pub nodes_visited: u64,
    pub table_hits: u64,
    pub elapsed: Duration,
}

/// Wire form: `{value, best_move, nodes, elapsed_ms}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub value: Value,
    pub best_move: Option<Cell>,
    pub nodes: u64,
    pub elapsed_ms: u64,
}

impl From<&SolveResult> for SolveSummary {
    fn from(r: &SolveResult) -> Self {
        SolveSummary {
            value: r.value,
            best_move: r.best_move,
            nodes: r.nodes_visited,
            elapsed_ms: r.elapsed.as_millis() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("node limit exceeded after {nodes} nodes; no value was established")]
    NodeLimitExceeded { nodes: u64 },
    #[error("inconsistent position: {0}")]
    InconsistentPosition(String),
    #[error("position too large to solve: n = {n} with {empty} empty cells")]
    Unsupported { n: usize, empty: usize },
}

#[derive(Clone, Copy, Default)]
struct Entry {
    key: u128,
    /// bit 0: occupied, bit 1: mover is O, bit 2: Maker-Breaker, bits 3..7: n.
    tag: u8,
    value: i8,
    /// Empty cells below the stored node; larger subtrees are kept.
    depth: u8,
}

/// Fixed-size table, one slot per index, depth-preferred replacement.
struct Table {
    slots: Vec<Entry>,
    mask: usize,
}

fn mix(key: u128, tag: u8) -> u64 {
    let mut h = (key as u64) ^ ((key >> 64) as u64).rotate_left(29) ^ (tag as u64) << 59;
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

impl Table {
    fn new(capacity: usize) -> Table {
        let size = capacity.max(2).next_power_of_two();
        Table {
            slots: vec![Entry::default(); size],
            mask: size - 1,
        }
    }

    fn get(&self, key: u128, tag: u8) -> Option<i8> {
        let e = &self.slots[mix(key, tag) as usize & self.mask];
        (e.tag == tag && e.key == key).then_some(e.value)
    }

    fn put(&mut self, key: u128, tag: u8, value: i8, depth: u8) {
        let e = &mut self.slots[mix(key, tag) as usize & self.mask];
        if e.tag & 1 == 0 || depth >= e.depth || (e.key == key && e.tag == tag) {
            *e = Entry { key, tag, value, depth };
        }
    }
}

/// Reusable search context; the table persists across `solve` calls.
pub struct Solver {
    opts: SolveOptions,
    table: Table,
    nodes: u64,
    hits: u64,
    variant: Variant,
}

enum Expansion {
    Decided(i8, Option<Cell>),
    Moves(Vec<Cell>),
}

impl Solver {
    pub fn new(opts: SolveOptions) -> Solver {
        Solver {
            table: Table::new(opts.memo_capacity),
            opts,
            nodes: 0,
            hits: 0,
            variant: Variant::Strong,
        }
    }

    pub fn options(&self) -> &SolveOptions {
        &self.opts
    }

    fn check_size(&self, b: &Board) -> Result<(), SolveError> {
        let n = b.n();
        let empty = b.empty_count();
        let ok = n <= 8 && (n <= self.opts.full_game_bound || empty <= self.opts.max_empty_cells);
        if ok {
            Ok(())
        } else {
            Err(SolveError::Unsupported { n, empty })
        }
    }

    /// Solves a position reached by alternating play.
    pub fn solve(&mut self, b: &Board, to_move: Player, variant: Variant) -> Result<SolveResult, SolveError> {
        if !b.is_consistent() {
            return Err(SolveError::InconsistentPosition(format!(
                "{} X stones and {} O stones",
                b.count(Player::X),
                b.count(Player::O)
            )));
        }
        if b.to_move() != to_move {
            return Err(SolveError::InconsistentPosition(format!(
                "stone counts put {} on move, not {to_move}",
                b.to_move()
            )));
        }
        if variant == Variant::Strong && b.has_won(Player::X) && b.has_won(Player::O) {
            return Err(SolveError::InconsistentPosition(
                "both players own a transversal".into(),
            ));
        }
        self.solve_any(b, to_move, variant)
    }

    /// Like [`Solver::solve`] but without the stone-count check. Maker-Breaker
    /// sub-games where Breaker has moved elsewhere leave Maker with surplus
    /// stones; extra Maker stones are harmless to Maker.
    pub(crate) fn solve_any(
        &mut self,
        b: &Board,
        to_move: Player,
        variant: Variant,
    ) -> Result<SolveResult, SolveError> {
        self.check_size(b)?;
        let start = Instant::now();
        self.nodes = 0;
        self.hits = 0;
        self.variant = variant;
        let (v, best_move) = match b.status(variant) {
            GameStatus::Won(p) => (if p == to_move { 1 } else { -1 }, None),
            GameStatus::Draw => (0, None),
            GameStatus::InProgress { .. } => {
                self.nodes += 1;
                match self.expand(b, to_move) {
                    Expansion::Decided(v, m) => (v, m),
                    Expansion::Moves(moves) => {
                        let (v, m) = self.best_of(b, to_move, &moves)?;
                        (v, Some(m))
                    }
                }
            }
        };
        Ok(SolveResult {
            value: Value::from_mover(v, to_move),
            best_move,
            nodes_visited: self.nodes,
            table_hits: self.hits,
            elapsed: start.elapsed(),
        })
    }

    /// Packed keys use stride n, so n is part of the tag.
    fn tag(&self, n: usize, mover: Player) -> u8 {
        1 | ((mover == Player::O) as u8) << 1 | ((self.variant == Variant::MakerBreaker) as u8) << 2 | (n as u8) << 3
    }

    fn key(&self, b: &Board) -> u128 {
        let use_canonical = self.opts.symmetry
            && match b.n() {
                0..=3 => true,
                4 => b.stones() <= 5,
                _ => false,
            };
        if use_canonical {
            canonical_board(b).packed()
        } else {
            b.packed()
        }
        .expect("n <= 8 checked on entry")
    }

    /// Value of a child position reached after `mover`'s opponent moved, or
    /// `None` when play continues. Children never contain a fresh win for
    /// the player who just moved: immediate wins are taken before
    /// enumeration.
    fn terminal(&self, b: &Board, mover: Player) -> Option<i8> {
        match self.variant {
            Variant::Strong => b.is_full().then_some(0),
            Variant::MakerBreaker => {
                if b.is_full() || !b.can_ever_win(Player::X) {
                    Some(if mover == Player::O { 1 } else { -1 })
                } else {
                    None
                }
            }
        }
    }

    fn expand(&self, b: &Board, mover: Player) -> Expansion {
        let opp = mover.opponent();
        let mover_can_win = self.variant == Variant::Strong || mover == Player::X;
        if mover_can_win {
            if let Some(&t) = b.threats(mover).first() {
                return Expansion::Decided(1, Some(t));
            }
        }
        let opp_can_win = self.variant == Variant::Strong || opp == Player::X;
        if opp_can_win {
            let opp_threats = b.threats(opp);
            match opp_threats.len() {
                0 => {}
                1 => return Expansion::Moves(opp_threats),
                _ => return Expansion::Decided(-1, Some(opp_threats[0])),
            }
        }
        Expansion::Moves(ordered_moves(b, mover))
    }

    fn best_of(&mut self, b: &Board, mover: Player, moves: &[Cell]) -> Result<(i8, Cell), SolveError> {
        let mut best = (-2i8, moves[0]);
        for &m in moves {
            let child = b.placed(mover, m);
            let v = -self.search(&child, mover.opponent())?;
            if v > best.0 {
                best = (v, m);
                if v == 1 {
                    break;
                }
            }
        }
        Ok(best)
    }

    fn search(&mut self, b: &Board, mover: Player) -> Result<i8, SolveError> {
        self.nodes += 1;
        if let Some(limit) = self.opts.node_limit {
            if self.nodes > limit {
                return Err(SolveError::NodeLimitExceeded { nodes: self.nodes });
            }
        }
        if let Some(v) = self.terminal(b, mover) {
            return Ok(v);
        }
        let key = self.key(b);
        let tag = self.tag(b.n(), mover);
        if let Some(v) = self.table.get(key, tag) {
            self.hits += 1;
            return Ok(v);
        }
        let v = match self.expand(b, mover) {
            Expansion::Decided(v, _) => v,
            Expansion::Moves(moves) => self.best_of(b, mover, &moves)?.0,
        };
        self.table.put(key, tag, v, b.empty_count() as u8);
        Ok(v)
    }
}

/// Cells that give the mover a threat first, then cells that grow the
/// mover's matching, then the rest; row-major within each group.
pub(crate) fn ordered_moves(b: &Board, mover: Player) -> Vec<Cell> {
    let n = b.n();
    let base = b.max_transversal_matching(mover);
    let mut scored: Vec<(u8, Cell)> = b
        .empty_cells()
        .into_iter()
        .map(|c| {
            let next = b.placed(mover, c);
            let m = next.max_transversal_matching(mover);
            let score = if m + 1 >= n && next.threat_count(mover) > 0 {
                2
            } else if m > base {
                1
            } else {
                0
            };
            (score, c)
        })
        .collect();
    scored.sort_by_key(|s| std::cmp::Reverse(s.0));
    scored.into_iter().map(|(_, c)| c).collect()
}

pub fn solve(b: &Board, to_move: Player, variant: Variant, opts: SolveOptions) -> Result<SolveResult, SolveError> {
    Solver::new(opts).solve(b, to_move, variant)
}

/// A principal variation: the solver's best move from each successive
/// position until the game ends.
pub fn best_line(b: &Board, to_move: Player, variant: Variant, opts: SolveOptions) -> Result<Vec<Cell>, SolveError> {
    let mut solver = Solver::new(opts);
    let mut line = Vec::new();
    let mut pos = *b;
    let mut mover = to_move;
    while let Some(m) = solver.solve(&pos, mover, variant)?.best_move {
        pos = pos.placed(mover, m);
        line.push(m);
        mover = mover.opponent();
    }
    Ok(line)
}
