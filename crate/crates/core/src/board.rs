//! Positions of the transversal game.
//!
//! A [`Board`] is a small `Copy` value: one row bitmask per player, bit `c`
//! of row `r` set when that player owns the cell in row `r + 1`, column
//! `c + 1`. All public coordinates are 1-indexed, row 1 at the top.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching;

/// Largest supported side length.
pub const MAX_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    X,
    O,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::X => Player::O,
            Player::O => Player::X,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Player::X => 'X',
            Player::O => 'O',
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Game rules. In `MakerBreaker` only X can complete a transversal; O wins by
/// preventing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Strong,
    MakerBreaker,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Strong => write!(f, "strong"),
            Variant::MakerBreaker => write!(f, "maker-breaker"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "strong" => Ok(Variant::Strong),
            "maker-breaker" | "makerbreaker" | "mb" => Ok(Variant::MakerBreaker),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

/// A grid cell, 1-indexed: `row` counts from the top, `col` from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: u8,
    pub col: u8,
}

impl Cell {
    pub const fn new(row: u8, col: u8) -> Cell {
        Cell { row, col }
    }

    pub(crate) fn from_index(r: usize, c: usize) -> Cell {
        Cell::new(r as u8 + 1, c as u8 + 1)
    }

    pub fn in_range(self, n: usize) -> bool {
        (1..=n).contains(&(self.row as usize)) && (1..=n).contains(&(self.col as usize))
    }

    pub(crate) fn r(self) -> usize {
        self.row as usize - 1
    }

    pub(crate) fn c(self) -> usize {
        self.col as usize - 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameStatus {
    InProgress { to_move: Player },
    Won(Player),
    Draw,
}

impl GameStatus {
    pub fn is_over(self) -> bool {
        !matches!(self, GameStatus::InProgress { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("board size must be between 1 and {MAX_N}, got {0}")]
    InvalidSize(usize),
    #[error("cell {0} is outside the board")]
    OutOfBounds(Cell),
    #[error("cell {0} is already occupied")]
    OccupiedCell(Cell),
    #[error("it is not {0}'s turn")]
    WrongTurn(Player),
    #[error("the game is already over")]
    GameOver,
    #[error("malformed position text: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Board {
    n: u8,
    x: [u16; MAX_N],
    o: [u16; MAX_N],
}

impl Board {
    pub fn new(n: usize) -> Result<Board, BoardError> {
        if n == 0 || n > MAX_N {
            return Err(BoardError::InvalidSize(n));
        }
        Ok(Board {
            n: n as u8,
            x: [0; MAX_N],
            o: [0; MAX_N],
        })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Mask with the low `n` bits set.
    pub(crate) fn full_row(&self) -> u16 {
        if self.n as usize == MAX_N {
            u16::MAX
        } else {
            (1u16 << self.n) - 1
        }
    }

    pub(crate) fn rows(&self, player: Player) -> &[u16] {
        let n = self.n();
        match player {
            Player::X => &self.x[..n],
            Player::O => &self.o[..n],
        }
    }

    pub(crate) fn empty_row(&self, r: usize) -> u16 {
        !(self.x[r] | self.o[r]) & self.full_row()
    }

    pub fn get(&self, cell: Cell) -> Option<Player> {
        if !cell.in_range(self.n()) {
            return None;
        }
        let bit = 1u16 << cell.c();
        if self.x[cell.r()] & bit != 0 {
            Some(Player::X)
        } else if self.o[cell.r()] & bit != 0 {
            Some(Player::O)
        } else {
            None
        }
    }

    pub fn is_empty_cell(&self, cell: Cell) -> bool {
        cell.in_range(self.n()) && self.get(cell).is_none()
    }

    pub fn count(&self, player: Player) -> usize {
        self.rows(player).iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn stones(&self) -> usize {
        self.count(Player::X) + self.count(Player::O)
    }

    pub fn empty_count(&self) -> usize {
        self.n() * self.n() - self.stones()
    }

    pub fn is_full(&self) -> bool {
        self.empty_count() == 0
    }

    /// Player whose turn it is by stone parity (X moves first).
    pub fn to_move(&self) -> Player {
        if self.count(Player::X) == self.count(Player::O) {
            Player::X
        } else {
            Player::O
        }
    }

    /// True when the stone counts could arise from alternating play.
    pub fn is_consistent(&self) -> bool {
        let (x, o) = (self.count(Player::X), self.count(Player::O));
        x == o || x == o + 1
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let n = self.n();
        (0..n).flat_map(move |r| (0..n).map(move |c| Cell::from_index(r, c)))
    }

    /// Empty cells in row-major order.
    pub fn empty_cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.empty_count());
        for r in 0..self.n() {
            let mut m = self.empty_row(r);
            while m != 0 {
                let c = m.trailing_zeros() as usize;
                out.push(Cell::from_index(r, c));
                m &= m - 1;
            }
        }
        out
    }

    pub fn cells_of(&self, player: Player) -> Vec<Cell> {
        self.cells().filter(|&c| self.get(c) == Some(player)).collect()
    }

    /// Places a stone with only bounds and occupancy checks. Used by search
    /// and by setup code that builds arbitrary positions.
    pub fn with_stone(&self, player: Player, cell: Cell) -> Result<Board, BoardError> {
        if !cell.in_range(self.n()) {
            return Err(BoardError::OutOfBounds(cell));
        }
        if self.get(cell).is_some() {
            return Err(BoardError::OccupiedCell(cell));
        }
        let mut next = *self;
        next.set(player, cell);
        Ok(next)
    }

    /// Unchecked placement for hot loops; the caller guarantees the cell is
    /// empty and in range.
    pub(crate) fn placed(&self, player: Player, cell: Cell) -> Board {
        debug_assert!(self.is_empty_cell(cell));
        let mut next = *self;
        next.set(player, cell);
        next
    }

    pub(crate) fn set(&mut self, player: Player, cell: Cell) {
        let bit = 1u16 << cell.c();
        match player {
            Player::X => self.x[cell.r()] |= bit,
            Player::O => self.o[cell.r()] |= bit,
        }
    }

    /// Legal move under alternating play: the mover must be on turn and the
    /// game must still be running (strong rules).
    pub fn apply_move(&self, player: Player, cell: Cell) -> Result<Board, BoardError> {
        self.play(player, cell, Variant::Strong)
    }

    /// `apply_move` with the end-of-game test of `variant`.
    pub fn play(&self, player: Player, cell: Cell, variant: Variant) -> Result<Board, BoardError> {
        if !cell.in_range(self.n()) {
            return Err(BoardError::OutOfBounds(cell));
        }
        if self.status(variant).is_over() {
            return Err(BoardError::GameOver);
        }
        if self.get(cell).is_some() {
            return Err(BoardError::OccupiedCell(cell));
        }
        if self.to_move() != player {
            return Err(BoardError::WrongTurn(player));
        }
        let mut next = *self;
        next.set(player, cell);
        Ok(next)
    }

    pub fn max_transversal_matching(&self, player: Player) -> usize {
        matching::max_matching_size(self.rows(player))
    }

    pub fn has_won(&self, player: Player) -> bool {
        self.max_transversal_matching(player) == self.n()
    }

    /// Empty cells that would complete a transversal for `player`.
    pub fn threats(&self, player: Player) -> Vec<Cell> {
        let mut empty = [0u16; MAX_N];
        for (r, e) in empty.iter_mut().enumerate().take(self.n()) {
            *e = self.empty_row(r);
        }
        let masks = matching::threat_masks(self.rows(player), &empty[..self.n()]);
        let mut out = Vec::new();
        for (r, &m) in masks.iter().enumerate() {
            let mut m = m;
            while m != 0 {
                let c = m.trailing_zeros() as usize;
                out.push(Cell::from_index(r, c));
                m &= m - 1;
            }
        }
        out
    }

    pub(crate) fn threat_count(&self, player: Player) -> usize {
        let mut empty = [0u16; MAX_N];
        for (r, e) in empty.iter_mut().enumerate().take(self.n()) {
            *e = self.empty_row(r);
        }
        matching::threat_masks(self.rows(player), &empty[..self.n()])
            .iter()
            .map(|m| m.count_ones() as usize)
            .sum()
    }

    /// Whether some transversal avoids every opponent stone.
    pub fn can_ever_win(&self, player: Player) -> bool {
        let full = self.full_row();
        let mut open = [0u16; MAX_N];
        let theirs = self.rows(player.opponent());
        for r in 0..self.n() {
            open[r] = !theirs[r] & full;
        }
        matching::max_matching_size(&open[..self.n()]) == self.n()
    }

    pub fn status(&self, variant: Variant) -> GameStatus {
        match variant {
            Variant::Strong => {
                let x = self.has_won(Player::X);
                let o = self.has_won(Player::O);
                debug_assert!(!(x && o), "both players own a transversal");
                if x {
                    GameStatus::Won(Player::X)
                } else if o {
                    GameStatus::Won(Player::O)
                } else if self.is_full() {
                    GameStatus::Draw
                } else {
                    GameStatus::InProgress {
                        to_move: self.to_move(),
                    }
                }
            }
            Variant::MakerBreaker => {
                if self.has_won(Player::X) {
                    GameStatus::Won(Player::X)
                } else if self.is_full() || !self.can_ever_win(Player::X) {
                    GameStatus::Won(Player::O)
                } else {
                    GameStatus::InProgress {
                        to_move: self.to_move(),
                    }
                }
            }
        }
    }

    /// Exact encoding for n ≤ 8: X cells in the low 64 bits, O cells in the
    /// high 64, bit `r * n + c`.
    pub fn packed(&self) -> Option<u128> {
        let n = self.n();
        if n > 8 {
            return None;
        }
        let mut xs = 0u64;
        let mut os = 0u64;
        for r in 0..n {
            xs |= (self.x[r] as u64) << (r * n);
            os |= (self.o[r] as u64) << (r * n);
        }
        Some(xs as u128 | (os as u128) << 64)
    }

    /// Renders the text position format: `n` lines of `.`, `X`, `O`.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.n() * (self.n() + 1));
        for r in 0..self.n() {
            for c in 0..self.n() {
                s.push(match self.get(Cell::from_index(r, c)) {
                    Some(p) => p.symbol(),
                    None => '.',
                });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Board, BoardError> {
        let lines: Vec<&str> = text.lines().collect();
        let n = lines.len();
        let mut board = Board::new(n).map_err(|_| BoardError::Parse(format!("{n} rows")))?;
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != n {
                return Err(BoardError::Parse(format!(
                    "row {} has {} cells, expected {n}",
                    r + 1,
                    line.chars().count()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                let cell = Cell::from_index(r, c);
                match ch {
                    '.' => {}
                    'X' => board.set(Player::X, cell),
                    'O' => board.set(Player::O, cell),
                    other => return Err(BoardError::Parse(format!("unexpected character {other:?} at {cell}"))),
                }
            }
        }
        Ok(board)
    }

    /// Builds a position from explicit stone lists; counts need not be
    /// consistent with alternating play.
    pub fn from_cells(n: usize, xs: &[Cell], os: &[Cell]) -> Result<Board, BoardError> {
        let mut b = Board::new(n)?;
        for &c in xs {
            b = b.with_stone(Player::X, c)?;
        }
        for &c in os {
            b = b.with_stone(Player::O, c)?;
        }
        Ok(b)
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Board({})", self.n)?;
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: u8, col: u8) -> Cell {
        Cell::new(r, col)
    }

    #[test]
    fn new_board_sizes() {
        let b = Board::new(3).unwrap();
        assert_eq!(b.empty_count(), 9);
        assert_eq!(b.status(Variant::Strong), GameStatus::InProgress { to_move: Player::X });
        assert_eq!(Board::new(1).unwrap().empty_count(), 1);
        assert_eq!(Board::new(0), Err(BoardError::InvalidSize(0)));
        assert_eq!(Board::new(17), Err(BoardError::InvalidSize(17)));
    }

    #[test]
    fn apply_move_errors_are_distinct() {
        let b = Board::new(3).unwrap();
        let b1 = b.apply_move(Player::X, c(1, 1)).unwrap();
        assert_eq!(b1.get(c(1, 1)), Some(Player::X));
        assert_eq!(b1.to_move(), Player::O);
        // value semantics
        assert_eq!(b.get(c(1, 1)), None);
        assert_eq!(
            b1.apply_move(Player::O, c(1, 1)),
            Err(BoardError::OccupiedCell(c(1, 1)))
        );
        assert_eq!(b.apply_move(Player::O, c(1, 1)), Err(BoardError::WrongTurn(Player::O)));
        assert_eq!(b.apply_move(Player::X, c(4, 1)), Err(BoardError::OutOfBounds(c(4, 1))));
        assert_eq!(b.apply_move(Player::X, c(0, 1)), Err(BoardError::OutOfBounds(c(0, 1))));

        let won = Board::from_cells(2, &[c(1, 1), c(2, 2)], &[c(1, 2)]).unwrap();
        assert_eq!(won.apply_move(Player::O, c(2, 1)), Err(BoardError::GameOver));
    }

    #[test]
    fn matching_examples() {
        let b = Board::new(4).unwrap();
        assert_eq!(b.max_transversal_matching(Player::X), 0);
        let d = Board::from_cells(3, &[c(1, 1), c(2, 2), c(3, 3)], &[]).unwrap();
        assert_eq!(d.max_transversal_matching(Player::X), 3);
        assert!(d.has_won(Player::X));

        let mut os = Vec::new();
        for i in 1..=5 {
            os.push(c(5, i));
            if i < 5 {
                os.push(c(i, 5));
            }
        }
        let b = Board::from_cells(5, &[], &os).unwrap();
        assert_eq!(b.max_transversal_matching(Player::O), 2);
    }

    #[test]
    fn has_won_examples() {
        let diag: Vec<Cell> = (1..=4).map(|i| c(i, i)).collect();
        assert!(Board::from_cells(4, &diag, &[]).unwrap().has_won(Player::X));
        assert!(!Board::new(4).unwrap().has_won(Player::X));
        let b = Board::from_cells(4, &[c(1, 4), c(2, 2), c(3, 3), c(4, 1), c(1, 2), c(3, 4)], &[]).unwrap();
        assert!(b.has_won(Player::X));
    }

    #[test]
    fn threat_examples() {
        let b = Board::from_cells(3, &[c(1, 1), c(2, 3)], &[c(2, 2)]).unwrap();
        assert_eq!(b.threats(Player::X), vec![c(3, 2)]);
        assert!(Board::new(3).unwrap().threats(Player::X).is_empty());
        assert!(Board::new(3).unwrap().threats(Player::O).is_empty());
    }

    #[test]
    fn can_ever_win_examples() {
        let b = Board::new(3).unwrap();
        assert!(b.can_ever_win(Player::X) && b.can_ever_win(Player::O));
        let col1 = Board::from_cells(3, &[c(1, 1), c(2, 1), c(3, 1)], &[]).unwrap();
        assert!(!col1.can_ever_win(Player::O));
        let end = Board::from_cells(3, &[c(1, 1), c(2, 3), c(3, 1), c(2, 1)], &[c(1, 2), c(2, 2), c(3, 2)]).unwrap();
        assert!(!end.can_ever_win(Player::O));
    }

    #[test]
    fn status_examples() {
        // X's second diagonal stone ends the game before O moves again.
        let b = Board::from_cells(2, &[c(1, 1), c(2, 2)], &[c(1, 2)]).unwrap();
        assert_eq!(b.status(Variant::Strong), GameStatus::Won(Player::X));

        // Final position of the first drawing line for X at n = 3.
        let full = Board::from_cells(
            3,
            &[c(1, 1), c(2, 3), c(3, 1), c(2, 1), c(3, 3)],
            &[c(2, 2), c(3, 2), c(1, 2), c(1, 3)],
        )
        .unwrap();
        assert_eq!(full.status(Variant::Strong), GameStatus::Draw);

        let row2 = Board::from_cells(3, &[c(1, 1), c(3, 3), c(1, 2)], &[c(2, 1), c(2, 2), c(2, 3)]).unwrap();
        assert_eq!(row2.status(Variant::MakerBreaker), GameStatus::Won(Player::O));
        assert_eq!(
            row2.status(Variant::Strong),
            GameStatus::InProgress { to_move: Player::X }
        );
    }

    #[test]
    fn text_round_trip() {
        let text = "X.O\n.X.\nO..\n";
        let b = Board::from_text(text).unwrap();
        assert_eq!(b.to_text(), text);
        assert!(Board::from_text("X.\n...\n").is_err());
        assert!(Board::from_text("Xa\n..\n").is_err());
        assert!(Board::from_text("").is_err());
    }

    #[test]
    fn packed_is_injective_on_small_boards() {
        let a = Board::from_cells(3, &[c(1, 2)], &[]).unwrap();
        let b = Board::from_cells(3, &[], &[c(1, 2)]).unwrap();
        assert_ne!(a.packed(), b.packed());
        assert_eq!(Board::new(9).unwrap().packed(), None);
    }
}
