//! Good transformations: reflection in the main diagonal combined with
//! row and column permutations. They map transversals to transversals, so
//! positions related by one have the same value.
//!
//! A transform acts on a cell by first transposing (when `transpose` is set)
//! and then sending row `a` to `row_perm[a]` and column `b` to `col_perm[b]`.
//! `compose(t1, t2)` means "apply `t2`, then `t1`".

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Cell, Player, MAX_N};

/// Largest n for which exact canonical keys are computed by default.
pub const DEFAULT_EXACT_BOUND: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("dimension mismatch: transform is {expected}x{expected}, argument is {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("exact canonical keys are limited to n <= {bound}, got n = {n}")]
    ExactBoundExceeded { n: usize, bound: usize },
}

/// Permutations are stored 0-indexed; the serialized form is 1-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WireTransform", into = "WireTransform")]
pub struct GoodTransform {
    transpose: bool,
    row_perm: Vec<u8>,
    col_perm: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct WireTransform {
    transpose: bool,
    row_perm: Vec<u8>,
    col_perm: Vec<u8>,
}

impl TryFrom<WireTransform> for GoodTransform {
    type Error = TransformError;

    fn try_from(w: WireTransform) -> Result<Self, Self::Error> {
        let minus_one = |p: Vec<u8>| p.into_iter().map(|v| v.wrapping_sub(1)).collect();
        GoodTransform::new(w.transpose, minus_one(w.row_perm), minus_one(w.col_perm))
    }
}

impl From<GoodTransform> for WireTransform {
    fn from(t: GoodTransform) -> Self {
        let plus_one = |p: Vec<u8>| p.into_iter().map(|v| v + 1).collect();
        WireTransform {
            transpose: t.transpose,
            row_perm: plus_one(t.row_perm),
            col_perm: plus_one(t.col_perm),
        }
    }
}

fn is_perm(p: &[u8]) -> bool {
    let mut seen = 0u32;
    for &v in p {
        if v as usize >= p.len() || seen & (1 << v) != 0 {
            return false;
        }
        seen |= 1 << v;
    }
    true
}

fn invert_perm(p: &[u8]) -> Vec<u8> {
    let mut inv = vec![0u8; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v as usize] = i as u8;
    }
    inv
}

/// `outer ∘ inner`.
fn after(outer: &[u8], inner: &[u8]) -> Vec<u8> {
    inner.iter().map(|&v| outer[v as usize]).collect()
}

impl GoodTransform {
    /// Builds a transform from 0-indexed permutations.
    pub fn new(transpose: bool, row_perm: Vec<u8>, col_perm: Vec<u8>) -> Result<Self, TransformError> {
        let n = row_perm.len();
        if col_perm.len() != n {
            return Err(TransformError::DimensionMismatch {
                expected: n,
                got: col_perm.len(),
            });
        }
        if n == 0 || n > MAX_N || !is_perm(&row_perm) || !is_perm(&col_perm) {
            return Err(TransformError::NotAPermutation(n));
        }
        Ok(GoodTransform {
            transpose,
            row_perm,
            col_perm,
        })
    }

    pub fn identity(n: usize) -> Self {
        let id: Vec<u8> = (0..n as u8).collect();
        GoodTransform {
            transpose: false,
            row_perm: id.clone(),
            col_perm: id,
        }
    }

    pub fn transposition(n: usize) -> Self {
        GoodTransform {
            transpose: true,
            ..GoodTransform::identity(n)
        }
    }

    /// Exchanges rows `a` and `b` (1-indexed).
    pub fn swap_rows(n: usize, a: u8, b: u8) -> Self {
        let mut t = GoodTransform::identity(n);
        t.row_perm.swap(a as usize - 1, b as usize - 1);
        t
    }

    /// Exchanges columns `a` and `b` (1-indexed).
    pub fn swap_cols(n: usize, a: u8, b: u8) -> Self {
        let mut t = GoodTransform::identity(n);
        t.col_perm.swap(a as usize - 1, b as usize - 1);
        t
    }

    /// Applies the same permutation to rows and columns: index `i` goes to
    /// `perm[i]` (1-indexed values in a 0-indexed slice).
    pub fn simultaneous(perm: &[u8]) -> Result<Self, TransformError> {
        let p: Vec<u8> = perm.iter().map(|v| v.wrapping_sub(1)).collect();
        GoodTransform::new(false, p.clone(), p)
    }

    pub fn n(&self) -> usize {
        self.row_perm.len()
    }

    pub fn transpose(&self) -> bool {
        self.transpose
    }

    /// 1-indexed row permutation.
    pub fn row_perm(&self) -> Vec<u8> {
        self.row_perm.iter().map(|v| v + 1).collect()
    }

    pub fn col_perm(&self) -> Vec<u8> {
        self.col_perm.iter().map(|v| v + 1).collect()
    }

    fn check(&self, n: usize) -> Result<(), TransformError> {
        if n != self.n() {
            return Err(TransformError::DimensionMismatch {
                expected: self.n(),
                got: n,
            });
        }
        Ok(())
    }

    pub(crate) fn map_index(&self, r: usize, c: usize) -> (usize, usize) {
        let (a, b) = if self.transpose { (c, r) } else { (r, c) };
        (self.row_perm[a] as usize, self.col_perm[b] as usize)
    }

    pub fn map_cell(&self, cell: Cell) -> Result<Cell, TransformError> {
        if !cell.in_range(self.n()) {
            return Err(TransformError::DimensionMismatch {
                expected: self.n(),
                got: cell.row.max(cell.col) as usize,
            });
        }
        let (r, c) = self.map_index(cell.r(), cell.c());
        Ok(Cell::from_index(r, c))
    }

    pub fn apply(&self, board: &Board) -> Result<Board, TransformError> {
        self.check(board.n())?;
        Ok(self.apply_unchecked(board))
    }

    pub(crate) fn apply_unchecked(&self, board: &Board) -> Board {
        let n = board.n();
        let mut out = Board::new(n).expect("size already validated");
        for player in [Player::X, Player::O] {
            for (r, &row) in board.rows(player).iter().enumerate() {
                let mut bits = row;
                while bits != 0 {
                    let c = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let (r2, c2) = self.map_index(r, c);
                    out.set(player, Cell::from_index(r2, c2));
                }
            }
        }
        out
    }

    /// `t1.compose(t2)` acts as `t2` followed by `t1`.
    pub fn compose(&self, inner: &GoodTransform) -> Result<GoodTransform, TransformError> {
        self.check(inner.n())?;
        Ok(if self.transpose {
            // Transposing after (p2, q2) swaps which permutation feeds rows.
            GoodTransform {
                transpose: !inner.transpose,
                row_perm: after(&self.row_perm, &inner.col_perm),
                col_perm: after(&self.col_perm, &inner.row_perm),
            }
        } else {
            GoodTransform {
                transpose: inner.transpose,
                row_perm: after(&self.row_perm, &inner.row_perm),
                col_perm: after(&self.col_perm, &inner.col_perm),
            }
        })
    }

    pub fn invert(&self) -> GoodTransform {
        let p = invert_perm(&self.row_perm);
        let q = invert_perm(&self.col_perm);
        if self.transpose {
            GoodTransform {
                transpose: true,
                row_perm: q,
                col_perm: p,
            }
        } else {
            GoodTransform {
                transpose: false,
                row_perm: p,
                col_perm: q,
            }
        }
    }

    /// Every good transform of an n×n grid (2·n!² of them).
    pub fn all(n: usize) -> Vec<GoodTransform> {
        let perms = permutations(n);
        let mut out = Vec::with_capacity(2 * perms.len() * perms.len());
        for transpose in [false, true] {
            for p in &perms {
                for q in &perms {
                    out.push(GoodTransform {
                        transpose,
                        row_perm: p.clone(),
                        col_perm: q.clone(),
                    });
                }
            }
        }
        out
    }
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyMode {
    /// Injective encoding of the position itself.
    Raw,
    /// Minimum encoding over the whole symmetry group.
    Exact,
}

/// Opaque position key. Raw keys are injective; exact keys coincide iff the
/// positions are related by a good transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionKey(Board);

pub fn canonical_key(board: &Board, mode: KeyMode) -> Result<PositionKey, TransformError> {
    canonical_key_with_bound(board, mode, DEFAULT_EXACT_BOUND)
}

pub fn canonical_key_with_bound(board: &Board, mode: KeyMode, bound: usize) -> Result<PositionKey, TransformError> {
    match mode {
        KeyMode::Raw => Ok(PositionKey(*board)),
        KeyMode::Exact => {
            if board.n() > bound {
                return Err(TransformError::ExactBoundExceeded { n: board.n(), bound });
            }
            Ok(PositionKey(canonical_board(board)))
        }
    }
}

/// Representative of the board's orbit: the transformed board that is
/// smallest under `Board`'s ordering.
pub(crate) fn canonical_board(board: &Board) -> Board {
    let n = board.n();
    let perms = permutations(n);
    let mut best: Option<Board> = None;
    for transpose in [false, true] {
        let base = if transpose {
            GoodTransform::transposition(n).apply_unchecked(board)
        } else {
            *board
        };
        let (bx, bo) = (base.rows(Player::X), base.rows(Player::O));
        for p in &perms {
            // Rows in their permuted order; the column permutation then acts
            // on each row mask independently.
            let mut xs = [0u16; MAX_N];
            let mut os = [0u16; MAX_N];
            for r in 0..n {
                xs[p[r] as usize] = bx[r];
                os[p[r] as usize] = bo[r];
            }
            for q in &perms {
                let mut cand = Board::new(n).unwrap();
                for r in 0..n {
                    for (c, &qc) in q.iter().enumerate() {
                        if xs[r] & (1 << c) != 0 {
                            cand.set(Player::X, Cell::from_index(r, qc as usize));
                        }
                        if os[r] & (1 << c) != 0 {
                            cand.set(Player::O, Cell::from_index(r, qc as usize));
                        }
                    }
                }
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
    }
    best.expect("at least the identity")
}
