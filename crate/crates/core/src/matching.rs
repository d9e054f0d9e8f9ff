//! Bipartite matching between rows and columns.
//!
//! Each row is a `u16` bitmask of the columns it may be matched to. A player
//! owns a transversal exactly when the rows of their cells admit a perfect
//! matching.

use crate::board::MAX_N;

const UNMATCHED: u8 = u8::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Matching {
    pub size: usize,
    /// Column matched to each row, or `UNMATCHED`.
    pub row_to_col: [u8; MAX_N],
    /// Row matched to each column, or `UNMATCHED`.
    pub col_to_row: [u8; MAX_N],
}

fn augment(adj: &[u16], r: usize, seen: &mut u16, m: &mut Matching) -> bool {
    let mut cand = adj[r] & !*seen;
    while cand != 0 {
        let c = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        *seen |= 1 << c;
        let owner = m.col_to_row[c];
        if owner == UNMATCHED || augment(adj, owner as usize, seen, m) {
            m.row_to_col[r] = c as u8;
            m.col_to_row[c] = r as u8;
            return true;
        }
    }
    false
}

pub(crate) fn max_matching(adj: &[u16]) -> Matching {
    let mut m = Matching {
        size: 0,
        row_to_col: [UNMATCHED; MAX_N],
        col_to_row: [UNMATCHED; MAX_N],
    };
    // Greedy pass first; most rows match directly.
    let mut used = 0u16;
    for (r, &row) in adj.iter().enumerate() {
        let free = row & !used;
        if free != 0 {
            let c = free.trailing_zeros() as usize;
            used |= 1 << c;
            m.row_to_col[r] = c as u8;
            m.col_to_row[c] = r as u8;
            m.size += 1;
        }
    }
    for r in 0..adj.len() {
        if m.row_to_col[r] == UNMATCHED && adj[r] != 0 {
            let mut seen = 0u16;
            if augment(adj, r, &mut seen, &mut m) {
                m.size += 1;
            }
        }
    }
    m
}

pub(crate) fn max_matching_size(adj: &[u16]) -> usize {
    max_matching(adj).size
}

/// Per-row masks of the cells in `empty` whose addition to `adj` produces a
/// perfect matching.
///
/// With a maximum matching of size n − 1 a new edge (r, c) augments exactly
/// when r is reachable from the exposed row and c from the exposed column
/// by alternating paths (rows that some maximum matching leaves exposed,
/// likewise columns).
pub(crate) fn threat_masks(adj: &[u16], empty: &[u16]) -> [u16; MAX_N] {
    let n = adj.len();
    let mut out = [0u16; MAX_N];
    let m = max_matching(adj);
    if m.size == n {
        out[..n].copy_from_slice(empty);
        return out;
    }
    if m.size + 1 < n {
        return out;
    }

    // Rows reachable from exposed rows: row -> any adjacent column -> the
    // row matched to it.
    let mut rows = 0u32;
    let mut stack: Vec<usize> = (0..n).filter(|&r| m.row_to_col[r] == UNMATCHED).collect();
    for &r in &stack {
        rows |= 1 << r;
    }
    let mut seen_cols = 0u16;
    while let Some(r) = stack.pop() {
        let mut cand = adj[r] & !seen_cols;
        while cand != 0 {
            let c = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            seen_cols |= 1 << c;
            let next = m.col_to_row[c];
            if next != UNMATCHED && rows & (1 << next) == 0 {
                rows |= 1 << next;
                stack.push(next as usize);
            }
        }
    }

    // Columns reachable from exposed columns: column -> any row owning it ->
    // the column matched to that row.
    let mut col_adj = [0u16; MAX_N];
    for (r, &row) in adj.iter().enumerate() {
        let mut bits = row;
        while bits != 0 {
            let c = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            col_adj[c] |= 1 << r;
        }
    }
    let mut cols = 0u16;
    let mut stack: Vec<usize> = (0..n).filter(|&c| m.col_to_row[c] == UNMATCHED).collect();
    for &c in &stack {
        cols |= 1 << c;
    }
    let mut seen_rows = 0u16;
    while let Some(c) = stack.pop() {
        let mut cand = col_adj[c] & !seen_rows;
        while cand != 0 {
            let r = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            seen_rows |= 1 << r;
            let next = m.row_to_col[r];
            if next != UNMATCHED && cols & (1 << next) == 0 {
                cols |= 1 << next;
                stack.push(next as usize);
            }
        }
    }

    for r in 0..n {
        if rows & (1 << r) != 0 {
            out[r] = empty[r] & cols;
        }
    }
    out
}
