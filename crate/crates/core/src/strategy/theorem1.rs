//! First-player win for n ≥ 4.
//!
//! X opens on (1,1) and keeps, up to good transforms and after its
//! (k+1)-th move, the invariant (*):
//!
//! 1. X holds (a,a) for every a ≤ k + 1,
//! 2. no O lies in a cell (a,b) with a, b > k + 1,
//! 3. some O lies in column k + 2.
//!
//! Once k = n − 3, X threatens in the bottom-right 2×2 block, and after O's
//! forced block the position is classified by
//! `S_O = { i : neither (i,n) nor (n,i) holds an O }` into the endgame
//! cases, each of which ends in a double threat.

use serde::Serialize;

use super::{ensure_turn, opponent_reply, Strategy, StrategyError, StrategyId};
use crate::board::{Board, Cell, Player, Variant};
use crate::transforms::GoodTransform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseTag {
    /// s = 1, n ≥ 5, r = n − 2.
    Case1a,
    /// s = 1, n ≥ 5, 1 ≤ r ≤ n − 3.
    Case1b,
    /// 2 ≤ s ≤ n − 2.
    Case2,
    /// s = 1, n = 4, O on (2,4).
    Case3a,
    /// s = 1, n = 4, O on (4,2).
    Case3b,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Opening,
    /// O has answered the opening; the next move establishes (*) for k = 1.
    Base,
    /// (*) holds for `k`.
    Induction {
        k: usize,
    },
    /// (*) holds for k = n − 3; the next move is the first threat.
    ThreatMove,
    /// X has threatened; `corner` is set when X took (n,n).
    AwaitBlock {
        corner: bool,
    },
    Endgame {
        case: CaseTag,
        step: u8,
    },
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CaseData {
    pub s: usize,
    pub r: Option<usize>,
    pub b: Option<u8>,
    pub c: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct Theorem1State {
    n: usize,
    frame: GoodTransform,
    phase: Phase,
    case_data: Option<CaseData>,
    seen: Board,
    x_moves: usize,
}

fn cell(r: usize, c: usize) -> Cell {
    Cell::new(r as u8, c as u8)
}

fn invariant(msg: impl Into<String>) -> StrategyError {
    StrategyError::InvariantViolated(msg.into())
}

fn history(msg: impl Into<String>) -> StrategyError {
    StrategyError::InconsistentHistory(msg.into())
}

/// Checks the three (*) conditions for `k` on a board in frame coordinates.
pub fn check_star(proof: &Board, k: usize) -> Result<(), String> {
    let n = proof.n();
    for a in 1..=k + 1 {
        if proof.get(cell(a, a)) != Some(Player::X) {
            return Err(format!("(*) k={k}: no X on ({a},{a})"));
        }
    }
    for o in proof.cells_of(Player::O) {
        if o.row as usize > k + 1 && o.col as usize > k + 1 {
            return Err(format!("(*) k={k}: O on {o} inside the free block"));
        }
    }
    if k + 2 <= n && !(1..=n).any(|a| proof.get(cell(a, k + 2)) == Some(Player::O)) {
        return Err(format!("(*) k={k}: no O in column {}", k + 2));
    }
    Ok(())
}

/// `S_O` for a checkpoint position in frame coordinates: X on (i,i) for
/// i < n, O on (n,n) and on some (a,n) with a < n, n − 1 stones each.
pub fn compute_s_o(proof: &Board) -> Result<Vec<u8>, StrategyError> {
    let n = proof.n();
    let o = |r: usize, c: usize| proof.get(cell(r, c)) == Some(Player::O);
    if proof.count(Player::X) != n - 1 || proof.count(Player::O) != n - 1 {
        return Err(history("checkpoint needs n - 1 stones per player"));
    }
    if !(1..n).all(|i| proof.get(cell(i, i)) == Some(Player::X)) {
        return Err(history("checkpoint needs X on (i,i) for i < n"));
    }
    if !o(n, n) || !(1..n).any(|a| o(a, n)) {
        return Err(history("checkpoint needs O on (n,n) and on some (a,n), a < n"));
    }
    let set: Vec<u8> = (1..=n).filter(|&i| !o(i, n) && !o(n, i)).map(|i| i as u8).collect();
    if set.is_empty() || set.len() > n - 2 {
        return Err(history(format!("|S_O| = {} outside [1, n-2]", set.len())));
    }
    Ok(set)
}

/// Simultaneous relabelling of indices: `order[j]` becomes index `j + 1`.
fn relabel(n: usize, order: &[u8]) -> GoodTransform {
    let mut perm = vec![0u8; n];
    for (j, &old) in order.iter().enumerate() {
        perm[old as usize - 1] = j as u8 + 1;
    }
    GoodTransform::simultaneous(&perm).expect("order is a permutation")
}

/// Brings a checkpoint position into the case layout and picks the case.
/// The state's frame must already place X on (i,i), i < n, and O on (n,n).
pub fn normalize_checkpoint(
    state: &Theorem1State,
    b: &Board,
) -> Result<(Theorem1State, usize, Option<usize>, CaseTag), StrategyError> {
    let mut st = state.clone();
    let (s, r, tag) = st.checkpoint(b)?;
    Ok((st, s, r, tag))
}

impl Theorem1State {
    pub fn new(n: usize) -> Result<Self, StrategyError> {
        if n < 4 {
            return Err(StrategyError::Unsupported(format!("theorem1 needs n >= 4, got {n}")));
        }
        Ok(Theorem1State {
            n,
            frame: GoodTransform::identity(n),
            phase: Phase::Opening,
            case_data: None,
            seen: Board::new(n).map_err(|e| StrategyError::Unsupported(e.to_string()))?,
            x_moves: 0,
        })
    }

    pub fn frame(&self) -> &GoodTransform {
        &self.frame
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn case_data(&self) -> Option<CaseData> {
        self.case_data
    }

    pub fn x_moves(&self) -> usize {
        self.x_moves
    }

    /// The real board seen through the frame.
    pub fn proof_view(&self, b: &Board) -> Board {
        self.frame.apply_unchecked(b)
    }

    fn push(&mut self, t: GoodTransform) {
        self.frame = t.compose(&self.frame).expect("same size");
    }

    fn real(&self, p: Cell) -> Cell {
        self.frame.invert().map_cell(p).expect("cell in range")
    }

    fn checkpoint(&mut self, b: &Board) -> Result<(usize, Option<usize>, CaseTag), StrategyError> {
        let n = self.n;
        let s_o = compute_s_o(&self.proof_view(b))?;
        let mut order = s_o.clone();
        order.extend((1..n as u8).filter(|i| !s_o.contains(i)));
        order.push(n as u8);
        self.push(relabel(n, &order));
        let s = s_o.len();

        let pb = self.proof_view(b);
        let o = |pb: &Board, r: usize, c: usize| pb.get(cell(r, c)) == Some(Player::O);
        let mut data = CaseData {
            s,
            ..CaseData::default()
        };
        let tag = if s == 1 && n >= 5 {
            // Every pair {(i,n),(n,i)}, 2 ≤ i < n, holds exactly one O, and
            // those plus (n,n) are all of O's stones.
            for i in 2..n {
                if o(&pb, i, n) == o(&pb, n, i) {
                    return Err(invariant(format!("case 1: pair {i} does not hold exactly one O")));
                }
            }
            let mut order = vec![1u8];
            order.extend((2..n).filter(|&i| o(&pb, n, i)).map(|i| i as u8));
            order.extend((2..n).filter(|&i| o(&pb, i, n)).map(|i| i as u8));
            order.push(n as u8);
            self.push(relabel(n, &order));
            let pb = self.proof_view(b);
            let r = (1..n).filter(|&i| o(&pb, i, n)).count();
            let expected: Vec<Cell> = (2..n - r)
                .map(|i| cell(n, i))
                .chain((n - r..=n).map(|i| cell(i, n)))
                .collect();
            let mut actual = pb.cells_of(Player::O);
            let mut want = expected.clone();
            actual.sort();
            want.sort();
            if actual != want || r < 1 || r > n - 2 {
                return Err(invariant(format!("case 1 layout not reached (r = {r})")));
            }
            data.r = Some(r);
            if r == n - 2 {
                CaseTag::Case1a
            } else {
                CaseTag::Case1b
            }
        } else if s == 1 {
            // n = 4: put an O on (3,4) by exchanging indices 2 and 3.
            if !o(&pb, 3, 4) {
                self.push(relabel(n, &[1, 3, 2, 4]));
            }
            let pb = self.proof_view(b);
            if !o(&pb, 3, 4) || o(&pb, 2, 4) == o(&pb, 4, 2) {
                return Err(invariant("case 3 layout not reached"));
            }
            if o(&pb, 2, 4) {
                CaseTag::Case3a
            } else {
                CaseTag::Case3b
            }
        } else {
            let (bb, cc) = (1..=s)
                .flat_map(|b| (1..=s).map(move |c| (b, c)))
                .find(|&(b, c)| b != c && pb.is_empty_cell(cell(b, c)))
                .ok_or_else(|| invariant("case 2: no empty off-diagonal cell in [s]x[s]"))?;
            data.b = Some(bb as u8);
            data.c = Some(cc as u8);
            CaseTag::Case2
        };
        self.case_data = Some(data);
        Ok((s, data.r, tag))
    }

    /// Plays the frame cell `p`, which must be empty, and checks that the
    /// resulting position gives X threats on every cell of `threats`.
    fn threaten(&self, b: &Board, p: Cell, threats: &[Cell]) -> Result<Cell, StrategyError> {
        if !b.threats(Player::O).is_empty() {
            return Err(invariant(format!("O holds a threat before X's threat on {p}")));
        }
        let real = self.real(p);
        if !b.is_empty_cell(real) {
            return Err(invariant(format!("frame cell {p} is not empty")));
        }
        let after = self.proof_view(&b.placed(Player::X, real));
        let have = after.threats(Player::X);
        for t in threats {
            if !have.contains(t) {
                return Err(invariant(format!("playing {p} does not threaten {t}")));
            }
        }
        Ok(real)
    }

    fn expect_o(&self, b: &Board, p: Cell) -> Result<(), StrategyError> {
        if self.proof_view(b).get(p) != Some(Player::O) {
            return Err(invariant(format!("expected O's block on frame cell {p}")));
        }
        Ok(())
    }
}

/// Next X move and updated state. `last_opponent_move`, when given, must
/// agree with the board.
pub fn theorem1_next(
    state: &Theorem1State,
    b: &Board,
    last_opponent_move: Option<Cell>,
) -> Result<(Cell, Theorem1State), StrategyError> {
    let mut st = state.clone();
    let n = st.n;
    if b.n() != n {
        return Err(history("board size differs from the strategy's"));
    }
    ensure_turn(b, Player::X, Variant::Strong)?;
    let reply = if st.phase == Phase::Opening {
        if b.stones() != 0 {
            return Err(history("theorem1 must start from the empty board"));
        }
        None
    } else {
        Some(
            opponent_reply(&st.seen, b, Player::X, last_opponent_move)?
                .ok_or_else(|| history("no O move since X's last move"))?,
        )
    };

    // O ignored a threat (or never had to block): take the win.
    let real = if let Some(&win) = b.threats(Player::X).first() {
        st.phase = Phase::Done;
        win
    } else {
        let o_last = reply.map(|c| st.frame.map_cell(c).expect("in range"));
        step(&mut st, b, o_last)?
    };

    st.seen = b.placed(Player::X, real);
    st.x_moves += 1;
    Ok((real, st))
}

fn step(st: &mut Theorem1State, b: &Board, o_last: Option<Cell>) -> Result<Cell, StrategyError> {
    let n = st.n;
    match st.phase {
        Phase::Opening => {
            st.phase = Phase::Base;
            Ok(cell(1, 1))
        }
        Phase::Base => {
            let o = o_last.expect("reply present after the opening");
            let (mut a, mut bc) = (o.row as usize, o.col as usize);
            // Bring O to (1,2) or (2,2) while fixing (1,1).
            if bc == 1 {
                st.push(GoodTransform::transposition(n));
                (a, bc) = (bc, a);
            }
            if a != 1 && a != 2 {
                st.push(GoodTransform::swap_rows(n, 2, a as u8));
            }
            if bc != 2 {
                st.push(GoodTransform::swap_cols(n, 2, bc as u8));
            }
            let real = st.real(cell(2, 3));
            st.push(GoodTransform::swap_cols(n, 2, 3));
            let after = st.proof_view(&b.placed(Player::X, real));
            check_star(&after, 1).map_err(invariant)?;
            st.phase = if n == 4 {
                Phase::ThreatMove
            } else {
                Phase::Induction { k: 1 }
            };
            Ok(real)
        }
        Phase::Induction { k } => {
            let o = o_last.expect("reply present");
            let (a, mut bc) = (o.row as usize, o.col as usize);
            let top = k + 1;
            let real;
            if a <= top || bc <= top {
                real = st.real(cell(top + 1, top + 2));
                st.push(GoodTransform::swap_cols(n, (top + 1) as u8, (top + 2) as u8));
            } else {
                if bc == top + 1 {
                    st.push(GoodTransform::swap_cols(n, (top + 1) as u8, (top + 2) as u8));
                    bc = top + 2;
                }
                real = st.real(cell(a, top + 1));
                if a != top + 1 {
                    st.push(GoodTransform::swap_rows(n, a as u8, (top + 1) as u8));
                }
                if bc != top + 2 {
                    st.push(GoodTransform::swap_cols(n, (top + 2) as u8, bc as u8));
                }
            }
            if !b.is_empty_cell(real) {
                return Err(invariant(format!("induction move {real} is occupied")));
            }
            let after = st.proof_view(&b.placed(Player::X, real));
            check_star(&after, k + 1).map_err(invariant)?;
            st.phase = if k + 1 == n - 3 {
                Phase::ThreatMove
            } else {
                Phase::Induction { k: k + 1 }
            };
            Ok(real)
        }
        Phase::ThreatMove => {
            let q = o_last.expect("reply present");
            // (n-1,n) and (n,n) are free by (*) unless O just took one; an
            // O on (n,n-1) or (n-1,n) sends X to the corner instead.
            let corner = q == cell(n, n - 1) || q == cell(n - 1, n);
            let real = if corner {
                st.threaten(b, cell(n, n), &[cell(n - 1, n - 1)])?
            } else {
                st.threaten(b, cell(n - 1, n), &[cell(n, n - 1)])?
            };
            st.phase = Phase::AwaitBlock { corner };
            Ok(real)
        }
        Phase::AwaitBlock { corner } => {
            if corner {
                st.expect_o(b, cell(n - 1, n - 1))?;
                st.push(GoodTransform::swap_rows(n, (n - 1) as u8, n as u8));
            } else {
                st.expect_o(b, cell(n, n - 1))?;
            }
            st.push(GoodTransform::swap_cols(n, (n - 1) as u8, n as u8));
            let (_, _, tag) = st.checkpoint(b)?;
            let data = st.case_data.expect("set by checkpoint");
            st.phase = Phase::Endgame { case: tag, step: 1 };
            match tag {
                CaseTag::Case1a | CaseTag::Case1b => st.threaten(b, cell(1, n), &[cell(n, 1)]),
                CaseTag::Case2 => {
                    let bb = data.b.expect("case 2 data") as usize;
                    st.threaten(b, cell(n, bb), &[cell(bb, n)])
                }
                CaseTag::Case3a | CaseTag::Case3b => st.threaten(b, cell(1, 4), &[cell(4, 1)]),
            }
        }
        Phase::Endgame { case, step } => {
            let data = st.case_data.expect("set by checkpoint");
            st.phase = Phase::Endgame { case, step: step + 1 };
            match (case, step) {
                (CaseTag::Case1a | CaseTag::Case1b, 1) => {
                    st.expect_o(b, cell(n, 1))?;
                    st.threaten(b, cell(n, n - 1), &[cell(n - 1, 1)])
                }
                (CaseTag::Case1a, 2) => {
                    st.expect_o(b, cell(n - 1, 1))?;
                    st.threaten(b, cell(2, 1), &[cell(n - 1, 2), cell(n, 2)])
                }
                (CaseTag::Case1b, 2) => {
                    st.expect_o(b, cell(n - 1, 1))?;
                    st.threaten(b, cell(n - 1, 2), &[cell(2, 1), cell(2, n)])
                }
                (CaseTag::Case2, 1) => {
                    let (bb, cc) = (data.b.unwrap() as usize, data.c.unwrap() as usize);
                    st.expect_o(b, cell(bb, n))?;
                    let pb = st.proof_view(b);
                    let free_cols = (1..=n)
                        .filter(|&c| (1..=n).all(|r| pb.get(cell(r, c)) != Some(Player::O)))
                        .count();
                    if free_cols < 2 {
                        return Err(invariant("case 2: fewer than two O-free columns"));
                    }
                    st.threaten(b, cell(cc, n), &[cell(n, cc), cell(bb, cc)])
                }
                (CaseTag::Case3a | CaseTag::Case3b, 1) => {
                    st.expect_o(b, cell(4, 1))?;
                    st.threaten(b, cell(4, 3), &[cell(3, 1)])
                }
                (CaseTag::Case3a, 2) => {
                    st.expect_o(b, cell(3, 1))?;
                    st.threaten(b, cell(2, 1), &[cell(3, 2), cell(4, 2)])
                }
                (CaseTag::Case3b, 2) => {
                    st.expect_o(b, cell(3, 1))?;
                    st.threaten(b, cell(3, 2), &[cell(2, 1), cell(2, 4)])
                }
                _ => Err(invariant(format!("{case:?}: double threat did not win"))),
            }
        }
        Phase::Done => Err(invariant("game should already be won")),
    }
}

impl Strategy for Theorem1State {
    fn id(&self) -> StrategyId {
        StrategyId::Theorem1
    }

    fn player(&self) -> Player {
        Player::X
    }

    fn next_move(&mut self, board: &Board, last: Option<Cell>) -> Result<Cell, StrategyError> {
        let (m, st) = theorem1_next(self, board, last)?;
        *self = st;
        Ok(m)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}
