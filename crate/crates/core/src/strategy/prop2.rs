//! Drawing strategies for both sides of the 3×3 game.
//!
//! Both are short scripted decision trees in frame coordinates. When a
//! script runs out (the opponent's line is already dead) play falls back to
//! win / block / first empty cell.

use super::{ensure_turn, opponent_reply, tail_move, Strategy, StrategyError, StrategyId};
use crate::board::{Board, Cell, Player, Variant};
use crate::transforms::GoodTransform;

const fn c(r: u8, col: u8) -> Cell {
    Cell::new(r, col)
}

fn new_board3(n: usize) -> Result<Board, StrategyError> {
    if n != 3 {
        return Err(StrategyError::Unsupported(format!(
            "the 3x3 drawing strategies need n = 3, got {n}"
        )));
    }
    Ok(Board::new(3).expect("3 is a valid size"))
}

/// How O answered X's opening, in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum XBranch {
    /// O took (2,2).
    Centre,
    /// O took (1,2).
    Edge,
}

#[derive(Debug, Clone)]
pub struct Prop2XState {
    frame: GoodTransform,
    step: u8,
    branch: Option<XBranch>,
    seen: Board,
}

impl Prop2XState {
    pub fn new(n: usize) -> Result<Self, StrategyError> {
        Ok(Prop2XState {
            frame: GoodTransform::identity(3),
            step: 0,
            branch: None,
            seen: new_board3(n)?,
        })
    }

    fn push(&mut self, t: GoodTransform) {
        self.frame = t.compose(&self.frame).expect("same size");
    }

    fn real(&self, p: Cell) -> Cell {
        self.frame.invert().map_cell(p).expect("in range")
    }
}

pub fn prop2_x_draw_next(
    state: &Prop2XState,
    b: &Board,
    last_opponent_move: Option<Cell>,
) -> Result<(Cell, Prop2XState), StrategyError> {
    let mut st = state.clone();
    if b.n() != 3 {
        return Err(StrategyError::InconsistentHistory("board is not 3x3".into()));
    }
    ensure_turn(b, Player::X, Variant::Strong)?;
    let reply = if st.step == 0 {
        if b.stones() != 0 {
            return Err(StrategyError::InconsistentHistory(
                "must start from the empty board".into(),
            ));
        }
        None
    } else {
        opponent_reply(&st.seen, b, Player::X, last_opponent_move)?
    };

    let scripted = if !b.threats(Player::X).is_empty() {
        // O skipped a forced block.
        None
    } else {
        match (st.step, st.branch) {
            (0, _) => Some(c(1, 1)),
            (1, _) => {
                let o = st.frame.map_cell(reply.expect("O replied")).expect("in range");
                let (mut a, mut bc) = (o.row, o.col);
                if bc == 1 {
                    st.push(GoodTransform::transposition(3));
                    (a, bc) = (bc, a);
                }
                if a == 1 {
                    if bc != 2 {
                        st.push(GoodTransform::swap_cols(3, 2, bc));
                    }
                    st.branch = Some(XBranch::Edge);
                } else {
                    if a != 2 {
                        st.push(GoodTransform::swap_rows(3, 2, a));
                    }
                    if bc != 2 {
                        st.push(GoodTransform::swap_cols(3, 2, bc));
                    }
                    st.branch = Some(XBranch::Centre);
                }
                Some(c(2, 3))
            }
            // O was forced onto (3,2).
            (2, Some(XBranch::Centre)) => Some(c(3, 1)),
            (2, Some(XBranch::Edge)) => Some(c(3, 3)),
            // O was forced onto (1,2), resp. (2,2); close a line of X's own.
            (3, Some(XBranch::Centre)) => Some(c(2, 1)),
            (3, Some(XBranch::Edge)) => Some(c(1, 3)),
            _ => None,
        }
    };

    let real = match scripted.map(|p| st.real(p)) {
        Some(m) if b.is_empty_cell(m) => m,
        Some(m) => {
            return Err(StrategyError::InvariantViolated(format!(
                "scripted cell {m} is occupied"
            )));
        }
        None => tail_move(b, Player::X, Variant::Strong).ok_or(StrategyError::GameOver)?,
    };
    st.step += 1;
    st.seen = b.placed(Player::X, real);
    Ok((real, st))
}

impl Strategy for Prop2XState {
    fn id(&self) -> StrategyId {
        StrategyId::Prop2XDraw
    }

    fn player(&self) -> Player {
        Player::X
    }

    fn next_move(&mut self, board: &Board, last: Option<Cell>) -> Result<Cell, StrategyError> {
        let (m, st) = prop2_x_draw_next(self, board, last)?;
        *self = st;
        Ok(m)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

/// One of X's four second moves (up to reflection) and O's scripted
/// answers: `reply2`, then for X's third and fourth moves the cell `key`
/// O takes unless X took it, in which case O plays `alt`.
struct OLine {
    x2: Cell,
    reply2: Cell,
    key3: Cell,
    alt3: Cell,
    key4: Cell,
    alt4: Cell,
}

const O_LINES: [OLine; 4] = [
    OLine {
        x2: c(1, 2),
        reply2: c(2, 3),
        key3: c(2, 1),
        alt3: c(3, 3),
        key4: c(1, 3),
        alt4: c(3, 2),
    },
    OLine {
        x2: c(1, 3),
        reply2: c(2, 3),
        key3: c(2, 1),
        alt3: c(3, 2),
        key4: c(1, 2),
        alt4: c(3, 3),
    },
    OLine {
        x2: c(2, 3),
        reply2: c(3, 2),
        key3: c(1, 2),
        alt3: c(3, 1),
        key4: c(3, 3),
        alt4: c(2, 1),
    },
    OLine {
        x2: c(3, 3),
        reply2: c(3, 2),
        key3: c(1, 2),
        alt3: c(2, 1),
        key4: c(2, 3),
        alt4: c(3, 1),
    },
];

#[derive(Debug, Clone)]
pub struct Prop2OState {
    frame: GoodTransform,
    step: u8,
    line: Option<usize>,
    /// Set once O has closed a row or column against X.
    settled: bool,
    seen: Board,
}

impl Prop2OState {
    pub fn new(n: usize) -> Result<Self, StrategyError> {
        Ok(Prop2OState {
            frame: GoodTransform::identity(3),
            step: 0,
            line: None,
            settled: false,
            seen: new_board3(n)?,
        })
    }

    fn push(&mut self, t: GoodTransform) {
        self.frame = t.compose(&self.frame).expect("same size");
    }

    fn real(&self, p: Cell) -> Cell {
        self.frame.invert().map_cell(p).expect("in range")
    }
}

pub fn prop2_o_draw_next(
    state: &Prop2OState,
    b: &Board,
    last_opponent_move: Option<Cell>,
) -> Result<(Cell, Prop2OState), StrategyError> {
    let mut st = state.clone();
    if b.n() != 3 {
        return Err(StrategyError::InconsistentHistory("board is not 3x3".into()));
    }
    ensure_turn(b, Player::O, Variant::Strong)?;
    let x = opponent_reply(&st.seen, b, Player::O, last_opponent_move)?
        .ok_or_else(|| StrategyError::InconsistentHistory("no X move since O's last move".into()))?;
    let xp = st.frame.map_cell(x).expect("in range");

    let scripted = if st.settled {
        None
    } else {
        match st.step {
            0 => {
                // Move X's opening to (1,1).
                if xp.row != 1 {
                    st.push(GoodTransform::swap_rows(3, 1, xp.row));
                }
                if xp.col != 1 {
                    st.push(GoodTransform::swap_cols(3, 1, xp.col));
                }
                Some(c(2, 2))
            }
            1 => {
                let mut xp = xp;
                if xp.row > xp.col {
                    st.push(GoodTransform::transposition(3));
                    xp = Cell::new(xp.col, xp.row);
                }
                let i = O_LINES
                    .iter()
                    .position(|l| l.x2 == xp)
                    .ok_or_else(|| StrategyError::InvariantViolated(format!("unexpected X move {xp}")))?;
                st.line = Some(i);
                Some(O_LINES[i].reply2)
            }
            2 | 3 => {
                let line = &O_LINES[st.line.expect("set at step 1")];
                let (key, alt) = if st.step == 2 {
                    (line.key3, line.alt3)
                } else {
                    (line.key4, line.alt4)
                };
                if xp == key {
                    Some(alt)
                } else {
                    st.settled = true;
                    Some(key)
                }
            }
            _ => None,
        }
    };
    if st.step >= 3 {
        st.settled = true;
    }

    let real = match scripted.map(|p| st.real(p)) {
        Some(m) if b.is_empty_cell(m) => m,
        Some(m) => {
            return Err(StrategyError::InvariantViolated(format!(
                "scripted cell {m} is occupied"
            )));
        }
        None => tail_move(b, Player::O, Variant::Strong).ok_or(StrategyError::GameOver)?,
    };
    st.step += 1;
    st.seen = b.placed(Player::O, real);
    Ok((real, st))
}

impl Strategy for Prop2OState {
    fn id(&self) -> StrategyId {
        StrategyId::Prop2ODraw
    }

    fn player(&self) -> Player {
        Player::O
    }

    fn next_move(&mut self, board: &Board, last: Option<Cell>) -> Result<Cell, StrategyError> {
        let (m, st) = prop2_o_draw_next(self, board, last)?;
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

    fn x_line(o_moves: &[Cell]) -> Vec<Cell> {
        let mut st = Prop2XState::new(3).unwrap();
        let mut b = Board::new(3).unwrap();
        let mut xs = Vec::new();
        let mut last = None;
        for &o in o_moves {
            let (m, next) = prop2_x_draw_next(&st, &b, last).unwrap();
            st = next;
            xs.push(m);
            b = b.apply_move(Player::X, m).unwrap();
            b = b.apply_move(Player::O, o).unwrap();
            last = Some(o);
        }
        let (m, _) = prop2_x_draw_next(&st, &b, last).unwrap();
        xs.push(m);
        xs
    }

    fn o_line(x_moves: &[Cell]) -> Vec<Cell> {
        let mut st = Prop2OState::new(3).unwrap();
        let mut b = Board::new(3).unwrap();
        let mut os = Vec::new();
        for &x in x_moves {
            b = b.apply_move(Player::X, x).unwrap();
            let (m, next) = prop2_o_draw_next(&st, &b, Some(x)).unwrap();
            st = next;
            os.push(m);
            b = b.apply_move(Player::O, m).unwrap();
        }
        os
    }

    #[test]
    fn x_opens_in_the_corner() {
        let (m, _) = prop2_x_draw_next(&Prop2XState::new(3).unwrap(), &Board::new(3).unwrap(), None).unwrap();
        assert_eq!(m, c(1, 1));
    }

    #[test]
    fn x_centre_line_blocks_first_column() {
        // First displayed line: O on (2,2), forced (3,2), forced (1,2).
        let xs = x_line(&[c(2, 2), c(3, 2), c(1, 2)]);
        assert_eq!(xs, vec![c(1, 1), c(2, 3), c(3, 1), c(2, 1)]);
    }

    #[test]
    fn x_edge_line_blocks_last_column() {
        let xs = x_line(&[c(1, 2), c(3, 2), c(2, 2)]);
        assert_eq!(xs, vec![c(1, 1), c(2, 3), c(3, 3), c(1, 3)]);
    }

    #[test]
    fn x_punishes_a_missed_block() {
        let xs = x_line(&[c(2, 2), c(1, 3)]);
        assert_eq!(xs.last(), Some(&c(3, 2)));
    }

    #[test]
    fn o_answers_in_the_centre() {
        assert_eq!(o_line(&[c(1, 1)]), vec![c(2, 2)]);
        // any opening is moved to (1,1) first
        assert_eq!(o_line(&[c(3, 2)]).len(), 1);
    }

    #[test]
    fn o_lines_follow_the_script() {
        assert_eq!(
            o_line(&[c(1, 1), c(1, 2), c(2, 1), c(1, 3)]),
            vec![c(2, 2), c(2, 3), c(3, 3), c(3, 2)]
        );
        assert_eq!(
            o_line(&[c(1, 1), c(1, 3), c(2, 1), c(1, 2)]),
            vec![c(2, 2), c(2, 3), c(3, 2), c(3, 3)]
        );
        assert_eq!(
            o_line(&[c(1, 1), c(2, 3), c(1, 2), c(3, 3)]),
            vec![c(2, 2), c(3, 2), c(3, 1), c(2, 1)]
        );
        let os = o_line(&[c(1, 1), c(3, 3)]);
        assert_eq!(os, vec![c(2, 2), c(3, 2)]);
        let os = o_line(&[c(1, 1), c(3, 3), c(1, 2), c(2, 3)]);
        assert_eq!(os, vec![c(2, 2), c(3, 2), c(2, 1), c(3, 1)]);
        // the transposed second move uses the mirrored line
        assert_eq!(o_line(&[c(1, 1), c(2, 1)]), vec![c(2, 2), c(3, 2)]);
    }

    #[test]
    fn o_closes_the_row_when_x_looks_away() {
        let os = o_line(&[c(1, 1), c(1, 2), c(3, 3)]);
        assert_eq!(os, vec![c(2, 2), c(2, 3), c(2, 1)]);
    }
}
