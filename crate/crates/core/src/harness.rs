//! Strategy verification against exhaustive and random adversaries.
//!
//! The exhaustive adversary tries every legal reply at every turn, including
//! replies that ignore threats. Each line carries the weight
//! `D / (product of branching factors along it)`, where `D` is the product
//! of the adversary's branching factors on a line that fills the board.
//! The weights of a complete enumeration sum to exactly `D`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Cell, GameStatus, Player, Variant};
use crate::record::{Engines, GameRecord, GameResult, MoveEntry};
use crate::solver::{SolveError, SolveOptions, Solver, Value};
use crate::strategy::{Strategy, StrategyError, StrategyId};

/// Violations kept in a report; the rest are only counted.
pub const VIOLATION_CAP: usize = 50;

/// Adversary levels near the root that are split across threads.
const PARALLEL_DEPTH: usize = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("exhaustive verification of {strategy} is limited to n <= {bound} (got {n})")]
    TractabilityBound { strategy: String, n: usize, bound: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Solver(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub win: u64,
    pub draw: u64,
    pub loss: u64,
}

/// Weight check for an exhaustive run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completeness {
    pub expected: u128,
    pub observed: u128,
}

/// Results from the verified strategy's side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub strategy: String,
    pub player: Player,
    pub n: usize,
    pub variant: Variant,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub claim: String,
    pub games: u64,
    pub results: Histogram,
    /// Lines cut short because the strategy returned an error.
    pub errors: u64,
    pub invariant_failures: u64,
    /// Most X moves in any game X won.
    pub max_x_moves: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness: Option<Completeness>,
    pub violation_count: u64,
    pub violations: Vec<GameRecord>,
    /// Reason for each entry of `violations`, same order.
    pub violation_reasons: Vec<String>,
}

impl VerificationReport {
    /// True when the claim held on every examined line.
    pub fn holds(&self) -> bool {
        self.violation_count == 0 && self.completeness.is_none_or(|c| c.expected == c.observed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "strategy: {} ({})", self.strategy, self.player);
        let _ = writeln!(out, "n: {}", self.n);
        let _ = writeln!(out, "variant: {}", self.variant);
        match self.seed {
            Some(seed) => {
                let _ = writeln!(out, "mode: random (seed {seed})");
            }
            None => {
                let _ = writeln!(out, "mode: exhaustive");
            }
        }
        let _ = writeln!(out, "claim: {}", self.claim);
        let _ = writeln!(out, "games: {}", self.games);
        let r = self.results;
        let _ = writeln!(out, "results: win {} / draw {} / loss {}", r.win, r.draw, r.loss);
        let _ = writeln!(
            out,
            "errors: {} (invariant failures: {})",
            self.errors, self.invariant_failures
        );
        match self.max_x_moves {
            Some(m) => {
                let _ = writeln!(out, "max X moves to win: {m}");
            }
            None => {
                let _ = writeln!(out, "max X moves to win: -");
            }
        }
        if let Some(c) = self.completeness {
            let _ = writeln!(out, "line weight: {} of {}", c.observed, c.expected);
        }
        let _ = writeln!(out, "violations: {}", self.violation_count);
        for (rec, why) in self.violations.iter().zip(&self.violation_reasons) {
            let _ = writeln!(out, "--- {}: {}", rec.id, why);
            out.push_str(&rec.transcript());
        }
        let _ = writeln!(out, "verdict: {}", if self.holds() { "HOLDS" } else { "VIOLATED" });
        out
    }
}

/// What a strategy promises its side.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Claim {
    Win { max_moves: Option<usize> },
    NoLoss,
    AtLeast(Value),
    Nothing,
}

impl Claim {
    fn describe(self, player: Player) -> String {
        match self {
            Claim::Win { max_moves: Some(m) } => format!("{player} wins within {m} own moves"),
            Claim::Win { max_moves: None } => format!("{player} wins"),
            Claim::NoLoss => format!("{player} never loses"),
            Claim::AtLeast(v) => format!("{player} achieves at least the game value {v}"),
            Claim::Nothing => "none (legal moves only)".to_string(),
        }
    }
}

fn claim_for(id: StrategyId, n: usize, variant: Variant) -> Result<Claim, HarnessError> {
    Ok(match id {
        StrategyId::Theorem1 => Claim::Win { max_moves: Some(n + 3) },
        StrategyId::MakerBreaker => Claim::Win { max_moves: None },
        StrategyId::Prop2XDraw | StrategyId::Prop2ODraw => Claim::NoLoss,
        StrategyId::SolverPerfect => {
            let mut solver = Solver::new(SolveOptions::default());
            let root = Board::new(n).map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;
            let v = solver.solve(&root, Player::X, variant)?.value;
            Claim::AtLeast(v)
        }
        StrategyId::Random(_) => Claim::Nothing,
    })
}

fn rank(winner: Option<Player>, me: Player) -> i8 {
    match winner {
        Some(p) if p == me => 1,
        Some(_) => -1,
        None => 0,
    }
}

struct Ctx {
    id: StrategyId,
    player: Player,
    n: usize,
    variant: Variant,
    claim: Claim,
}

impl Ctx {
    fn judge(&self, winner: Option<Player>, x_moves: usize) -> Option<String> {
        let r = rank(winner, self.player);
        match self.claim {
            Claim::Win { max_moves } => {
                if r != 1 {
                    Some(format!("{} did not win", self.player))
                } else {
                    max_moves
                        .filter(|&m| x_moves > m)
                        .map(|m| format!("win took {x_moves} X moves, bound is {m}"))
                }
            }
            Claim::NoLoss => (r < 0).then(|| format!("{} lost", self.player)),
            Claim::AtLeast(v) => {
                (r < rank(v.winner(), self.player)).then(|| format!("result is worse than the game value {v}"))
            }
            Claim::Nothing => None,
        }
    }

    fn engines(&self, adversary: &str) -> Engines {
        let me = self.id.to_string();
        match self.player {
            Player::X => Engines {
                x: me,
                o: adversary.to_string(),
            },
            Player::O => Engines {
                x: adversary.to_string(),
                o: me,
            },
        }
    }
}

#[derive(Default)]
struct Tally {
    hist: Histogram,
    errors: u64,
    invariant_failures: u64,
    max_x_moves: Option<usize>,
    weight: u128,
    violation_count: u64,
    /// Kept sorted by move list, at most `VIOLATION_CAP` long.
    violations: Vec<(Vec<MoveEntry>, Option<GameResult>, String)>,
}

impl Tally {
    fn games(&self) -> u64 {
        self.hist.win + self.hist.draw + self.hist.loss + self.errors
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.hist.win += other.hist.win;
        self.hist.draw += other.hist.draw;
        self.hist.loss += other.hist.loss;
        self.errors += other.errors;
        self.invariant_failures += other.invariant_failures;
        self.max_x_moves = self.max_x_moves.max(other.max_x_moves);
        self.weight += other.weight;
        self.violation_count += other.violation_count;
        self.violations.extend(other.violations);
        self.violations.sort_by(|a, b| a.0.cmp(&b.0));
        self.violations.truncate(VIOLATION_CAP);
        self
    }

    fn violation(&mut self, moves: &[MoveEntry], result: Option<GameResult>, why: String) {
        self.violation_count += 1;
        let pos = self.violations.partition_point(|v| v.0.as_slice() < moves);
        if pos < VIOLATION_CAP {
            self.violations.insert(pos, (moves.to_vec(), result, why));
            self.violations.truncate(VIOLATION_CAP);
        }
    }

    fn finished(&mut self, ctx: &Ctx, board: &Board, moves: &[MoveEntry], status: GameStatus, weight: u128) {
        self.weight += weight;
        let winner = match status {
            GameStatus::Won(p) => Some(p),
            _ => None,
        };
        match rank(winner, ctx.player) {
            1 => self.hist.win += 1,
            0 => self.hist.draw += 1,
            _ => self.hist.loss += 1,
        }
        let x_moves = board.count(Player::X);
        if winner == Some(Player::X) {
            self.max_x_moves = self.max_x_moves.max(Some(x_moves));
        }
        if let Some(why) = ctx.judge(winner, x_moves) {
            self.violation(moves, GameResult::from_status(status, board, ctx.variant), why);
        }
    }

    fn failed(&mut self, moves: &[MoveEntry], err: String, invariant: bool, weight: u128) {
        self.weight += weight;
        self.errors += 1;
        if invariant {
            self.invariant_failures += 1;
        }
        self.violation(moves, None, err);
    }
}

/// Largest n each strategy is verified exhaustively at, without and with
/// the long-running flag.
fn exhaustive_bound(id: StrategyId) -> (usize, usize) {
    match id {
        StrategyId::Theorem1 | StrategyId::MakerBreaker => (4, 5),
        StrategyId::Prop2XDraw | StrategyId::Prop2ODraw => (3, 3),
        StrategyId::SolverPerfect | StrategyId::Random(_) => (3, 3),
    }
}

fn player_for(id: StrategyId) -> Player {
    id.fixed_player().unwrap_or(Player::X)
}

/// Product of the adversary's branching factors on a line that fills the
/// board, computed from the move count alone.
pub fn adversary_branching_product(n: usize, strategy_player: Player) -> u128 {
    let cells = n * n;
    (0..cells)
        .filter(|ply| {
            let mover = if ply % 2 == 0 { Player::X } else { Player::O };
            mover != strategy_player
        })
        .map(|ply| (cells - ply) as u128)
        .product()
}

pub fn verify_exhaustive(id: StrategyId, n: usize, variant: Variant) -> Result<VerificationReport, HarnessError> {
    verify_exhaustive_with(id, n, variant, false)
}

/// `long_running` lifts the bound by one size where that is feasible.
pub fn verify_exhaustive_with(
    id: StrategyId,
    n: usize,
    variant: Variant,
    long_running: bool,
) -> Result<VerificationReport, HarnessError> {
    let (bound, long_bound) = exhaustive_bound(id);
    let limit = if long_running { long_bound } else { bound };
    if n > limit {
        return Err(HarnessError::TractabilityBound {
            strategy: id.to_string(),
            n,
            bound: limit,
        });
    }
    let player = player_for(id);
    let strategy = id.instantiate(n, variant, player)?;
    let ctx = Ctx {
        id,
        player,
        n,
        variant,
        claim: claim_for(id, n, variant)?,
    };
    let expected = adversary_branching_product(n, player);
    let root = Board::new(n).map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;
    let tally = explore(&ctx, root, strategy, &mut Vec::new(), None, expected, 0);
    Ok(report(
        &ctx,
        Mode::Exhaustive,
        None,
        tally,
        Some(expected),
        "exhaustive",
    ))
}

fn explore(
    ctx: &Ctx,
    board: Board,
    mut strategy: Box<dyn Strategy>,
    moves: &mut Vec<MoveEntry>,
    last: Option<Cell>,
    weight: u128,
    depth: usize,
) -> Tally {
    let mut tally = Tally::default();
    let status = board.status(ctx.variant);
    if status.is_over() {
        tally.finished(ctx, &board, moves, status, weight);
        return tally;
    }
    if board.to_move() == ctx.player {
        let m = match strategy.next_move(&board, last) {
            Ok(m) => m,
            Err(e) => {
                let inv = matches!(e, StrategyError::InvariantViolated(_));
                tally.failed(moves, e.to_string(), inv, weight);
                return tally;
            }
        };
        let next = match board.play(ctx.player, m, ctx.variant) {
            Ok(b) => b,
            Err(e) => {
                tally.failed(moves, format!("illegal move {m}: {e}"), false, weight);
                return tally;
            }
        };
        moves.push(MoveEntry::new(ctx.player, m));
        let t = explore(ctx, next, strategy, moves, None, weight, depth);
        moves.pop();
        return t;
    }
    let adversary = ctx.player.opponent();
    let empties = board.empty_cells();
    let w = weight / empties.len() as u128;
    if depth < PARALLEL_DEPTH {
        let prefix = moves.clone();
        empties
            .par_iter()
            .map(|&e| {
                let mut line = prefix.clone();
                line.push(MoveEntry::new(adversary, e));
                explore(
                    ctx,
                    board.placed(adversary, e),
                    strategy.clone(),
                    &mut line,
                    Some(e),
                    w,
                    depth + 1,
                )
            })
            .reduce(Tally::default, Tally::merge)
    } else {
        for &e in &empties {
            moves.push(MoveEntry::new(adversary, e));
            let t = explore(
                ctx,
                board.placed(adversary, e),
                strategy.clone(),
                moves,
                Some(e),
                w,
                depth + 1,
            );
            moves.pop();
            tally = tally.merge(t);
        }
        tally
    }
}

pub fn verify_random(
    id: StrategyId,
    n: usize,
    variant: Variant,
    games: u64,
    seed: u64,
) -> Result<VerificationReport, HarnessError> {
    if games == 0 {
        return Err(HarnessError::InvalidParameter("games must be at least 1".into()));
    }
    let player = player_for(id);
    let strategy = id.instantiate(n, variant, player)?;
    let ctx = Ctx {
        id,
        player,
        n,
        variant,
        claim: claim_for(id, n, variant)?,
    };
    let root = Board::new(n).map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;
    let tally = (0..games)
        .into_par_iter()
        .map(|g| random_game(&ctx, root, strategy.clone(), seed, g))
        .reduce(Tally::default, Tally::merge);
    Ok(report(
        &ctx,
        Mode::Random,
        Some(seed),
        tally,
        None,
        &format!("random({seed})"),
    ))
}

/// Game `g` draws the adversary's moves from stream `g` of the seed.
fn random_game(ctx: &Ctx, mut board: Board, mut strategy: Box<dyn Strategy>, seed: u64, g: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(g);
    let mut tally = Tally::default();
    let mut moves = Vec::new();
    let mut last = None;
    loop {
        let status = board.status(ctx.variant);
        if status.is_over() {
            tally.finished(ctx, &board, &moves, status, 0);
            return tally;
        }
        let mover = board.to_move();
        let m = if mover == ctx.player {
            match strategy.next_move(&board, last) {
                Ok(m) => m,
                Err(e) => {
                    let inv = matches!(e, StrategyError::InvariantViolated(_));
                    tally.failed(&moves, e.to_string(), inv, 0);
                    return tally;
                }
            }
        } else {
            *board.empty_cells().choose(&mut rng).expect("game in progress")
        };
        board = match board.play(mover, m, ctx.variant) {
            Ok(b) => b,
            Err(e) => {
                tally.failed(&moves, format!("illegal move {m}: {e}"), false, 0);
                return tally;
            }
        };
        last = (mover != ctx.player).then_some(m);
        moves.push(MoveEntry::new(mover, m));
    }
}

fn report(
    ctx: &Ctx,
    mode: Mode,
    seed: Option<u64>,
    tally: Tally,
    expected_weight: Option<u128>,
    adversary: &str,
) -> VerificationReport {
    let engines = ctx.engines(adversary);
    let games = tally.games();
    let (violations, violation_reasons) = tally
        .violations
        .into_iter()
        .enumerate()
        .map(|(i, (moves, result, why))| {
            let mut rec = GameRecord::new(format!("violation-{}", i + 1), ctx.n, ctx.variant, engines.clone());
            rec.moves = moves;
            rec.result = result;
            (rec, why)
        })
        .unzip();
    VerificationReport {
        strategy: ctx.id.to_string(),
        player: ctx.player,
        n: ctx.n,
        variant: ctx.variant,
        mode,
        seed,
        claim: ctx.claim.describe(ctx.player),
        games,
        results: tally.hist,
        errors: tally.errors,
        invariant_failures: tally.invariant_failures,
        max_x_moves: tally.max_x_moves,
        completeness: expected_weight.map(|expected| Completeness {
            expected,
            observed: tally.weight,
        }),
        violation_count: tally.violation_count,
        violations,
        violation_reasons,
    }
}

/// Root value of a game against its known value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub n: usize,
    pub variant: Variant,
    /// Stones on the board before solving, as `X(r,c)` entries.
    pub start: Vec<MoveEntry>,
    pub expected: Value,
    pub observed: Value,
    pub nodes: u64,
    pub matches: bool,
}

/// Known values: strong n = 2, 3 drawn, n = 4 a first-player win; in the
/// Maker-Breaker game at n = 4, Maker wins after opening at (1,1).
pub fn known_value(n: usize, variant: Variant) -> Option<(Vec<MoveEntry>, Value)> {
    match (variant, n) {
        (Variant::Strong, 2 | 3) => Some((Vec::new(), Value::Draw)),
        (Variant::Strong, 4) => Some((Vec::new(), Value::FirstPlayerWin)),
        (Variant::MakerBreaker, 4) => Some((vec![MoveEntry::new(Player::X, Cell::new(1, 1))], Value::FirstPlayerWin)),
        _ => None,
    }
}

pub fn cross_check_solver(n: usize, variant: Variant) -> Result<CrossCheck, HarnessError> {
    let (start, expected) = known_value(n, variant)
        .ok_or_else(|| HarnessError::InvalidParameter(format!("no known value for n = {n}, {variant}")))?;
    let mut board = Board::new(n).map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;
    for m in &start {
        board = board
            .play(m.player, m.cell(), variant)
            .map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;
    }
    let mut solver = Solver::new(SolveOptions::default());
    let r = solver.solve(&board, board.to_move(), variant)?;
    Ok(CrossCheck {
        n,
        variant,
        start,
        expected,
        observed: r.value,
        nodes: r.nodes_visited,
        matches: r.value == expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branching_product() {
        assert_eq!(adversary_branching_product(3, Player::X), 8 * 6 * 4 * 2);
        assert_eq!(adversary_branching_product(3, Player::O), 9 * 7 * 5 * 3);
        assert_eq!(adversary_branching_product(1, Player::X), 1);
    }

    #[test]
    fn random_adversary_is_complete_for_random_strategy() {
        // No claim: every game counts, none is a violation.
        let r = verify_exhaustive(StrategyId::Random(3), 2, Variant::Strong).unwrap();
        assert_eq!(r.games, 3);
        assert!(r.holds());
    }

    #[test]
    fn bounds_and_parameters() {
        assert!(matches!(
            verify_exhaustive(StrategyId::Theorem1, 5, Variant::Strong),
            Err(HarnessError::TractabilityBound { bound: 4, .. })
        ));
        assert!(matches!(
            verify_random(StrategyId::Theorem1, 5, Variant::Strong, 0, 1),
            Err(HarnessError::InvalidParameter(_))
        ));
        assert!(verify_exhaustive(StrategyId::Theorem1, 4, Variant::MakerBreaker).is_err());
    }

    #[test]
    fn solver_perfect_meets_the_game_value() {
        let r = verify_exhaustive(StrategyId::SolverPerfect, 3, Variant::Strong).unwrap();
        assert!(r.holds(), "{}", r.to_text());
        assert_eq!(r.results.loss, 0);
    }

    #[test]
    fn losing_lines_are_reported_in_order() {
        let r = verify_exhaustive(StrategyId::Random(5), 3, Variant::Strong).unwrap();
        assert!(r.results.loss > 0);
        let ctx = Ctx {
            id: StrategyId::Random(5),
            player: Player::X,
            n: 3,
            variant: Variant::Strong,
            claim: Claim::NoLoss,
        };
        assert_eq!(ctx.judge(Some(Player::O), 3).as_deref(), Some("X lost"));
        assert_eq!(ctx.judge(None, 5), None);
    }

    #[test]
    fn cross_checks_small_sizes() {
        for n in [2, 3] {
            let c = cross_check_solver(n, Variant::Strong).unwrap();
            assert!(c.matches);
            assert_eq!(c.observed, Value::Draw);
        }
        assert!(cross_check_solver(5, Variant::Strong).is_err());
    }
}
