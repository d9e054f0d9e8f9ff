//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use transversal::harness::{cross_check_solver, verify_exhaustive, verify_random, VerificationReport};
use transversal::{
    Board, Cell, Engines, GameRecord, GoodTransform, MoveEntry, Player, SolveOptions, Solver, StrategyId, Value,
    Variant,
};

// Time limits, all on one thread of commodity hardware or better.
const SMALL_SOLVE_LIMIT: Duration = Duration::from_secs(1);
const N4_SOLVE_LIMIT: Duration = Duration::from_secs(600);
const MAKER_BREAKER_SOLVE_LIMIT: Duration = Duration::from_secs(60);
const THEOREM1_EXHAUSTIVE_LIMIT: Duration = Duration::from_secs(60);
const PROP2_EXHAUSTIVE_LIMIT: Duration = Duration::from_secs(10);
const RANDOM_TOTAL_LIMIT: Duration = Duration::from_secs(600);

const RANDOM_GAMES: u64 = 10_000;
const ORACLE_POSITIONS: usize = 10_000;
const SYMMETRY_PAIRS: usize = 1_000;
const SAMPLED_N4_POSITIONS: usize = 100;
const ROUND_TRIP_RECORDS: usize = 1_000;

struct Outcome {
    failures: usize,
}

impl Outcome {
    fn report(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

/// Heap's algorithm, all permutations of 0..n.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

fn owns(b: &Board, p: Player, r: usize, c: usize) -> bool {
    b.get(Cell::new(r as u8 + 1, c as u8 + 1)) == Some(p)
}

/// Largest number of rows an injective row→column assignment can place on
/// the player's cells. Any matching extends to a full permutation.
fn brute_matching(b: &Board, p: Player, perms: &[Vec<usize>]) -> usize {
    perms
        .iter()
        .map(|s| (0..b.n()).filter(|&r| owns(b, p, r, s[r])).count())
        .max()
        .unwrap_or(0)
}

fn brute_won(b: &Board, p: Player, perms: &[Vec<usize>]) -> bool {
    brute_matching(b, p, perms) == b.n()
}

fn random_position(rng: &mut ChaCha8Rng, n: usize) -> Board {
    let px: f64 = rng.gen_range(0.0..0.6);
    let po: f64 = rng.gen_range(0.0..(1.0 - px));
    let mut xs = Vec::new();
    let mut os = Vec::new();
    for r in 1..=n as u8 {
        for c in 1..=n as u8 {
            let u: f64 = rng.gen();
            if u < px {
                xs.push(Cell::new(r, c));
            } else if u < px + po {
                os.push(Cell::new(r, c));
            }
        }
    }
    Board::from_cells(n, &xs, &os).expect("distinct cells")
}

fn random_transform(rng: &mut ChaCha8Rng, n: usize) -> GoodTransform {
    let mut rows: Vec<u8> = (0..n as u8).collect();
    let mut cols = rows.clone();
    rows.shuffle(rng);
    cols.shuffle(rng);
    GoodTransform::new(rng.gen(), rows, cols).expect("permutations")
}

/// Legal position reached by `plies` random moves, stopping early if the
/// game ends.
fn random_playout(rng: &mut ChaCha8Rng, n: usize, plies: usize, variant: Variant) -> (Board, Vec<MoveEntry>) {
    let mut b = Board::new(n).unwrap();
    let mut moves = Vec::new();
    for _ in 0..plies {
        if b.status(variant).is_over() {
            break;
        }
        let p = b.to_move();
        let c = *b.empty_cells().choose(rng).unwrap();
        b = b.play(p, c, variant).unwrap();
        moves.push(MoveEntry::new(p, c));
    }
    (b, moves)
}

fn solver_values(out: &mut Outcome) {
    let mut detail = Vec::new();
    let mut ok = true;
    for (n, limit) in [(2, SMALL_SOLVE_LIMIT), (3, SMALL_SOLVE_LIMIT), (4, N4_SOLVE_LIMIT)] {
        let (c, t) = timed(|| cross_check_solver(n, Variant::Strong).unwrap());
        ok &= c.matches && t <= limit;
        detail.push(format!("n={n} {} (expected {}, {})", c.observed, c.expected, secs(t)));
    }
    out.report("solver values n=2,3,4", ok, detail.join("; "));
}

fn maker_breaker_value(out: &mut Outcome) {
    let (c, t) = timed(|| cross_check_solver(4, Variant::MakerBreaker).unwrap());
    out.report(
        "maker-breaker n=4 after X(1,1)",
        c.matches && c.observed == Value::FirstPlayerWin && t <= MAKER_BREAKER_SOLVE_LIMIT,
        format!("{} ({} nodes, {})", c.observed, c.nodes, secs(t)),
    );
}

fn complete(r: &VerificationReport) -> bool {
    r.completeness.is_some_and(|c| c.expected == c.observed)
}

fn theorem1_exhaustive(out: &mut Outcome, invariant_failures: &mut u64) {
    let (r, t) = timed(|| verify_exhaustive(StrategyId::Theorem1, 4, Variant::Strong).unwrap());
    *invariant_failures += r.invariant_failures;
    out.report(
        "theorem1 exhaustive n=4",
        r.holds()
            && complete(&r)
            && r.results.win == r.games
            && r.max_x_moves.is_some_and(|m| m <= 7)
            && t <= THEOREM1_EXHAUSTIVE_LIMIT,
        format!(
            "{} of {} lines won, max X moves {:?}, {} violations ({})",
            r.results.win,
            r.games,
            r.max_x_moves,
            r.violation_count,
            secs(t)
        ),
    );
}

fn prop2_exhaustive(out: &mut Outcome) {
    let ((x, o), t) = timed(|| {
        (
            verify_exhaustive(StrategyId::Prop2XDraw, 3, Variant::Strong).unwrap(),
            verify_exhaustive(StrategyId::Prop2ODraw, 3, Variant::Strong).unwrap(),
        )
    });
    out.report(
        "prop2 draw strategies exhaustive n=3",
        x.holds()
            && o.holds()
            && complete(&x)
            && complete(&o)
            && x.results.loss == 0
            && o.results.loss == 0
            && x.errors == 0
            && o.errors == 0
            && t <= PROP2_EXHAUSTIVE_LIMIT,
        format!(
            "X side {} lines / {} losses, O side {} lines / {} losses ({})",
            x.games,
            x.results.loss,
            o.games,
            o.results.loss,
            secs(t)
        ),
    );
}

fn randomized(out: &mut Outcome, invariant_failures: &mut u64) {
    let mut ok = true;
    let mut detail = Vec::new();
    let start = Instant::now();
    for n in 5..=8 {
        let r = verify_random(StrategyId::Theorem1, n, Variant::Strong, RANDOM_GAMES, 1).unwrap();
        *invariant_failures += r.invariant_failures;
        ok &= r.holds() && r.results.win == RANDOM_GAMES;
        detail.push(format!("theorem1 n={n} {}/{}", r.results.win, r.games));
    }
    for n in 5..=6 {
        let r = verify_random(StrategyId::MakerBreaker, n, Variant::MakerBreaker, RANDOM_GAMES, 7).unwrap();
        ok &= r.holds() && r.results.win == RANDOM_GAMES;
        detail.push(format!("maker-breaker n={n} {}/{}", r.results.win, r.games));
    }
    let t = start.elapsed();
    ok &= t <= RANDOM_TOTAL_LIMIT;
    detail.push(secs(t));
    out.report("randomized verification", ok, detail.join(", "));
}

fn oracle_equivalence(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut matching_mismatch = 0;
    let mut threat_mismatch = 0;
    let mut positions = 0;
    for n in 2..=5 {
        let perms = permutations(n);
        for _ in 0..ORACLE_POSITIONS {
            let b = random_position(&mut rng, n);
            positions += 1;
            for p in [Player::X, Player::O] {
                if b.max_transversal_matching(p) != brute_matching(&b, p, &perms) {
                    matching_mismatch += 1;
                }
                let threats = b.threats(p);
                for c in b.empty_cells() {
                    let placed = b.with_stone(p, c).unwrap();
                    if threats.contains(&c) != brute_won(&placed, p, &perms) {
                        threat_mismatch += 1;
                    }
                }
            }
        }
    }
    out.report(
        "oracle equivalence n=2..5",
        matching_mismatch == 0 && threat_mismatch == 0,
        format!("{positions} positions, {matching_mismatch} matching mismatches, {threat_mismatch} threat mismatches"),
    );
}

/// Every legal position of the n=3 strong game: stone counts alternate and
/// play stopped when someone completed a transversal.
fn all_reachable_3x3() -> Vec<Board> {
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![Board::new(3).unwrap()];
    while let Some(b) = stack.pop() {
        if !seen.insert(b) {
            continue;
        }
        if b.status(Variant::Strong).is_over() {
            continue;
        }
        let p = b.to_move();
        for c in b.empty_cells() {
            stack.push(b.apply_move(p, c).unwrap());
        }
    }
    seen.into_iter().collect()
}

fn symmetry(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut bad_pairs = 0;
    for n in [3, 4] {
        for _ in 0..SYMMETRY_PAIRS {
            let b = random_position(&mut rng, n);
            let t = random_transform(&mut rng, n);
            let tb = t.apply(&b).unwrap();
            for p in [Player::X, Player::O] {
                let mapped: Vec<Cell> = b.threats(p).iter().map(|&c| t.map_cell(c).unwrap()).collect();
                let mut image = tb.threats(p);
                image.sort();
                let mut mapped_sorted = mapped;
                mapped_sorted.sort();
                if b.has_won(p) != tb.has_won(p) || b.threats(p).len() != tb.threats(p).len() || image != mapped_sorted
                {
                    bad_pairs += 1;
                }
            }
        }
    }

    let mut solver = Solver::new(SolveOptions::default());
    let mut value_mismatch = 0;
    let all3 = all_reachable_3x3();
    for b in &all3 {
        let t = random_transform(&mut rng, 3);
        let v = solver.solve(b, b.to_move(), Variant::Strong).unwrap().value;
        let tv = solver
            .solve(&t.apply(b).unwrap(), b.to_move(), Variant::Strong)
            .unwrap()
            .value;
        if v != tv {
            value_mismatch += 1;
        }
    }
    let mut sampled = 0;
    while sampled < SAMPLED_N4_POSITIONS {
        let plies = rng.gen_range(2..10);
        let (b, _) = random_playout(&mut rng, 4, plies, Variant::Strong);
        if b.status(Variant::Strong).is_over() {
            continue;
        }
        sampled += 1;
        let t = random_transform(&mut rng, 4);
        let v = solver.solve(&b, b.to_move(), Variant::Strong).unwrap().value;
        let tv = solver
            .solve(&t.apply(&b).unwrap(), b.to_move(), Variant::Strong)
            .unwrap()
            .value;
        if v != tv {
            value_mismatch += 1;
        }
    }
    out.report(
        "symmetry properties",
        bad_pairs == 0 && value_mismatch == 0,
        format!(
            "{} board/transform pairs with {bad_pairs} failures; value invariance on {} n=3 and {sampled} n=4 positions with {value_mismatch} mismatches",
            2 * SYMMETRY_PAIRS,
            all3.len()
        ),
    );
}

fn star_never_fires(out: &mut Outcome, invariant_failures: u64) {
    out.report(
        "theorem1 invariant assertions",
        invariant_failures == 0,
        format!("{invariant_failures} invariant failures over all verified theorem1 lines"),
    );
}

fn round_trips(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = 0;
    let strategies = ["theorem1", "prop2-o-draw", "maker-breaker", "random(3)", "human"];
    for i in 0..ROUND_TRIP_RECORDS {
        let n = rng.gen_range(1..=8);
        let variant = if rng.gen() {
            Variant::Strong
        } else {
            Variant::MakerBreaker
        };
        let plies = rng.gen_range(0..=n * n);
        let (board, moves) = random_playout(&mut rng, n, plies, variant);
        let engines = Engines {
            x: strategies.choose(&mut rng).unwrap().to_string(),
            o: strategies.choose(&mut rng).unwrap().to_string(),
        };
        let mut rec = GameRecord::new(format!("game-{i}"), n, variant, engines);
        rec.moves = moves;
        rec.result = rec.replay().unwrap().1;

        let json = rec.to_json();
        let back = GameRecord::from_json(&json).unwrap();
        if back != rec || back.to_json() != json || back.verify().map(|b| b != board).unwrap_or(true) {
            failures += 1;
        }
        let text = board.to_text();
        let parsed = Board::from_text(&text).unwrap();
        if parsed != board || parsed.to_text() != text {
            failures += 1;
        }
    }
    out.report(
        "record and position round trips",
        failures == 0,
        format!("{ROUND_TRIP_RECORDS} records and positions, {failures} failures"),
    );
}

fn main() {
    let mut out = Outcome { failures: 0 };
    let mut invariant_failures = 0;
    solver_values(&mut out);
    maker_breaker_value(&mut out);
    theorem1_exhaustive(&mut out, &mut invariant_failures);
    prop2_exhaustive(&mut out);
    randomized(&mut out, &mut invariant_failures);
    oracle_equivalence(&mut out);
    symmetry(&mut out);
    star_never_fires(&mut out, invariant_failures);
    round_trips(&mut out);
    if out.failures > 0 {
        println!("{} criteria failed", out.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
