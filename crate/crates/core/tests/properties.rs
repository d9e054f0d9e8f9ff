use proptest::prelude::*;

use transversal::{Board, Cell, GoodTransform, Player, Variant};

/// Cell contents as 0 = empty, 1 = X, 2 = O, row-major.
fn board_strategy(max_n: usize) -> impl Strategy<Value = Board> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(0u8..3, n * n).prop_map(move |cells| {
            let mut xs = Vec::new();
            let mut os = Vec::new();
            for (i, v) in cells.into_iter().enumerate() {
                let cell = Cell::new((i / n) as u8 + 1, (i % n) as u8 + 1);
                match v {
                    1 => xs.push(cell),
                    2 => os.push(cell),
                    _ => {}
                }
            }
            Board::from_cells(n, &xs, &os).unwrap()
        })
    })
}

fn transform_strategy(n: usize) -> impl Strategy<Value = GoodTransform> {
    let perm = || Just((0..n as u8).collect::<Vec<_>>()).prop_shuffle();
    (any::<bool>(), perm(), perm()).prop_map(|(t, r, c)| GoodTransform::new(t, r, c).unwrap())
}

fn board_and_transform() -> impl Strategy<Value = (Board, GoodTransform)> {
    board_strategy(6).prop_flat_map(|b| (Just(b), transform_strategy(b.n())))
}

fn player() -> impl Strategy<Value = Player> {
    prop_oneof![Just(Player::X), Just(Player::O)]
}

/// Position reached by legal strong-game play.
fn played_board() -> impl Strategy<Value = Board> {
    (2usize..=6, any::<u64>(), 0usize..40).prop_map(|(n, seed, plies)| {
        let mut b = Board::new(n).unwrap();
        let mut s = seed;
        for _ in 0..plies {
            if b.status(Variant::Strong).is_over() {
                break;
            }
            let empty = b.empty_cells();
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let c = empty[(s >> 33) as usize % empty.len()];
            b = b.apply_move(b.to_move(), c).unwrap();
        }
        b
    })
}

proptest! {
    #[test]
    fn matching_is_monotone(b in board_strategy(7), p in player(), pick in any::<prop::sample::Index>()) {
        let empty = b.empty_cells();
        if empty.is_empty() {
            return Ok(());
        }
        let c = *pick.get(&empty);
        let after = b.with_stone(p, c).unwrap();
        let (own, theirs) = (b.max_transversal_matching(p), b.max_transversal_matching(p.opponent()));
        prop_assert!(after.max_transversal_matching(p) >= own);
        prop_assert!(after.max_transversal_matching(p) <= own + 1);
        prop_assert_eq!(after.max_transversal_matching(p.opponent()), theirs);
    }

    #[test]
    fn threats_are_exactly_winning_cells(b in board_strategy(7), p in player()) {
        let threats = b.threats(p);
        for c in b.empty_cells() {
            prop_assert_eq!(threats.contains(&c), b.with_stone(p, c).unwrap().has_won(p), "cell {}", c);
        }
    }

    #[test]
    fn can_ever_win_means_filling_every_empty_cell_wins(b in board_strategy(7), p in player()) {
        let mut filled = b;
        for c in b.empty_cells() {
            filled = filled.with_stone(p, c).unwrap();
        }
        prop_assert_eq!(b.can_ever_win(p), filled.has_won(p));
    }

    #[test]
    fn played_positions_have_one_winner_at_most(b in played_board()) {
        prop_assert!(!(b.has_won(Player::X) && b.has_won(Player::O)));
        prop_assert!(b.is_consistent());
        let over = b.status(Variant::Strong).is_over();
        prop_assert_eq!(over, b.has_won(Player::X) || b.has_won(Player::O) || b.is_full());
    }

    #[test]
    fn transforms_preserve_wins_and_threats((b, t) in board_and_transform(), p in player()) {
        let tb = t.apply(&b).unwrap();
        prop_assert_eq!(tb.has_won(p), b.has_won(p));
        prop_assert_eq!(tb.max_transversal_matching(p), b.max_transversal_matching(p));
        let mut mapped: Vec<Cell> = b.threats(p).into_iter().map(|c| t.map_cell(c).unwrap()).collect();
        mapped.sort();
        let mut image = tb.threats(p);
        image.sort();
        prop_assert_eq!(mapped, image);
        prop_assert_eq!(t.invert().apply(&tb).unwrap(), b);
    }

    #[test]
    fn text_form_round_trips(b in board_strategy(16)) {
        let text = b.to_text();
        let back = Board::from_text(&text).unwrap();
        prop_assert_eq!(back, b);
        prop_assert_eq!(back.to_text(), text);
    }
}
