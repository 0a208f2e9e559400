use hypocalc::linalg::Echelon;
use hypocalc::scalar::int;
use hypocalc::Rational;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..6, 1usize..7).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3i64..=3, c), r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn float_rank_matches_exact_rank(rows in matrix(), extra in prop::collection::vec(-2i64..=2, 6)) {
        let ncols = rows[0].len();
        let mut exact = Echelon::<Rational>::new(ncols, 0.0);
        let mut float = Echelon::<f64>::new(ncols, 1e-10);
        for row in &rows {
            let a = exact.insert(&row.iter().map(|&x| int(x)).collect::<Vec<_>>(), None);
            let b = float.insert(&row.iter().map(|&x| x as f64).collect::<Vec<_>>(), None);
            prop_assert_eq!(a, b);
        }
        prop_assert_eq!(exact.rank(), float.rank());
        // integer combinations of the inserted rows stay in the span
        let combo: Vec<f64> = (0..ncols)
            .map(|j| rows.iter().zip(&extra).map(|(r, &c)| (r[j] * c) as f64).sum())
            .collect();
        prop_assert!(float.contains(&combo));
    }
}
