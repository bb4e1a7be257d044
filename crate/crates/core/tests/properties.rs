use proptest::prelude::*;
use sbp_core::{
    cycles::{cycle_count_bruteforce, cycle_count_fast},
    model::{count_solutions, satisfies, second_moment_ratio, ConstraintMatrix, ModelParams, SpinVector},
    planted::sample_planted,
    seed::replica_rng,
    Kappa,
};

fn matrix(m: usize, n: usize, bits: &[bool]) -> ConstraintMatrix {
    ConstraintMatrix::from_fn(m, n, |j, i| if bits[j * n + i] { 1 } else { -1 })
}

fn instance() -> impl Strategy<Value = (ConstraintMatrix, Kappa)> {
    (1usize..=9, 1usize..=8, 1u64..=25).prop_flat_map(|(n, m, k)| {
        prop::collection::vec(any::<bool>(), n * m)
            .prop_map(move |bits| (matrix(m, n, &bits), Kappa::from_parts(k, 1).unwrap()))
    })
}

fn naive_count(g: &ConstraintMatrix, kappa: &Kappa) -> u64 {
    let n = g.n();
    (0..1u64 << n).filter(|&b| satisfies(g, &SpinVector::from_bits(n, b), kappa)).count() as u64
}

proptest! {
    #[test]
    fn count_matches_naive((g, kappa) in instance()) {
        prop_assert_eq!(count_solutions(&g, &kappa).unwrap().count, naive_count(&g, &kappa));
    }

    #[test]
    fn count_is_even_and_sign_invariant((g, kappa) in instance(), col in 0usize..9, row in 0usize..8) {
        let z = count_solutions(&g, &kappa).unwrap().count;
        prop_assert_eq!(z % 2, 0);
        let mut h = g.clone();
        h.negate_column(col % g.n());
        h.negate_row(row % g.m());
        prop_assert_eq!(count_solutions(&h, &kappa).unwrap().count, z);
    }

    #[test]
    fn cycle_counts_invariant_under_sign_flips((g, _k) in instance(), col in 0usize..9, row in 0usize..8, k in 2usize..=4) {
        let mut h = g.clone();
        h.negate_column(col % g.n());
        h.negate_row(row % g.m());
        let base = cycle_count_fast(&g, k).unwrap();
        prop_assert_eq!(cycle_count_fast(&h, k).unwrap(), base);
        prop_assert_eq!(cycle_count_fast(&g.transpose(), k).unwrap(), base);
    }

    #[test]
    fn fast_cycles_match_bruteforce(n in 1usize..=6, m in 1usize..=6, seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = replica_rng(seed, 0);
        let g = sbp_core::model::sample_matrix(&ModelParams::new(Kappa::from_parts(1, 0).unwrap(), n, m, seed).unwrap(), &mut rng);
        prop_assert_eq!(cycle_count_fast(&g, k).unwrap(), cycle_count_bruteforce(&g, k).unwrap());
    }

    #[test]
    fn second_moment_ratio_at_least_one(n in 1usize..=60, m in 1usize..=40, k in 5u64..=30) {
        let p = ModelParams::new(Kappa::from_parts(k, 1).unwrap(), n, m, 0).unwrap();
        if let Ok(r) = second_moment_ratio(&p) {
            prop_assert!(r >= 1.0 - 1e-12, "ratio {}", r);
        }
    }

    #[test]
    fn planted_vector_is_a_solution(n in 2usize..=40, m in 1usize..=30, seed in any::<u64>()) {
        let p = ModelParams::new(Kappa::from_parts(1, 0).unwrap(), n, m, seed).unwrap();
        let inst = sample_planted(&p, &mut replica_rng(seed, 1)).unwrap();
        prop_assert!(satisfies(&inst.matrix, &inst.planted, &p.kappa));
        prop_assert!(satisfies(&inst.gauged(), &SpinVector::all_ones(n), &p.kappa));
    }

    #[test]
    fn kappa_text_round_trips(digits in 1u64..999_999_999_999, scale in 0u32..12) {
        let k = Kappa::from_parts(digits, scale).unwrap();
        let back: Kappa = k.to_string().parse().unwrap();
        prop_assert_eq!(back, k);
    }
}
