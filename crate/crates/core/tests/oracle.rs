mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankreinforce::oracle::oracle_solve_with_midpoints;
use rankreinforce::{oracle_solve, ComplementModel, SupportedSet};

#[test]
fn midpoints_never_help() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (s, m) = random_exact(&mut rng, (1, 3), (1, 5), 60);
        let b = rng.gen_range(0..=100) as f64;
        let plain = oracle_solve(&s, &m, b).unwrap();
        let wider = oracle_solve_with_midpoints(&s, &m, b).unwrap();
        assert_eq!(
            plain.best_utility,
            wider.best_utility,
            "{:?} {:?} {b}",
            s.scores(),
            m
        );
    }
}

#[test]
fn four_entry_readings_differ_at_181() {
    let s = SupportedSet::new(FOUR_ENTRY_SUPPORTED.to_vec()).unwrap();
    let with_120 = ComplementModel::empirical(FOUR_ENTRY_WITH_120.to_vec()).unwrap();
    let with_200 = ComplementModel::empirical(FOUR_ENTRY_WITH_200.to_vec()).unwrap();
    let quoted = [(10.0, 80.0), (15.0, 80.0), (40.0, 80.0), (114.0, 120.0)];
    let best = oracle_solve(&s, &with_120, 181.0).unwrap();
    assert!(best.best_plans.iter().any(|p| p.pairs() == quoted));
    let best = oracle_solve(&s, &with_200, 181.0).unwrap();
    assert!(best.best_plans.iter().all(|p| p.cost() < 181.0));
}

#[test]
fn plans_respect_budget_and_utility() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (s, m) = random_exact(&mut rng, (1, 4), (1, 6), 100);
        let b = rng.gen_range(0..=150) as f64;
        let best = oracle_solve(&s, &m, b).unwrap();
        for p in &best.best_plans {
            assert!(p.cost() <= b);
            let (num, den) =
                rankreinforce::model::utility_fraction(p.reinforced(), m.as_empirical().unwrap());
            assert_eq!(num_rational::Ratio::new(num, den), best.best_utility);
        }
    }
}
