mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sumsets::constructions::p51_a;
use sumsets::correspondence::{check_fcp_inequalities, empirical};
use sumsets::rational::ratio;
use sumsets::search::{max_witness, verify_witness, Mode, SearchConfig, SumsetWitness};
use sumsets::{Limits, SetExpr};

fn set_from(seed: u64, depth: u32) -> SetExpr {
    common::random_set(&mut ChaCha8Rng::seed_from_u64(seed), depth)
}

fn table(a: &SetExpr, horizon: u64) -> Vec<bool> {
    let bm = a.bitmap(horizon).unwrap();
    (0..=horizon).map(|n| n > 0 && bm.contains(n)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dsl_round_trips(seed in any::<u64>()) {
        let a = set_from(seed, 3);
        let text = a.to_dsl();
        let b = sumsets::parse(&text).unwrap();
        prop_assert_eq!(&b, &a);
        prop_assert_eq!(b.to_dsl(), text);
    }

    #[test]
    fn bitmap_matches_membership(seed in any::<u64>(), horizon in 1u64..400) {
        let a = set_from(seed, 3);
        let bm = a.bitmap(horizon).unwrap();
        for n in 1..=horizon {
            prop_assert_eq!(bm.contains(n), a.member(n).unwrap(), "n = {}", n);
        }
        prop_assert_eq!(a.count(horizon).unwrap(), bm.count());
    }

    #[test]
    fn complement_and_de_morgan(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = set_from(s1, 2);
        let b = set_from(s2, 2);
        let lhs = a.clone().union(b.clone()).compl().bitmap(300).unwrap();
        let rhs = a.clone().compl().inter(b.clone().compl()).bitmap(300).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.clone().compl().compl().bitmap(300).unwrap(), a.bitmap(300).unwrap());
        let d = a.clone().diff(b.clone()).bitmap(300).unwrap();
        let i = a.inter(b.compl()).bitmap(300).unwrap();
        prop_assert_eq!(d, i);
    }

    #[test]
    fn witnesses_are_downward_closed(seed in any::<u64>(), t in 0u64..4, mask in any::<u64>()) {
        let a = set_from(seed, 2);
        let cfg = SearchConfig::new(Mode::Greedy, t, 200);
        let w = max_witness(&a, &cfg, &Limits::default()).unwrap().witness;
        prop_assume!(w.size > 0);
        prop_assert!(w.verified);
        let sub: Vec<u64> = w.b.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, &b)| b).collect();
        prop_assume!(!sub.is_empty());
        let mut sw = SumsetWitness::new(sub, t, 200);
        prop_assert!(verify_witness(&a, &mut sw).unwrap());
    }

    #[test]
    fn exact_dominates_greedy(seed in any::<u64>(), t in 0u64..4) {
        let a = set_from(seed, 2);
        let limits = Limits::default();
        let exact = max_witness(&a, &SearchConfig::new(Mode::Exact, t, 120), &limits).unwrap();
        let greedy = max_witness(&a, &SearchConfig::new(Mode::Greedy, t, 120), &limits).unwrap();
        prop_assert!(exact.stats.complete);
        prop_assert!(exact.witness.verified || exact.witness.size == 0);
        prop_assert!(exact.witness.size >= greedy.witness.size);
    }

    #[test]
    fn exact_matches_oracle(seed in any::<u64>(), t in 0u64..6) {
        let a = set_from(seed, 2);
        let horizon = 60;
        let exact = max_witness(&a, &SearchConfig::new(Mode::Exact, t, horizon), &Limits::default()).unwrap();
        prop_assert!(exact.stats.complete);
        prop_assert_eq!(exact.witness.size, common::brute_force_max_witness(&table(&a, horizon), t, horizon));
    }

    #[test]
    fn parity_frequencies_partition_the_prefix(seed in any::<u64>(), n_k in 10u64..2000) {
        let a = set_from(seed, 3);
        let limits = Limits::default();
        let m = empirical(&a, n_k, &limits).unwrap();
        let r = check_fcp_inequalities(&a, n_k, &limits).unwrap();
        prop_assert!(r.parity_identity, "{}", a);
        prop_assert_eq!(m.nprime_k, n_k / 2);
        let bm = a.bitmap(2 * m.nprime_k + 1).unwrap();
        let evens = (1..=m.nprime_k).filter(|&j| bm.contains(2 * j)).count() as u64;
        let odds = (1..=m.nprime_k).filter(|&j| bm.contains(2 * j + 1)).count() as u64;
        prop_assert_eq!(&m.freq_e_sigma + &m.freq_sinv_e, ratio(evens + odds, m.nprime_k));
    }

    #[test]
    fn p51_grows_with_epsilon(a in 0u64..84, b in 0u64..84) {
        let (lo, hi) = (a.min(b), a.max(b));
        let small = p51_a(&ratio(lo, 1008)).unwrap().bitmap(5000).unwrap();
        let large = p51_a(&ratio(hi, 1008)).unwrap().bitmap(5000).unwrap();
        prop_assert!(small.ones().all(|n| large.contains(n)));
    }
}
