use std::collections::HashMap;

use cis_core::bounds::{greedy_code, hamming, tail_bound, WordFamily};
use cis_core::cardgame::{play, StrategyKind};
use cis_core::exact::{complete_prob, p_value, phi_apply, phi_inverse, q_poly, RationalPolynomial};
use cis_core::montecarlo::{Execution, MonteCarlo};
use cis_core::words::{enumerate_words, multiset_count, sample_uniform, RandomSource};
use cis_core::Word;
use num_rational::BigRational;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn shape() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=5, 1u32..=10).prop_filter("mn <= 10", |(m, n)| m * n <= 10)
}

fn word() -> impl Strategy<Value = Word> {
    (shape(), any::<u64>()).prop_map(|((m, n), seed)| sample_uniform(m, n, &RandomSource::new(seed, 0)))
}

fn brute_l_start(w: &Word, i: u32) -> u32 {
    (i..=w.n())
        .take_while(|&j| w.contains_subsequence(&(i..=j).collect::<Vec<_>>()))
        .count() as u32
}

fn brute_lis(letters: &[u32]) -> u32 {
    let mut best = vec![1u32; letters.len()];
    for j in 0..letters.len() {
        for i in 0..j {
            if letters[i] < letters[j] {
                best[j] = best[j].max(best[i] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

proptest! {
    #[test]
    fn greedy_scans_match_brute_force(w in word()) {
        prop_assert_eq!(w.l1(), brute_l_start(&w, 1));
        let starts: Vec<u32> = (1..=w.n()).map(|i| w.l_start(i)).collect();
        for (i, &l) in starts.iter().enumerate() {
            prop_assert_eq!(l, brute_l_start(&w, i as u32 + 1));
        }
        prop_assert_eq!(w.l_max(), *starts.iter().max().unwrap());
        prop_assert!(w.l_max() >= w.l1());
        prop_assert_eq!(w.lis(), brute_lis(w.letters()));
    }

    #[test]
    fn shifting_score_bounds_l1(w in word()) {
        let trace = play(&w, StrategyKind::Shifting);
        prop_assert!(trace.score >= w.l1());
        if !trace.guessed_last_type() {
            prop_assert_eq!(trace.score, w.l1());
        }
        prop_assert_eq!(play(&w, StrategyKind::Trivial).score, w.m());
    }

    #[test]
    fn words_reject_bad_multiplicities((m, n) in shape(), seed in any::<u64>(), pos in any::<prop::sample::Index>()) {
        let w = sample_uniform(m, n, &RandomSource::new(seed, 1));
        let mut letters = w.letters().to_vec();
        let i = pos.index(letters.len());
        letters[i] = letters[i] % n + 1;
        prop_assert_eq!(Word::new(letters.clone(), m, n).is_ok(), n == 1);
        letters[i] = n + 1;
        prop_assert!(Word::new(letters, m, n).is_err());
    }

    #[test]
    fn phi_round_trip(coeffs in prop::collection::vec((-50i64..50, 1i64..20), 0..10)) {
        let p = RationalPolynomial::new(
            coeffs.iter().map(|&(a, b)| BigRational::new(a.into(), b.into())).collect(),
        );
        prop_assert_eq!(phi_inverse(&phi_apply(&p)), p.clone());
        prop_assert_eq!(phi_apply(&phi_inverse(&p)), p);
    }

    #[test]
    fn generating_function_matches_weak_compositions(m in 1u32..=6, n in 1u32..=9) {
        prop_assert_eq!(p_value(m, n).unwrap(), complete_prob(m, n).unwrap());
        let q = q_poly(m);
        prop_assert!(q.coeffs().iter().all(|c| c.is_integer()));
    }

    #[test]
    fn greedy_codes_keep_distance(m in 2u32..=4, n in 2u32..=7, d in 1u32..=3) {
        prop_assume!(2 * d <= n);
        let code = greedy_code(m, n, d).unwrap();
        prop_assert!(code.min_distance_holds());
        for (i, x) in code.words.iter().enumerate() {
            for y in &code.words[i + 1..] {
                prop_assert!(hamming(x, y) >= d);
            }
        }
        prop_assert!(BigRational::from_integer(code.len().into()) >= code.gv_bound());
    }

    #[test]
    fn schedules_are_bitwise_identical(seed in any::<u64>(), trials in 2u64..1500, (m, n) in shape()) {
        let mc = MonteCarlo::new(trials, seed);
        let a = mc.with_execution(Execution::Sequential).estimate_lmax(m, n).unwrap();
        let b = mc.with_execution(Execution::Parallel).estimate_lmax(m, n).unwrap();
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}

/// Chi-square goodness of fit of `sample_uniform` against the uniform law on
/// `S_{m,n}`; returns the p-value.
fn uniformity_p_value(m: u32, n: u32, draws: u64) -> f64 {
    let cells = enumerate_words(m, n).unwrap().count();
    assert_eq!(multiset_count(m, n), cells.into());
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for i in 0..draws {
        *counts.entry(sample_uniform(m, n, &RandomSource::new(99, i)).letters().to_vec()).or_default() += 1;
    }
    assert_eq!(counts.len(), cells, "every word must be reachable");
    let expected = draws as f64 / cells as f64;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn sampler_is_uniform() {
    for (m, n) in [(2, 2), (1, 4), (2, 3)] {
        let p = uniformity_p_value(m, n, 120_000);
        assert!(p > 1e-6, "S_{{{m},{n}}}: chi-square p-value {p}");
    }
}

#[test]
fn tail_bounds_hold_for_progressions() {
    for (m, n) in [(1, 6), (2, 4), (3, 3)] {
        let fam = WordFamily::ArithmeticProgressions { n };
        let words: Vec<Word> = enumerate_words(m, n).unwrap().collect();
        for k in 1..=n {
            let hits = words.iter().filter(|w| fam.longest_in(w) >= k).count();
            let p = BigRational::new(hits.into(), words.len().into());
            assert!(p <= tail_bound(&fam, m, k).unwrap(), "m={m} n={n} k={k}");
        }
    }
}
