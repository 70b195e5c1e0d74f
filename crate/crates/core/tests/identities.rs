//! Property tests for the algebraic identities behind the limit results.

mod common;

use horizonlab::{construct_prop1_reward, disc_value, identities, DiscountFamily, DiscountSpec, Interval, RewardSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn binary_family() -> impl Strategy<Value = RewardSpec> {
    any::<u64>().prop_map(|s| common::random_binary_reward(&mut rng(s)))
}

fn any_discount() -> impl Strategy<Value = DiscountSpec> {
    any::<u64>().prop_map(|s| common::random_discount(&mut rng(s)))
}

fn monotone_discount() -> impl Strategy<Value = DiscountSpec> {
    any_discount().prop_filter("monotone", |g| g.documented_monotone() == Some(true))
}

/// `r_k = 1` iff `k_n ≤ k < m_n` for some `n`, from the change points alone.
fn in_some_run(r: &RewardSpec, k: u64) -> bool {
    (1..)
        .map_while(|n| r.change_points(n).ok())
        .take_while(|&(kn, _)| kn <= k)
        .any(|(kn, mn)| kn <= k && k < mn)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn definition1_membership(r in binary_family(), k in 1u64..5_000_000) {
        let expected = if in_some_run(&r, k) { 1.0 } else { 0.0 };
        prop_assert_eq!(r.reward_at(k).unwrap(), expected);
    }

    #[test]
    fn u_recurrence(s in any::<u64>(), m in 2u64..=100_000) {
        let r = common::random_reward(&mut rng(s));
        let res = identities::check_u_recurrence(&r, m);
        prop_assert!(res.is_ok(), "{:?}", res);
    }

    #[test]
    fn u_decomposition(s in any::<u64>(), a in 2u64..1_000_000, b in 2u64..1_000_000) {
        let r = common::random_reward(&mut rng(s));
        let (k, m) = (a.min(b), a.max(b));
        let res = identities::check_u_decomposition(&r, k, m);
        prop_assert!(res.is_ok(), "{:?}", res);
    }

    #[test]
    fn future_average_bound(r in binary_family(), a in 2u64..u64::MAX / 4, b in 2u64..u64::MAX / 4) {
        let (k, m) = (a.min(b), a.max(b));
        let res = identities::check_future_average_bound(&r, k, m);
        prop_assert!(res.is_ok(), "{:?}", res);
    }

    #[test]
    fn gamma_recurrence(g in any_discount(), k in 1u64..100_000_000) {
        let res = identities::check_gamma_recurrence(&g, k);
        prop_assert!(res.is_ok(), "{:?}", res);
    }

    #[test]
    fn delta_telescopes(g in any_discount(), k in 1u64..1_000_000, len in 1u64..300) {
        let res = identities::check_delta_telescopes(&g, k, len);
        prop_assert!(res.is_ok(), "{:?}", res);
    }

    #[test]
    fn monotone_tails_are_convex(g in monotone_discount(), k in 1u64..10_000_000) {
        let t = |i| g.gamma_tail(i).unwrap();
        let first = t(k) - t(k + 1);
        let second = t(k + 1) - t(k + 2);
        prop_assert!(first.hi() >= second.lo(), "{} at {}: {} < {}", g.label(), k, first, second);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn v_recurrence(s in any::<u64>(), k in 1u64..50_000) {
        let mut rng = rng(s);
        let r = common::random_reward(&mut rng);
        let g = common::random_discount(&mut rng);
        prop_assume!(g.gamma_tail(k + 1).unwrap().hi() > 0.0);
        let res = identities::check_v_recurrence(&r, &g, k);
        prop_assert!(res.is_ok(), "{:?}", res);
    }

    #[test]
    fn binary_sandwich(r in binary_family(), g in any_discount(), n in 1u64..30, frac in 0.0f64..=1.0) {
        let Ok((kn, mn)) = r.change_points(n) else {
            return Ok(());
        };
        let kn = kn.max(1);
        prop_assume!(g.gamma_tail(mn).unwrap().hi() > 0.0);
        let k = kn + ((mn - kn) as f64 * frac) as u64;
        let v = |i| disc_value(&r, &g, i, 1e-6).ok().map(|d| d.value);
        let (Some(top), Some(mid), Some(bottom)) = (v(kn), v(k), v(mn)) else {
            return Ok(());
        };
        let slack = 1e-9;
        prop_assert!(bottom.lo() - slack <= mid.hi() && mid.lo() <= top.hi() + slack,
            "{} / {}: {} ≤ {} ≤ {}", r.label(), g.label(), bottom, mid, top);
    }

    #[test]
    fn mass_conservation(r in binary_family(), g in any_discount(), big_n in 1u64..12) {
        let Ok(stats) = (1..=big_n).map(|n| r.run_stats(&g, n)).collect::<Result<Vec<_>, _>>() else {
            return Ok(());
        };
        let total: Interval = stats.iter().map(|s| s.mass_one + s.mass_zero).sum();
        let first = stats[0].k_n.max(1);
        let end = match r.change_points(big_n + 1) {
            Ok((k, _)) => g.gamma_tail(k).unwrap(),
            Err(_) => Interval::ZERO,
        };
        let expect = g.gamma_tail(first).unwrap() - end;
        prop_assert!(total.overlaps(&expect), "{} / {}: {} vs {}", r.label(), g.label(), total, expect);
    }

    #[test]
    fn scale_invariance(g in any_discount(), c in prop_oneof![Just(2.0), Just(0.125), 1e-6f64..1e6], k in 1u64..10_000) {
        let scaled = DiscountSpec::with_scale(g.family.clone(), c).unwrap();
        prop_assert_eq!(g.horizon_ratio(k).ok(), scaled.horizon_ratio(k).ok());
        prop_assert_eq!(g.quasi_horizon(k).ok(), scaled.quasi_horizon(k).ok());
        prop_assert_eq!(g.effective_horizon(k).ok(), scaled.effective_horizon(k).ok());
        let r = RewardSpec::LinearRuns;
        let v = |d: &DiscountSpec| disc_value(&r, d, k, 1e-6).ok().map(|x| x.value);
        prop_assert_eq!(v(&g), v(&scaled));
    }
}

#[test]
fn linear_runs_lengths() {
    let r = RewardSpec::LinearRuns;
    let g = DiscountSpec::quadratic();
    for n in 1..=1000 {
        let s = r.run_stats(&g, n).unwrap();
        assert_eq!((s.len_one, s.len_zero), (2 * n - 1, Some(2 * n)));
    }
}

#[test]
fn exponential_runs_lengths() {
    let r = RewardSpec::ExponentialRuns;
    let g = DiscountSpec::harmonic_like();
    for n in 1..=15 {
        let s = r.run_stats(&g, n).unwrap();
        assert_eq!((s.len_one, s.len_zero), (s.k_n, Some(s.m_n)));
    }
}

#[test]
fn step_log_ratio_drops_at_powers_of_two() {
    let g = DiscountSpec::step_log();
    for n in 1..=20u32 {
        let k = 1u64 << n;
        let ratio = g.gamma_enclosure(k + 1).unwrap() / g.gamma_enclosure(k).unwrap();
        assert!(ratio.contains(0.25), "n = {n}: {ratio}");
        let share = g.gamma_enclosure(k).unwrap() / g.gamma_tail(k).unwrap();
        assert!(share.hi() <= 2f64.powi(1 - n as i32), "n = {n}: {share}");
    }
}

#[test]
fn quadratic_horizons_exact() {
    let g = DiscountSpec::quadratic();
    for k in 1..=10_000u64 {
        let eh = g.effective_horizon(k).unwrap();
        assert_eq!((eh.lo, eh.hi), (k, k));
        assert!(g.quasi_horizon(k).unwrap().contains(k as f64 + 1.0));
    }
}

#[test]
fn constructions_ignore_scale() {
    let base = construct_prop1_reward(&DiscountSpec::geometric(0.6).unwrap(), 4, 1 << 20).unwrap();
    for c in [1e-3, 7.0, 1e5] {
        let g = DiscountSpec::with_scale(DiscountFamily::Geometric { g: 0.6 }, c).unwrap();
        assert_eq!(construct_prop1_reward(&g, 4, 1 << 20).unwrap().runs, base.runs);
    }
}
