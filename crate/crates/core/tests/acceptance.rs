//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{OracleDisc, OracleReward};
use horizonlab::{
    avg_value, builtin_corpus, identities, construct_prop1_reward, construct_prop2_reward, disc_value, dyadic_schedule,
    limit_scan, subsequence_values, verify_u_eq_v, verify_u_implies_v, verify_v_implies_u, DiscountFamily,
    DiscountSpec, Error, IntegerInterval, Interval, Quantity, RewardSpec, RunPoint, Scale, ScanOptions, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const SEED: u64 = 0x5eed_2024;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(t: Duration, limit_s: f64) -> Result<(), String> {
    ensure(t.as_secs_f64() < limit_s, || format!("took {:.2}s, budget {limit_s}s", t.as_secs_f64()))
}

/// `x` contains `expected` and lies within 8 ulp of it.
fn ulp_exact(what: &str, x: Interval, expected: f64) -> Result<(), String> {
    let slack = Interval::around(expected, 8);
    ensure(x.contains(expected) && slack.contains_interval(&x), || format!("{what} = {x}, expected {expected}"))
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let geo = DiscountSpec::geometric(0.5).unwrap();
    let quad = DiscountSpec::quadratic();
    let fin = DiscountSpec::finite(100).unwrap();
    for k in [1u64, 10, 100, 1000] {
        let kf = k as f64;
        ulp_exact(&format!("quadratic Γ_{k}"), quad.gamma_tail(k).unwrap(), 1.0 / kf)?;
        ensure(quad.effective_horizon(k).unwrap() == IntegerInterval::exact(k), || {
            format!("quadratic eh_{k} = {}", quad.effective_horizon(k).unwrap())
        })?;
        ulp_exact(&format!("quadratic quasi_{k}"), quad.quasi_horizon(k).unwrap(), kf + 1.0)?;
        ulp_exact(&format!("quadratic ratio_{k}"), quad.horizon_ratio(k).unwrap(), kf / (kf + 1.0))?;

        ulp_exact(&format!("geometric Γ_{k}"), geo.gamma_tail(k).unwrap(), 2.0 * 0.5f64.powi(k as i32))?;
        ensure(geo.effective_horizon(k).unwrap() == IntegerInterval::exact(1), || {
            format!("geometric eh_{k} = {}", geo.effective_horizon(k).unwrap())
        })?;
        ulp_exact(&format!("geometric quasi_{k}"), geo.quasi_horizon(k).unwrap(), 2.0)?;
        ulp_exact(&format!("geometric ratio_{k}"), geo.horizon_ratio(k).unwrap(), kf / 2.0)?;

        // 101 − k up to the horizon, zero beyond it.
        ulp_exact(&format!("finite Γ_{k}"), fin.gamma_tail(k).unwrap(), (101.0 - kf).max(0.0))?;
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, 1.0)?;
    Ok(format!("12 rows exact in {:.3}s", elapsed.as_secs_f64()))
}

fn alternating_closed_forms() -> Outcome {
    let start = Instant::now();
    let r = RewardSpec::alternating();
    let mut worst = 0.0f64;
    for g in [0.3, 0.5, 0.9] {
        let d = DiscountSpec::geometric(g).unwrap();
        for k in 1..=50u64 {
            let expected = if k % 2 == 1 { 1.0 / (1.0 + g) } else { g / (1.0 + g) };
            let v = disc_value(&r, &d, k, 1e-9).map_err(|e| format!("g = {g}, k = {k}: {e}"))?.value;
            let err = (v.lo() - expected).abs().max((v.hi() - expected).abs());
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("g = {g}, k = {k}: V = {v}, expected {expected}"))?;
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, 1.0)?;
    Ok(format!("150 values, worst error {worst:.1e}, {:.3}s", elapsed.as_secs_f64()))
}

fn converged_inside(name: &str, est: &horizonlab::LimitEstimate, target: Interval) -> Result<(), String> {
    let band = est.band();
    ensure(matches!(est.verdict, Verdict::Converged { .. }) && target.contains_interval(&band), || {
        format!("{name}: verdict {}, band {band}, target {target}", est.verdict_label())
    })
}

fn linear_runs_quadratic() -> Outcome {
    let start = Instant::now();
    let sched = dyadic_schedule(20);
    let opts = ScanOptions::new(1e-2);
    let q = DiscountSpec::quadratic();
    let target = Interval::new(0.5 - 1e-2, 0.5 + 1e-2);
    let v = limit_scan(&RewardSpec::LinearRuns, Some(&q), Quantity::V, &sched, &opts).map_err(|e| e.to_string())?;
    converged_inside("V", &v, target)?;
    let u = limit_scan(&RewardSpec::LinearRuns, None, Quantity::U, &sched, &opts).map_err(|e| e.to_string())?;
    converged_inside("U", &u, target)?;
    let elapsed = start.elapsed();
    within_budget(elapsed, 30.0)?;
    Ok(format!(
        "V band {}, U band {} up to 2^20, {:.2}s",
        v.band(),
        u.band(),
        elapsed.as_secs_f64()
    ))
}

fn linear_runs_geometric() -> Outcome {
    let g = DiscountSpec::geometric(0.5).unwrap();
    let r = RewardSpec::LinearRuns;
    let at = |p| subsequence_values(&r, &g, p, 20..=20, 1e-6).map_err(|e| e.to_string());
    let hi = at(RunPoint::AtKn)?[0];
    let lo = at(RunPoint::AtMn)?[0];
    ensure(hi.lo() >= 1.0 - 1e-3, || format!("V at k_20 = {hi}"))?;
    ensure(lo.hi() <= 1e-3, || format!("V at m_20 = {lo}"))?;
    Ok(format!("V(k_20) = {hi}, V(m_20) = {lo}"))
}

fn exponential_runs() -> Outcome {
    let r = RewardSpec::ExponentialRuns;
    let oracle = OracleReward::Exponential;
    let ones = |m: u64| r.ones_in(1, m).unwrap();
    for n in 2..=10u64 {
        let (k, m) = r.change_points(n).unwrap();
        // Exact rationals: 3·S = len and 3·S = 2·len.
        let (s1, l1) = (ones(k - 1), (k - 1) as u128);
        ensure(3 * s1 == l1, || format!("n = {n}: U_(1,k_n−1) = {s1}/{l1}"))?;
        let (s2, l2) = (ones(m - 2), (m - 2) as u128);
        ensure(3 * s2 == 2 * l2, || format!("n = {n}: U_(1,m_n−2) = {s2}/{l2}"))?;
        ensure(common::brute_ones(&oracle, m - 2) as u128 == s2, || format!("n = {n}: run counts disagree"))?;
    }
    let seqs = r.lemma1_limits(10).map_err(|e| e.to_string())?;
    for (n, (a, b)) in seqs.alpha_seq.iter().zip(&seqs.beta_seq).enumerate().skip(1) {
        ensure(a.contains(1.0 / 3.0) && b.contains(2.0 / 3.0), || format!("run {}: {a}, {b}", n + 1))?;
    }

    let h = DiscountSpec::harmonic_like();
    let est = limit_scan(&r, Some(&h), Quantity::V, &dyadic_schedule(22), &ScanOptions::new(0.1))
        .map_err(|e| e.to_string())?;
    let band = est.band();
    ensure(Interval::new(0.45, 0.55).contains_interval(&band), || {
        format!("harmonic V band {band} ({})", est.verdict_label())
    })?;
    Ok(format!("1/3 and 2/3 exact for n = 2..10; harmonic V band {band} up to k = 2^22"))
}

fn example5() -> Outcome {
    let r = RewardSpec::alternating();
    let az = DiscountSpec::alternating_zero(DiscountFamily::Geometric { g: 0.5 }).unwrap();
    let mut ks: Vec<u64> = (1..=2000).collect();
    ks.extend(dyadic_schedule(40));
    ks.extend(dyadic_schedule(40).iter().map(|k| k + 1));
    for &k in &ks {
        let v = disc_value(&r, &az, k, 1e-9).map_err(|e| format!("k = {k}: {e}"))?.value;
        ensure(v == Interval::ZERO, || format!("alternating-zero V_{k} = {v}"))?;
    }
    let u_avg = avg_value(&r, 100_000).map_err(|e| e.to_string())?;
    ensure((u_avg - 0.5).abs() <= 1e-3, || format!("U_(1,1e5) = {u_avg}"))?;

    let target = 0.5 - 1.0 / std::f64::consts::PI;
    let c = DiscountSpec::cosine_modulated();
    let sched = dyadic_schedule(20);
    let v = limit_scan(&RewardSpec::LinearRuns, Some(&c), Quantity::V, &sched, &ScanOptions::new(2e-2))
        .map_err(|e| e.to_string())?;
    let vb = v.band();
    ensure(Interval::new(target - 2e-2, target + 2e-2).contains_interval(&vb), || {
        // Averaging 2 + cos over half a wavelength gives mass ratio (1 − 1/π)/2.
        let derived = 0.5 - 0.5 / std::f64::consts::PI;
        format!(
            "cosine V band {vb} ({}), target {target:.5}; band contains the run-mass limit {derived:.5}: {}",
            v.verdict_label(),
            vb.inflate(1e-3).contains(derived)
        )
    })?;
    let u = limit_scan(&RewardSpec::LinearRuns, None, Quantity::U, &sched, &ScanOptions::new(1e-2))
        .map_err(|e| e.to_string())?;
    let ub = u.band();
    ensure(Interval::new(0.49, 0.51).contains_interval(&ub), || format!("U band {ub}"))?;
    Ok(format!("{} zero values; U_(1,1e5) = {u_avg:.6}; cosine V band {vb}; U band {ub}", ks.len()))
}

fn constructions() -> Outcome {
    let start = Instant::now();
    let failed = |c: &horizonlab::Construction| {
        c.checks
            .iter()
            .filter(|x| !x.holds)
            .map(|x| format!("{}: {}", x.name, x.detail))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let p1 = construct_prop1_reward(&DiscountSpec::geometric(0.5).unwrap(), 5, 10_000_000).map_err(|e| e.to_string())?;
    ensure(p1.runs.len() >= 5 && p1.all_hold(), || {
        format!("prop-1: {} runs, failing {}", p1.runs.len(), failed(&p1))
    })?;
    let p2 = construct_prop2_reward(&DiscountSpec::harmonic_like(), 4, 10_000_000).map_err(|e| e.to_string())?;
    ensure(p2.runs.len() >= 4 && p2.all_hold(), || {
        format!("prop-2: {} runs, failing {}", p2.runs.len(), failed(&p2))
    })?;
    let elapsed = start.elapsed();
    within_budget(elapsed, 60.0)?;
    Ok(format!(
        "prop-1 {} runs / {} checks, prop-2 {} runs / {} checks, {:.2}s",
        p1.runs.len(),
        p1.checks.len(),
        p2.runs.len(),
        p2.checks.len(),
        elapsed.as_secs_f64()
    ))
}

fn random_oracle_pair(rng: &mut impl Rng) -> (OracleReward, OracleDisc, u64) {
    let r = match rng.gen_range(0..5) {
        0 => OracleReward::Constant(rng.gen_range(0.0..=1.0)),
        1 => OracleReward::Periodic((0..rng.gen_range(1..7)).map(|_| rng.gen_range(0.0..=1.0)).collect()),
        2 => OracleReward::Linear,
        3 => OracleReward::Exponential,
        _ => {
            let mut p = Vec::new();
            let mut at = rng.gen_range(1..20u64);
            for _ in 0..rng.gen_range(1..8) {
                p.push(at);
                at += rng.gen_range(1..5000u64);
                p.push(at);
                at += rng.gen_range(1..5000u64);
            }
            OracleReward::Explicit(p)
        }
    };
    let (d, k_max) = match rng.gen_range(0..5) {
        0 => (OracleDisc::Geometric(rng.gen_range(0.5..0.99)), 300),
        1 => (OracleDisc::Quadratic, 5000),
        2 => (OracleDisc::Power(rng.gen_range(0.5..2.0)), 5000),
        3 => (OracleDisc::Harmonic, 5000),
        _ => (OracleDisc::StepLog, 5000),
    };
    (r, d, rng.gen_range(1..=k_max))
}

fn identity_suites() -> Outcome {
    const TRIALS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let fail = |e: Error| e.to_string();
    for _ in 0..TRIALS {
        let r = common::random_reward(&mut rng);
        let m = rng.gen_range(2..=100_000u64);
        identities::check_u_recurrence(&r, m).map_err(fail)?;
        let big_m = rng.gen_range(2..=1_000_000u64);
        identities::check_u_decomposition(&r, rng.gen_range(2..=big_m), big_m).map_err(fail)?;

        let b = common::random_binary_reward(&mut rng);
        let big_m = rng.gen_range(2..=1_000_000_000u64);
        identities::check_future_average_bound(&b, rng.gen_range(2..=big_m), big_m).map_err(fail)?;

        let g = common::random_discount(&mut rng);
        identities::check_gamma_recurrence(&g, rng.gen_range(1..=1_000_000)).map_err(fail)?;
        identities::check_delta_telescopes(&g, rng.gen_range(1..=100_000), rng.gen_range(1..=200)).map_err(fail)?;
    }

    const PAIRS: usize = 100;
    const TERMS: u64 = 10_000_000;
    let mut tight = 0;
    let mut inconclusive = 0;
    for _ in 0..PAIRS {
        let (r, d, k) = random_oracle_pair(&mut rng);
        let (lo, hi) = common::brute_v(&r, &d, k, TERMS);
        let got = match disc_value(&r.spec(), &d.spec(), k, 1e-6) {
            Ok(v) => v.value,
            Err(Error::Inconclusive { best, .. }) => {
                inconclusive += 1;
                best.clamp01()
            }
            Err(e) => return Err(format!("{r:?} / {d:?} at k = {k}: {e}")),
        };
        let oracle = Interval::new(lo, hi);
        ensure(got.overlaps(&oracle), || format!("{r:?} / {d:?} at k = {k}: {got} misses oracle {oracle}"))?;
        if oracle.width() <= 1e-9 {
            tight += 1;
            ensure(got.inflate(1e-9).contains(oracle.mid()), || {
                format!("{r:?} / {d:?} at k = {k}: oracle midpoint {} outside {got}", oracle.mid())
            })?;
        }
    }
    Ok(format!(
        "seed {SEED:#x}: 5 identities x {TRIALS} trials; V-oracle {PAIRS} pairs ({tight} tight, {inconclusive} at best effort)"
    ))
}

fn theorem_harness() -> Outcome {
    let scale = Scale::default();
    let mut bad = Vec::new();
    let mut total = 0;
    for e in builtin_corpus() {
        for rep in [
            verify_u_implies_v(&e.reward, &e.discount, &scale, 1e-2),
            verify_v_implies_u(&e.reward, &e.discount, &scale, 1e-2),
            verify_u_eq_v(&e.reward, &e.discount, &scale, 1e-2),
        ] {
            total += 1;
            if !rep.consistent {
                bad.push(format!("{:?} on {}", rep.theorem, e.name));
            }
        }
    }
    ensure(bad.is_empty(), || format!("inconsistent: {}", bad.join(", ")))?;
    Ok(format!("{total} reports, all consistent"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("table reproduction", table_reproduction),
        ("alternating closed forms", alternating_closed_forms),
        ("linear runs, quadratic", linear_runs_quadratic),
        ("linear runs, geometric subsequences", linear_runs_geometric),
        ("exponential runs", exponential_runs),
        ("alternating-zero and cosine", example5),
        ("proposition constructions", constructions),
        ("identity suites and V-oracle", identity_suites),
        ("theorem harness", theorem_harness),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
