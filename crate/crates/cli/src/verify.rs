//! Golden checks for the worked examples and seeded identity suites.

use std::f64::consts::PI;

use horizonlab::{
    avg_value, disc_value, dyadic_schedule, identities, limit_scan, subsequence_values, verify_u_eq_v,
    verify_u_implies_v, DiscountFamily, DiscountSpec, Interval, Quantity, RewardSpec, RunPoint, Scale, ScanOptions,
    Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::output::{csv, json as pretty, text_table, Format, Sink};
use crate::{CliError, Status, VerifyArgs};

pub const DEFAULT_SEED: u64 = 20_240_601;
const IDENTITY_TRIALS: usize = 2_000;

#[derive(Serialize)]
struct Outcome {
    group: String,
    name: String,
    pass: bool,
    detail: String,
}

type Check = horizonlab::Result<(bool, String)>;

struct Suite {
    group: String,
    outcomes: Vec<Outcome>,
}

impl Suite {
    fn new(group: impl Into<String>) -> Self {
        Suite {
            group: group.into(),
            outcomes: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, f: impl FnOnce() -> Check) {
        let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.outcomes.push(Outcome {
            group: self.group.clone(),
            name: name.into(),
            pass,
            detail,
        });
    }
}

fn geo(g: f64) -> DiscountSpec {
    DiscountSpec::geometric(g).expect("valid ratio")
}

fn band_in(est: &horizonlab::LimitEstimate, target: Interval) -> (bool, String) {
    let b = est.band();
    (target.contains_interval(&b), format!("{} band {b}, target {target}", est.verdict_label()))
}

fn example1(s: &mut Suite) {
    s.check("constant reward keeps its value", || {
        let r = RewardSpec::constant(0.7)?;
        let u = avg_value(&r, 100)?;
        let v = disc_value(&r, &DiscountSpec::power(1.0)?, 10, 1e-9)?.value;
        Ok(((u - 0.7).abs() < 1e-12 && v.contains(0.7) && v.width() < 1e-12, format!("U = {u}, V = {v}")))
    });
    s.check("linear runs start 1 0 0 1 1 1", || {
        let r = RewardSpec::LinearRuns;
        let got: Vec<f64> = (1..=6).map(|k| r.reward_at(k)).collect::<Result<_, _>>()?;
        Ok((got == [1.0, 0.0, 0.0, 1.0, 1.0, 1.0], format!("{got:?}")))
    });
    s.check("second run is [4, 7) with mass 3/28", || {
        let st = RewardSpec::LinearRuns.run_stats(&DiscountSpec::quadratic(), 2)?;
        Ok((
            (st.k_n, st.m_n) == (4, 7) && st.mass_one.contains(3.0 / 28.0),
            format!("({}, {}), a_2 = {}", st.k_n, st.m_n, st.mass_one),
        ))
    });
    s.check("run lengths 2n−1 and 2n", || {
        let q = DiscountSpec::quadratic();
        let ok = (1..=1000).all(|n| {
            RewardSpec::LinearRuns
                .run_stats(&q, n)
                .map(|st| (st.len_one, st.len_zero) == (2 * n - 1, Some(2 * n)))
                .unwrap_or(false)
        });
        Ok((ok, "n ≤ 1000".into()))
    });
    s.check("quadratic row at k = 10", || {
        let q = DiscountSpec::quadratic();
        let eh = q.effective_horizon(10)?;
        let ok = q.gamma_tail(10)?.contains(0.1)
            && eh.is_exact()
            && eh.lo == 10
            && q.quasi_horizon(10)?.contains(11.0)
            && q.horizon_ratio(10)?.contains(10.0 / 11.0);
        Ok((ok, format!("Γ = {}, eh = {eh}", q.gamma_tail(10)?)))
    });
    s.check("U_(1,10^6) near 1/2", || {
        let u = avg_value(&RewardSpec::LinearRuns, 1_000_000)?;
        Ok(((u - 0.5).abs() <= 1e-2, format!("{u}")))
    });
    s.check("V_(10^4) near 1/2", || {
        let v = disc_value(&RewardSpec::LinearRuns, &DiscountSpec::quadratic(), 10_000, 1e-3)?.value;
        Ok((Interval::new(0.47, 0.53).contains_interval(&v), format!("{v}")))
    });
    s.check("U and V scans converge to 1/2", || {
        let opts = ScanOptions::new(1e-2);
        let sched = dyadic_schedule(20);
        let q = DiscountSpec::quadratic();
        let u = limit_scan(&RewardSpec::LinearRuns, None, Quantity::U, &sched, &opts)?;
        let v = limit_scan(&RewardSpec::LinearRuns, Some(&q), Quantity::V, &sched, &opts)?;
        let target = Interval::new(0.49, 0.51);
        let conv = |e: &horizonlab::LimitEstimate| matches!(e.verdict, Verdict::Converged { .. });
        let ((bu, du), (bv, dv)) = (band_in(&u, target), band_in(&v, target));
        Ok((conv(&u) && conv(&v) && bu && bv, format!("U {du}; V {dv}")))
    });
    s.check("U implies V harness consistent", || {
        let rep = verify_u_implies_v(&RewardSpec::LinearRuns, &DiscountSpec::quadratic(), &Scale::default(), 1e-2);
        Ok((rep.consistent, format!("premises {:?}", rep.premise_status)))
    });
}

fn example2(s: &mut Suite) {
    s.check("V at odd/even k is 1/(1+g) and g/(1+g)", || {
        let r = RewardSpec::alternating();
        let mut worst = 0.0f64;
        for g in [0.3, 0.5, 0.9] {
            for k in 1..=50u64 {
                let want = if k % 2 == 1 { 1.0 / (1.0 + g) } else { g / (1.0 + g) };
                let v = disc_value(&r, &geo(g), k, 1e-9)?.value;
                worst = worst.max((v.lo() - want).abs()).max((v.hi() - want).abs());
            }
        }
        Ok((worst <= 1e-6, format!("worst error {worst:.1e}")))
    });
    s.check("V oscillates between 1/3 and 2/3", || {
        let sched: Vec<u64> = (1..=50).collect();
        let est = limit_scan(&RewardSpec::alternating(), Some(&geo(0.5)), Quantity::V, &sched, &ScanOptions::new(1e-3))?;
        let ok = match est.verdict {
            Verdict::Oscillating { alpha, beta } => (alpha - 1.0 / 3.0).abs() < 1e-3 && (beta - 2.0 / 3.0).abs() < 1e-3,
            _ => false,
        };
        Ok((ok, format!("{:?}", est.verdict)))
    });
    s.check("U implies V: premise fails, no contradiction", || {
        let rep = verify_u_implies_v(&RewardSpec::alternating(), &geo(0.5), &Scale::default(), 1e-2);
        Ok((rep.consistent, format!("premises {:?}", rep.premise_status)))
    });
}

fn example3(s: &mut Suite) {
    let r = RewardSpec::LinearRuns;
    s.check("V at k_n tends to 1", || {
        let v = subsequence_values(&r, &geo(0.5), RunPoint::AtKn, 5..=20, 1e-6)?;
        let rising = v.windows(2).all(|w| w[1].mid() >= w[0].mid() - 1e-12);
        let last = v[v.len() - 1];
        Ok((rising && last.lo() >= 1.0 - 1e-3, format!("n = 20: {last}")))
    });
    s.check("V at m_n tends to 0", || {
        let v = subsequence_values(&r, &geo(0.5), RunPoint::AtMn, 5..=20, 1e-6)?;
        let last = v[v.len() - 1];
        Ok((last.hi() <= 1e-3, format!("n = 20: {last}")))
    });
    s.check("run-mass ratios tend to 0 and 1", || {
        let p = r.lemma2_limits(&geo(0.5), 30)?;
        Ok((
            p.alpha.estimate < 1e-3 && p.beta.estimate > 1.0 - 1e-3,
            format!("alpha {}, beta {}", p.alpha.estimate, p.beta.estimate),
        ))
    });
}

fn example4(s: &mut Suite) {
    let r = RewardSpec::ExponentialRuns;
    s.check("third run is [16, 32) and r_4 = 1", || {
        Ok((r.change_points(3)? == (16, 32) && r.reward_at(4)? == 1.0, format!("{:?}", r.change_points(3)?)))
    });
    s.check("U is exactly 1/3 before k_n and 2/3 before m_n − 1", || {
        let mut ok = true;
        for n in 2..=10 {
            let (k, m) = r.change_points(n)?;
            let s1 = r.ones_in(1, k - 1).unwrap_or_default();
            let s2 = r.ones_in(1, m - 2).unwrap_or_default();
            ok &= 3 * s1 == (k - 1) as u128 && 3 * s2 == 2 * (m - 2) as u128;
        }
        Ok((ok, "n = 2..10".into()))
    });
    s.check("U oscillates between 1/3 and 2/3", || {
        let est = limit_scan(&r, None, Quantity::U, &dyadic_schedule(40), &ScanOptions::new(1e-2))?;
        let ok = match est.verdict {
            Verdict::Oscillating { alpha, beta } => (alpha - 1.0 / 3.0).abs() < 1e-2 && (beta - 2.0 / 3.0).abs() < 1e-2,
            _ => false,
        };
        Ok((ok, format!("{:?}", est.verdict)))
    });
    s.check("harmonic run masses balance as a_n/b_n ≈ n/(n−1)", || {
        // Γ_k ≈ 1/ln k gives a_n ≈ 1/((2n−2)(2n−1)ln 2) and b_n ≈ 1/((2n−1)2n ln 2).
        let h = DiscountSpec::harmonic_like();
        let ratio = |n: u64| -> horizonlab::Result<f64> {
            let st = r.run_stats(&h, n)?;
            Ok(st.mass_one.mid() / st.mass_zero.mid())
        };
        let r5 = ratio(5)?;
        let r12 = ratio(12)?;
        Ok((
            (r5 / 1.25 - 1.0).abs() < 0.01 && r12 - 1.0 <= 0.1,
            format!("a_5/b_5 = {r5:.4}, a_12/b_12 = {r12:.4}"),
        ))
    });
    s.check("harmonic V band near 1/2", || {
        let est = limit_scan(&r, Some(&DiscountSpec::harmonic_like()), Quantity::V, &dyadic_schedule(22), &ScanOptions::new(0.1))?;
        Ok(band_in(&est, Interval::new(0.45, 0.55)))
    });
}

fn example5(s: &mut Suite) {
    let az = || DiscountSpec::alternating_zero(DiscountFamily::Geometric { g: 0.5 });
    s.check("alternating-zero discount gives V = 0", || {
        let g = az()?;
        let r = RewardSpec::alternating();
        let mut ok = true;
        for k in 1..=200 {
            ok &= disc_value(&r, &g, k, 1e-9)?.value == Interval::ZERO;
        }
        Ok((ok, "k ≤ 200".into()))
    });
    s.check("U_(1,10^5) near 1/2", || {
        let u = avg_value(&RewardSpec::alternating(), 100_000)?;
        Ok(((u - 0.5).abs() <= 1e-3, format!("{u}")))
    });
    s.check("both discounts are flagged non-monotone", || {
        let a = az()?.check_monotone(10_000)?;
        let c = DiscountSpec::cosine_modulated().check_monotone(10_000)?;
        Ok((!a.monotone && !c.monotone, format!("first violations {:?}, {:?}", a.first_violation, c.first_violation)))
    });
    s.check("U = V harness reports the expected counterexample", || {
        let rep = verify_u_eq_v(&RewardSpec::alternating(), &az()?, &Scale::default(), 1e-2);
        Ok((rep.consistent && rep.expected_counterexample, format!("premises {:?}", rep.premise_status)))
    });
    s.check("cosine V band within 0.02 of 1/2 − 1/π", || {
        let target = 0.5 - 1.0 / PI;
        let est = limit_scan(
            &RewardSpec::LinearRuns,
            Some(&DiscountSpec::cosine_modulated()),
            Quantity::V,
            &dyadic_schedule(20),
            &ScanOptions::new(2e-2),
        )?;
        let (ok, detail) = band_in(&est, Interval::new(target - 2e-2, target + 2e-2));
        // Averaging 2 + cos over half a wavelength gives (1 − 1/π)/2 instead.
        Ok((ok, format!("{detail}; run-mass limit (1 − 1/π)/2 = {:.5}", 0.5 - 0.5 / PI)))
    });
    s.check("cosine U band near 1/2", || {
        let est = limit_scan(&RewardSpec::LinearRuns, None, Quantity::U, &dyadic_schedule(20), &ScanOptions::new(1e-2))?;
        Ok(band_in(&est, Interval::new(0.49, 0.51)))
    });
}

fn example6(s: &mut Suite) {
    let patched = || DiscountSpec::build_patched(&[1, 2]);
    s.check("patched discount is monotone", || {
        let m = patched()?.check_monotone(1 << 16)?;
        Ok((m.monotone, format!("checked to {}", m.checked_up_to)))
    });
    s.check("horizon ratio swings both ways", || {
        let g = patched()?;
        let end = match &g.family {
            DiscountFamily::Patched { segments } => segments.last().map(|s| s.start).unwrap_or(1),
            _ => 1,
        };
        let grid: Vec<u64> = (1..=end.saturating_mul(4).max(64)).collect();
        let d = g.growth_diagnostic(&grid)?;
        Ok((d.sup_up > 2.0 && d.sup_down > 2.0, format!("sup kγ/Γ = {}, sup Γ/(kγ) = {}", d.sup_up, d.sup_down)))
    });
    s.check("U = V harness consistent", || {
        let rep = verify_u_eq_v(&RewardSpec::LinearRuns, &patched()?, &Scale::default(), 1e-2);
        Ok((rep.consistent, format!("premises {:?}", rep.premise_status)))
    });
}

fn random_reward(rng: &mut ChaCha8Rng, binary_only: bool) -> RewardSpec {
    match rng.gen_range(if binary_only { 2..5 } else { 0..5 }) {
        0 => RewardSpec::Constant { alpha: rng.gen_range(0.0..=1.0) },
        1 => RewardSpec::Periodic {
            pattern: (0..rng.gen_range(1..8)).map(|_| rng.gen_range(0.0..=1.0)).collect(),
        },
        2 => RewardSpec::LinearRuns,
        3 => RewardSpec::ExponentialRuns,
        _ => {
            let mut points = Vec::new();
            let mut at = rng.gen_range(1..5u64);
            for _ in 0..rng.gen_range(1..10) {
                points.push(at);
                at += rng.gen_range(1..1000u64);
                points.push(at);
                at += rng.gen_range(1..1000u64);
            }
            RewardSpec::ExplicitChangePoints(points)
        }
    }
}

fn random_discount(rng: &mut ChaCha8Rng) -> DiscountFamily {
    match rng.gen_range(0..7) {
        0 => DiscountFamily::Geometric { g: rng.gen_range(0.3..0.99) },
        1 => DiscountFamily::Quadratic,
        2 => DiscountFamily::Power { eps: rng.gen_range(0.2..2.0) },
        3 => DiscountFamily::HarmonicLike,
        4 => DiscountFamily::StepLog,
        5 => DiscountFamily::CosineModulated,
        _ => DiscountFamily::Finite { m: rng.gen_range(10..100_000) },
    }
}

fn identity_suites(s: &mut Suite, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = |name: &str, trial: &mut dyn FnMut(&mut ChaCha8Rng) -> horizonlab::Result<()>| {
        s.check(name, || {
            for i in 0..IDENTITY_TRIALS {
                if let Err(e) = trial(&mut rng) {
                    return Ok((false, format!("trial {i}: {e}")));
                }
            }
            Ok((true, format!("{IDENTITY_TRIALS} trials")))
        });
    };
    run("U recurrence", &mut |rng| {
        let r = random_reward(rng, false);
        identities::check_u_recurrence(&r, rng.gen_range(2..=100_000))
    });
    run("U decomposition", &mut |rng| {
        let r = random_reward(rng, false);
        let m = rng.gen_range(2..=1_000_000);
        identities::check_u_decomposition(&r, rng.gen_range(2..=m), m)
    });
    run("future average bound", &mut |rng| {
        let r = random_reward(rng, true);
        let m = rng.gen_range(2..=1_000_000_000);
        identities::check_future_average_bound(&r, rng.gen_range(2..=m), m)
    });
    run("Γ recurrence", &mut |rng| {
        let g = DiscountSpec::new(random_discount(rng))?;
        identities::check_gamma_recurrence(&g, rng.gen_range(1..=1_000_000))
    });
    run("δ telescopes", &mut |rng| {
        let g = DiscountSpec::new(random_discount(rng))?;
        identities::check_delta_telescopes(&g, rng.gen_range(1..=100_000), rng.gen_range(1..=200))
    });
}

pub fn run(a: &VerifyArgs, format: Format, sink: &Sink) -> Result<Status, CliError> {
    let examples: Vec<u8> = if a.all { (1..=6).collect() } else { a.example.into_iter().collect() };
    let mut outcomes = Vec::new();
    for e in examples {
        let mut s = Suite::new(format!("example {e}"));
        match e {
            1 => example1(&mut s),
            2 => example2(&mut s),
            3 => example3(&mut s),
            4 => example4(&mut s),
            5 => example5(&mut s),
            _ => example6(&mut s),
        }
        outcomes.extend(s.outcomes);
    }
    if a.all {
        let mut s = Suite::new(format!("identities (seed {})", a.seed));
        identity_suites(&mut s, a.seed);
        outcomes.extend(s.outcomes);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    let text = match format {
        Format::Json => pretty(&json!({ "seed": a.seed, "failed": failed, "checks": outcomes })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| vec![o.group.clone(), o.name.clone(), o.pass.to_string(), o.detail.clone()])
                .collect();
            csv(&["group", "check", "pass", "detail"], &rows)?
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| {
                    let status = if o.pass { "PASS" } else { "FAIL" };
                    vec![status.into(), o.group.clone(), o.name.clone(), o.detail.clone()]
                })
                .collect();
            format!(
                "{}\n\n{} of {} checks passed",
                text_table(&["status", "group", "check", "detail"], &rows),
                outcomes.len() - failed,
                outcomes.len()
            )
        }
    };
    sink.emit(&text)?;
    Ok(if failed == 0 { Status::Ok } else { Status::VerifyFailed })
}
