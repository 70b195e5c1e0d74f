//! Independent oracles: closed-form discounts with integral tail bounds and
//! reward streams generated from their run lengths.

#![allow(dead_code)]

use horizonlab::{DiscountSpec, RewardSpec};

#[derive(Clone, Debug)]
pub enum OracleDisc {
    Geometric(f64),
    Quadratic,
    Power(f64),
    Harmonic,
    StepLog,
}

impl OracleDisc {
    pub fn spec(&self) -> DiscountSpec {
        match *self {
            OracleDisc::Geometric(g) => DiscountSpec::geometric(g).unwrap(),
            OracleDisc::Quadratic => DiscountSpec::quadratic(),
            OracleDisc::Power(e) => DiscountSpec::power(e).unwrap(),
            OracleDisc::Harmonic => DiscountSpec::harmonic_like(),
            OracleDisc::StepLog => DiscountSpec::step_log(),
        }
    }

    pub fn gamma(&self, i: u64) -> f64 {
        let x = i as f64;
        match *self {
            OracleDisc::Geometric(g) => g.powf(x),
            OracleDisc::Quadratic => 1.0 / (x * (x + 1.0)),
            OracleDisc::Power(e) => x.powf(-(1.0 + e)),
            OracleDisc::Harmonic => {
                let y = x.max(2.0);
                1.0 / (y * y.ln() * y.ln())
            }
            OracleDisc::StepLog => {
                let j = 64 - (i - 1).leading_zeros() as i32;
                0.25f64.powi(j)
            }
        }
    }

    /// Bounds on `Σ_{i≥n} γ_i`, from integrals or block sums.
    pub fn tail(&self, n: u64) -> (f64, f64) {
        let x = n as f64;
        let (lo, hi) = match *self {
            OracleDisc::Geometric(g) => {
                let t = g.powf(x) / (1.0 - g);
                (t, t)
            }
            OracleDisc::Quadratic => (1.0 / x, 1.0 / x),
            OracleDisc::Power(e) => {
                let integral = x.powf(-e) / e;
                (integral, integral + x.powf(-(1.0 + e)))
            }
            OracleDisc::Harmonic => {
                assert!(n >= 3);
                let integral = 1.0 / x.ln();
                (integral, integral + self.gamma(n))
            }
            OracleDisc::StepLog => {
                let j = 64 - (n - 1).leading_zeros() as i32;
                let t = (2f64.powi(j) - x + 1.0) * 0.25f64.powi(j) + 2f64.powi(-j - 1);
                (t, t)
            }
        };
        (lo * (1.0 - 1e-12), hi * (1.0 + 1e-12))
    }
}

#[derive(Clone, Debug)]
pub enum OracleReward {
    Constant(f64),
    Periodic(Vec<f64>),
    Linear,
    Exponential,
    Explicit(Vec<u64>),
}

impl OracleReward {
    pub fn spec(&self) -> RewardSpec {
        match self {
            OracleReward::Constant(a) => RewardSpec::constant(*a).unwrap(),
            OracleReward::Periodic(p) => RewardSpec::periodic(p.clone()).unwrap(),
            OracleReward::Linear => RewardSpec::LinearRuns,
            OracleReward::Exponential => RewardSpec::ExponentialRuns,
            OracleReward::Explicit(p) => RewardSpec::change_points_list(p.clone()).unwrap(),
        }
    }

    /// `r_1, r_2, ...`
    pub fn stream(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        let runs = |ones: Box<dyn Fn(u64) -> u64>, zeros: Box<dyn Fn(u64) -> u64>| {
            Box::new((1u64..).flat_map(move |n| {
                std::iter::repeat_n(1.0, ones(n) as usize).chain(std::iter::repeat_n(0.0, zeros(n) as usize))
            })) as Box<dyn Iterator<Item = f64>>
        };
        match self {
            OracleReward::Constant(a) => Box::new(std::iter::repeat(*a)),
            OracleReward::Periodic(p) => Box::new(p.iter().copied().cycle()),
            OracleReward::Linear => runs(Box::new(|n| 2 * n - 1), Box::new(|n| 2 * n)),
            OracleReward::Exponential => runs(Box::new(|n| 1 << (2 * n - 2)), Box::new(|n| 1 << (2 * n - 1))),
            OracleReward::Explicit(p) => Box::new((1u64..).map(move |i| {
                let inside = p.chunks(2).any(|c| c[0] <= i && i < c[1]);
                if inside {
                    1.0
                } else {
                    0.0
                }
            })),
        }
    }
}

/// Enclosure of `V_{kγ}` from `n` explicit terms and tail bounds.
pub fn brute_v(r: &OracleReward, d: &OracleDisc, k: u64, n: u64) -> (f64, f64) {
    let (mut s, mut c_s) = (0.0f64, 0.0f64);
    let (mut g, mut c_g) = (0.0f64, 0.0f64);
    for (i, ri) in (k..k + n).zip(r.stream().skip(k as usize - 1)) {
        let w = d.gamma(i);
        kahan(&mut s, &mut c_s, w * ri);
        kahan(&mut g, &mut c_g, w);
    }
    let (tl, th) = d.tail(k + n);
    let slack = 1e-12;
    let lo = s / (g + th) * (1.0 - slack);
    let hi = (s + th) / (g + tl) * (1.0 + slack);
    (lo.max(0.0), hi.min(1.0))
}

fn kahan(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// `#{i ≤ m : r_i = 1}` by walking the stream.
pub fn brute_ones(r: &OracleReward, m: u64) -> u64 {
    r.stream().take(m as usize).filter(|&x| x == 1.0).count() as u64
}

// Random specs for the identity suites.

use horizonlab::DiscountFamily;
use rand::Rng;

pub fn random_binary_reward(rng: &mut impl Rng) -> RewardSpec {
    match rng.gen_range(0..4) {
        0 => RewardSpec::LinearRuns,
        1 => RewardSpec::ExponentialRuns,
        2 => RewardSpec::change_points_list((1..=2000).collect()).unwrap(),
        _ => {
            let mut points = Vec::new();
            let mut at = rng.gen_range(1..5u64);
            for _ in 0..rng.gen_range(1..10) {
                points.push(at);
                at += rng.gen_range(1..1000u64);
                points.push(at);
                at += rng.gen_range(1..1000u64);
            }
            RewardSpec::change_points_list(points).unwrap()
        }
    }
}

pub fn random_reward(rng: &mut impl Rng) -> RewardSpec {
    match rng.gen_range(0..6) {
        0 => RewardSpec::constant(rng.gen_range(0.0..=1.0)).unwrap(),
        1 => {
            let len = rng.gen_range(1..9);
            RewardSpec::periodic((0..len).map(|_| rng.gen_range(0.0..=1.0)).collect()).unwrap()
        }
        _ => random_binary_reward(rng),
    }
}

pub fn random_discount(rng: &mut impl Rng) -> DiscountSpec {
    match rng.gen_range(0..8) {
        0 => DiscountSpec::geometric(rng.gen_range(0.3..0.99)).unwrap(),
        1 => DiscountSpec::quadratic(),
        2 => DiscountSpec::power(rng.gen_range(0.2..2.0)).unwrap(),
        3 => DiscountSpec::harmonic_like(),
        4 => DiscountSpec::step_log(),
        5 => DiscountSpec::cosine_modulated(),
        6 => DiscountSpec::finite(rng.gen_range(10..100_000)).unwrap(),
        _ => DiscountSpec::alternating_zero(DiscountFamily::Geometric {
            g: rng.gen_range(0.5..0.95),
        })
        .unwrap(),
    }
}
