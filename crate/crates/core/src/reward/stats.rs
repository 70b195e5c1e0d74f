//! Per-run lengths and discount masses, and the run-ratio sequences whose
//! limits give the liminf/limsup of average and discounted values.

use serde::Serialize;

use super::RewardSpec;
use crate::discount::DiscountSpec;
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    pub n: u64,
    pub k_n: u64,
    pub m_n: u64,
    /// `A_n = m_n − k_n`
    #[serde(rename = "A_n")]
    pub len_one: u64,
    /// `B_n = k_{n+1} − m_n`; `None` when zeros continue forever.
    #[serde(rename = "B_n")]
    pub len_zero: Option<u64>,
    /// `a_n = Γ_{k_n} − Γ_{m_n}`
    #[serde(rename = "a_n")]
    pub mass_one: Interval,
    /// `b_n = Γ_{m_n} − Γ_{k_{n+1}}`
    #[serde(rename = "b_n")]
    pub mass_zero: Interval,
}

/// Mean of the trailing quarter of a sequence, with a band covering its
/// spread and drift. Diagnostic only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitPrediction {
    pub estimate: f64,
    pub band: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequencePair {
    pub alpha_seq: Vec<Interval>,
    pub beta_seq: Vec<Interval>,
    pub alpha: LimitPrediction,
    pub beta: LimitPrediction,
}

pub(crate) fn predict(seq: &[Interval]) -> LimitPrediction {
    if seq.is_empty() {
        return LimitPrediction {
            estimate: f64::NAN,
            band: Interval::new(f64::NEG_INFINITY, f64::INFINITY),
        };
    }
    let w = seq.len().div_ceil(4);
    let window = &seq[seq.len() - w..];
    let mean = window.iter().map(|x| x.mid()).sum::<f64>() / w as f64;
    let lo = window.iter().map(|x| x.lo()).fold(f64::INFINITY, f64::min);
    let hi = window.iter().map(|x| x.hi()).fold(f64::NEG_INFINITY, f64::max);
    let drift = (window[w - 1].mid() - window[0].mid()).abs();
    LimitPrediction {
        estimate: mean,
        band: Interval::new(lo - drift, hi + drift),
    }
}

fn ratio(num: Interval, den: Interval) -> Interval {
    (num / den).clamp01()
}

impl RewardSpec {
    fn require_runs(&self) -> Result<super::Runs<'_>> {
        self.runs()
            .ok_or_else(|| Error::InvalidParameter(format!("{} is not a binary run sequence", self.label())))
    }

    /// Lengths and absolute discount masses of run `n`.
    pub fn run_stats(&self, disc: &DiscountSpec, n: u64) -> Result<RunStats> {
        let runs = self.require_runs()?;
        let (k, m) = self.change_points(n)?;
        let k1 = k.max(1);
        let next = runs.run(n + 1).map(|(k2, _)| k2);
        let t_k = disc.gamma_tail(k1)?;
        let t_m = disc.gamma_tail(m)?;
        let t_next = match next {
            Some(k2) => disc.gamma_tail(k2)?,
            None if runs.count().is_some() => Interval::ZERO,
            None => return Err(Error::Overflow(format!("run {} lies beyond u64 indices", n + 1))),
        };
        Ok(RunStats {
            n,
            k_n: k,
            m_n: m,
            len_one: m - k,
            len_zero: next.map(|k2| k2 - m),
            mass_one: (t_k - t_m).nonneg(),
            mass_zero: (t_m - t_next).nonneg(),
        })
    }

    /// `A_n/(A_n+B_n)` (→ liminf U) and `A_n/(B_{n−1}+A_n)` (→ limsup U),
    /// with `B_0 = 0`.
    pub fn lemma1_limits(&self, n_max: u64) -> Result<SequencePair> {
        let runs = self.require_runs()?;
        let mut alpha_seq = Vec::new();
        let mut beta_seq = Vec::new();
        let mut prev_b = 0u64;
        for n in 1..=n_max {
            let (Some((k, m)), Some((k2, _))) = (runs.run(n), runs.run(n + 1)) else {
                break;
            };
            let a = Interval::from_u64(m - k);
            let b = Interval::from_u64(k2 - m);
            alpha_seq.push(ratio(a, a + b));
            beta_seq.push(ratio(a, a + Interval::from_u64(prev_b)));
            prev_b = k2 - m;
        }
        Ok(SequencePair {
            alpha: predict(&alpha_seq),
            beta: predict(&beta_seq),
            alpha_seq,
            beta_seq,
        })
    }

    /// `a_{n+1}/(b_n+a_{n+1})` (→ liminf V) and `a_n/(a_n+b_n)`
    /// (→ limsup V). Masses are taken in a frame anchored at `k_n`, so they
    /// stay meaningful where the absolute weights underflow.
    pub fn lemma2_limits(&self, disc: &DiscountSpec, n_max: u64) -> Result<SequencePair> {
        let runs = self.require_runs()?;
        let mut alpha_seq = Vec::new();
        let mut beta_seq = Vec::new();
        for n in 1..=n_max {
            let (Some((k, m)), Some((k2, m2))) = (runs.run(n), runs.run(n + 1)) else {
                break;
            };
            let k = k.max(1);
            let frame = disc.frame_at(k);
            let a_n = frame.mass(k, m)?;
            let b_n = frame.mass(m, k2)?;
            let a_next = frame.mass(k2, m2)?;
            alpha_seq.push(ratio(a_next, b_n + a_next));
            beta_seq.push(ratio(a_n, a_n + b_n));
        }
        Ok(SequencePair {
            alpha: predict(&alpha_seq),
            beta: predict(&beta_seq),
            alpha_seq,
            beta_seq,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_run_masses() {
        let q = DiscountSpec::quadratic();
        let s = RewardSpec::LinearRuns.run_stats(&q, 2).unwrap();
        assert_eq!((s.k_n, s.m_n, s.len_one, s.len_zero), (4, 7, 3, Some(4)));
        assert!(s.mass_one.contains(3.0 / 28.0), "{}", s.mass_one);
        assert!(s.mass_one.width() < 1e-15);
    }

    #[test]
    fn finite_discount_masses_are_lengths() {
        let f = DiscountSpec::finite(1000).unwrap();
        for n in 1..10 {
            let s = RewardSpec::LinearRuns.run_stats(&f, n).unwrap();
            assert_eq!(s.mass_one, Interval::from_u64(s.len_one));
            assert_eq!(s.mass_zero, Interval::from_u64(s.len_zero.unwrap()));
        }
    }

    #[test]
    fn exponential_harmonic_masses_balance() {
        let h = DiscountSpec::harmonic_like();
        let rel = |n| {
            let s = RewardSpec::ExponentialRuns.run_stats(&h, n).unwrap();
            (s.mass_one.mid() - s.mass_zero.mid()).abs() / s.mass_one.mid()
        };
        // a_n/b_n behaves like ln(4k_n)/ln(k_n).
        let r: Vec<f64> = [5, 10, 20, 30].into_iter().map(rel).collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
        assert!(r[3] < 0.05, "{r:?}");
    }

    #[test]
    fn mass_conservation() {
        let h = DiscountSpec::harmonic_like();
        let mut total = Interval::ZERO;
        for n in 1..=12 {
            let s = RewardSpec::LinearRuns.run_stats(&h, n).unwrap();
            total = total + s.mass_one + s.mass_zero;
        }
        let (k13, _) = RewardSpec::LinearRuns.change_points(13).unwrap();
        let expect = h.gamma_tail(1).unwrap() - h.gamma_tail(k13).unwrap();
        assert!(total.overlaps(&expect));
    }

    #[test]
    fn lemma1_sequences() {
        let e = RewardSpec::ExponentialRuns.lemma1_limits(20).unwrap();
        for (a, b) in e.alpha_seq.iter().zip(&e.beta_seq).skip(1) {
            assert!(a.contains(1.0 / 3.0) && b.contains(2.0 / 3.0));
        }
        let l = RewardSpec::LinearRuns.lemma1_limits(400).unwrap();
        assert!((l.alpha.estimate - 0.5).abs() < 1e-2);
        assert!((l.beta.estimate - 0.5).abs() < 1e-2);
        let alt: Vec<u64> = (1..=40).collect();
        let a = RewardSpec::change_points_list(alt).unwrap().lemma1_limits(100).unwrap();
        assert!(a.alpha_seq.iter().all(|x| x.contains(0.5)));
        assert!(a.beta_seq.iter().skip(1).all(|x| x.contains(0.5)));
    }

    #[test]
    fn lemma2_sequences() {
        let g = DiscountSpec::geometric(0.5).unwrap();
        let l = RewardSpec::LinearRuns.lemma2_limits(&g, 30).unwrap();
        assert!(l.alpha.estimate < 1e-3 && l.beta.estimate > 1.0 - 1e-3);
        let q = RewardSpec::LinearRuns.lemma2_limits(&DiscountSpec::quadratic(), 400).unwrap();
        assert!((q.alpha.estimate - 0.5).abs() < 1e-2 && (q.beta.estimate - 0.5).abs() < 1e-2);
        let h = RewardSpec::ExponentialRuns
            .lemma2_limits(&DiscountSpec::harmonic_like(), 30)
            .unwrap();
        assert!((h.alpha.estimate - 0.5).abs() < 0.05 && (h.beta.estimate - 0.5).abs() < 0.05);
    }
}
