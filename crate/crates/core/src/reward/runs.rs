//! Change-point arithmetic for binary reward sequences.
//!
//! Run `n` (1-based) is the 1-run `[k_n, m_n)` followed by the 0-run
//! `[m_n, k_{n+1})`; indices before `k_1` are zero.

use crate::error::{Error, Result};

/// Borrowed view of the change-point generator of a binary reward.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Runs<'a> {
    Explicit(&'a [u64]),
    Linear,
    Exponential,
}

/// Where an index falls relative to the runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Position {
    /// Number of runs with `k_n ≤ k` (0 before the first run).
    pub run: u64,
    /// Inside the 1-run of `run`.
    pub in_one: bool,
}

/// Largest `n` for which an exponential run fits entirely in `u64`.
pub(crate) const EXP_RUNS_U64: u64 = 32;
/// Largest `n` for which an exponential run's end fits in `f64`.
pub(crate) const EXP_RUNS_F64: u64 = 512;

impl Runs<'_> {
    /// `(k_n, m_n)`, or `None` past the last run representable in `u64`.
    pub fn run(&self, n: u64) -> Option<(u64, u64)> {
        if n == 0 {
            return None;
        }
        match self {
            Runs::Explicit(p) => {
                let i = usize::try_from(2 * (n - 1)).ok()?;
                Some((*p.get(i)?, *p.get(i + 1)?))
            }
            Runs::Linear => {
                let a = 2u128 * n as u128 - 1;
                let k = a * (n as u128 - 1) + 1;
                let m = a * n as u128 + 1;
                Some((u64::try_from(k).ok()?, u64::try_from(m).ok()?))
            }
            Runs::Exponential => {
                if n > EXP_RUNS_U64 {
                    None
                } else {
                    Some((1u64 << (2 * n - 2), 1u64 << (2 * n - 1)))
                }
            }
        }
    }

    /// Change points as reals, reaching past `u64` where the generator
    /// allows it.
    pub fn run_real(&self, n: u64) -> Option<(f64, f64)> {
        match self {
            Runs::Exponential if (1..=EXP_RUNS_F64).contains(&n) => {
                let e = (2 * n - 2) as i32;
                Some((2f64.powi(e), 2f64.powi(e + 1)))
            }
            _ => self.run(n).map(|(k, m)| (k as f64, m as f64)),
        }
    }

    /// Total number of runs, `None` if infinite.
    pub fn count(&self) -> Option<u64> {
        match self {
            Runs::Explicit(p) => Some(p.len() as u64 / 2),
            _ => None,
        }
    }

    pub fn locate(&self, k: u64) -> Position {
        let run = match self {
            Runs::Explicit(p) => {
                let idx = p.partition_point(|&x| x <= k) as u64;
                return Position {
                    run: idx.div_ceil(2),
                    in_one: idx % 2 == 1,
                };
            }
            Runs::Linear if k == 0 => 0,
            Runs::Linear => {
                // Largest n with 2n² − 3n + 2 ≤ k.
                let guess = ((3.0 + (8.0 * k as f64 - 7.0).max(0.0).sqrt()) / 4.0) as u64;
                let mut n = guess.max(1);
                while n > 1 && self.run(n).is_none_or(|(kn, _)| kn > k) {
                    n -= 1;
                }
                while self.run(n + 1).is_some_and(|(kn, _)| kn <= k) {
                    n += 1;
                }
                n
            }
            Runs::Exponential => {
                if k == 0 {
                    0
                } else {
                    (63 - k.leading_zeros() as u64) / 2 + 1
                }
            }
        };
        let in_one = self.run(run).is_some_and(|(kn, mn)| kn <= k && k < mn);
        Position { run, in_one }
    }

    /// Ones in the complete 1-runs before run `n`.
    fn ones_before(&self, n: u64) -> u128 {
        if n <= 1 {
            return 0;
        }
        match self {
            Runs::Explicit(p) => p[..2 * (n as usize - 1)]
                .chunks(2)
                .map(|c| (c[1] - c[0].max(1)) as u128)
                .sum(),
            Runs::Linear => (n as u128 - 1).pow(2),
            Runs::Exponential => ((1u128 << (2 * (n - 1))) - 1) / 3,
        }
    }

    /// `#{1 ≤ i ≤ m : r_i = 1}`.
    pub fn ones_upto(&self, m: u64) -> u128 {
        if m == 0 {
            return 0;
        }
        let pos = self.locate(m);
        let mut c = self.ones_before(pos.run);
        if let Some((k, e)) = self.run(pos.run) {
            let k = k.max(1);
            c += if pos.in_one {
                (m + 1 - k) as u128
            } else {
                e.saturating_sub(k) as u128
            };
        }
        c
    }

    /// Upper bounds on `A_n/B_{n−1}` and `B_n/A_n` over all runs `n ≥ l`
    /// (`l ≥ 2`), when the generator admits closed forms.
    pub fn ratio_sups(&self, l: u64) -> Option<(f64, f64)> {
        debug_assert!(l >= 2);
        match self {
            Runs::Linear => {
                let l = l as f64;
                let rho = (2.0 * l - 1.0) / (2.0 * l - 2.0);
                let sigma = 2.0 * l / (2.0 * l - 1.0);
                Some((rho.next_up(), sigma.next_up()))
            }
            Runs::Exponential => Some((2.0, 2.0)),
            Runs::Explicit(_) => None,
        }
    }
}

pub(crate) fn validate_points(points: &[u64]) -> Result<()> {
    if points.len() % 2 != 0 {
        return Err(Error::InvalidParameter(
            "change points must come in (k, m) pairs".into(),
        ));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "change points must be strictly increasing".into(),
        ));
    }
    if points.len() >= 2 && points[1] <= 1 {
        return Err(Error::InvalidParameter("first 1-run contains no index ≥ 1".into()));
    }
    Ok(())
}
