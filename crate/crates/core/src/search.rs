//! Exponential-then-bisection search for the first index where a monotone
//! predicate turns true.

use crate::error::Result;

/// Smallest `x` in `[lo, limit]` with `pred(x)`, assuming `pred` is false
/// then true. `Ok(None)` when `pred(limit)` is still false.
pub(crate) fn first_true<F>(lo: u64, limit: u64, mut pred: F) -> Result<Option<u64>>
where
    F: FnMut(u64) -> Result<bool>,
{
    if lo > limit {
        return Ok(None);
    }
    if pred(lo)? {
        return Ok(Some(lo));
    }
    // Invariant: pred(bad) is false.
    let mut bad = lo;
    let mut step = 1u64;
    let good = loop {
        let probe = bad.saturating_add(step).min(limit);
        if pred(probe)? {
            break probe;
        }
        if probe == limit {
            return Ok(None);
        }
        bad = probe;
        step = step.saturating_mul(2);
    };
    let mut good = good;
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if pred(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Some(good))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_threshold() {
        for t in [0u64, 1, 2, 3, 17, 1000, 123_456_789] {
            let got = first_true(0, u64::MAX, |x| Ok(x >= t)).unwrap();
            assert_eq!(got, Some(t));
        }
        assert_eq!(first_true(5, 10, |x| Ok(x >= 11)).unwrap(), None);
        assert_eq!(first_true(5, 10, |x| Ok(x >= 10)).unwrap(), Some(10));
        assert_eq!(first_true(11, 10, |_| Ok(true)).unwrap(), None);
    }

    #[test]
    fn near_u64_max() {
        let t = u64::MAX - 3;
        assert_eq!(first_true(1, u64::MAX, |x| Ok(x >= t)).unwrap(), Some(t));
    }
}
