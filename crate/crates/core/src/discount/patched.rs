//! Discounts stitched from geometric and harmonic-like pieces, and the
//! builder whose horizon ratio swings past each requested threshold.

use super::tails;
use super::{DiscountFamily, DiscountSpec, PatchKind, PatchSegment};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::search::first_true;

/// Geometric factor used by [`DiscountSpec::build_patched`].
pub const DEFAULT_PATCH_RATIO: f64 = 0.5;

const SWITCH_SEARCH_LIMIT: u64 = 1 << 62;

pub(super) fn validate(segments: &[PatchSegment]) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidParameter(m));
    let Some(first) = segments.first() else {
        return bad("patched discount needs at least one segment".into());
    };
    if first.start != 1 {
        return bad("first patched segment must start at 1".into());
    }
    for w in segments.windows(2) {
        if w[1].start <= w[0].start {
            return bad("patched segment starts must increase".into());
        }
    }
    for s in segments {
        if !(s.coeff.is_finite() && s.coeff > 0.0) {
            return bad(format!("segment coefficient must be positive, got {}", s.coeff));
        }
        match s.kind {
            PatchKind::Geometric { g } if !(g > 0.0 && g < 1.0) => {
                return bad(format!("segment factor must satisfy 0 < g < 1, got {g}"));
            }
            PatchKind::Harmonic if s.start < 2 => {
                return bad("harmonic segments must start at k ≥ 2".into());
            }
            _ => {}
        }
    }
    Ok(())
}

fn locate(segments: &[PatchSegment], k: u64) -> usize {
    segments.partition_point(|s| s.start <= k) - 1
}

pub(super) fn gamma_point(segments: &[PatchSegment], k: u64) -> f64 {
    let s = &segments[locate(segments, k)];
    match s.kind {
        PatchKind::Geometric { g } => s.coeff * g.powf((k - s.start) as f64),
        PatchKind::Harmonic => {
            let x = k as f64;
            s.coeff / (x * x.ln().powi(2))
        }
    }
}

fn seg_gamma(s: &PatchSegment, k: u64) -> Interval {
    let base = match s.kind {
        PatchKind::Geometric { g } => Interval::point(g).powi(k - s.start),
        PatchKind::Harmonic => tails::harmonic_gamma(k),
    };
    base.mul_f64(s.coeff)
}

pub(super) fn gamma_enc(segments: &[PatchSegment], k: u64) -> Interval {
    seg_gamma(&segments[locate(segments, k)], k)
}

/// `Σ_{k ≤ i < end} γ_i` within one segment; `end = None` means to infinity.
fn seg_mass(s: &PatchSegment, k: u64, end: Option<u64>) -> Interval {
    let base = match (s.kind, end) {
        (PatchKind::Geometric { g }, end) => {
            let gi = Interval::point(g);
            let head = gi.powi(k - s.start) / (Interval::ONE - gi);
            match end {
                None => head,
                Some(e) => head * (Interval::ONE - gi.powi(e - k)).nonneg(),
            }
        }
        (PatchKind::Harmonic, None) => tails::harmonic_tail(k),
        (PatchKind::Harmonic, Some(e)) if e - k <= 8 => (k..e).map(tails::harmonic_gamma).sum(),
        (PatchKind::Harmonic, Some(e)) => {
            (tails::harmonic_tail(k) - tails::harmonic_tail(e)).nonneg()
        }
    };
    base.mul_f64(s.coeff)
}

pub(super) fn tail_enc(segments: &[PatchSegment], k: u64) -> Interval {
    let j = locate(segments, k);
    let mut total = Interval::ZERO;
    let mut pos = k;
    for (idx, s) in segments.iter().enumerate().skip(j) {
        let end = segments.get(idx + 1).map(|n| n.start);
        total = total + seg_mass(s, pos, end);
        if let Some(e) = end {
            pos = e;
        }
    }
    total
}

impl DiscountSpec {
    /// Builds a discount whose horizon ratio `kγ_k/Γ_k` rises above `n` and
    /// then falls below `1/n` for each `n` in `thresholds`, using
    /// [`DEFAULT_PATCH_RATIO`] for the geometric pieces.
    pub fn build_patched(thresholds: &[u64]) -> Result<DiscountSpec> {
        Self::build_patched_with(thresholds, DEFAULT_PATCH_RATIO)
    }

    /// Each geometric piece runs until `Γ_k/(kγ_k) < 1/n` holds at a checkpoint
    /// even after counting the harmonic mass that follows; each harmonic
    /// piece runs until `Γ_k/(kγ_k) > n` holds at its log-midpoint counting
    /// only the harmonic mass before the next switch. Both conditions are
    /// certified with interval arithmetic, so the finished discount attains
    /// the swings.
    pub fn build_patched_with(thresholds: &[u64], g: f64) -> Result<DiscountSpec> {
        DiscountSpec::geometric(g)?;
        if thresholds.is_empty() {
            return DiscountSpec::geometric(g);
        }
        if let Some(bad) = thresholds.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidParameter(format!("threshold {bad} must be ≥ 1")));
        }
        let gi = Interval::point(g);
        let one_minus_g = Interval::ONE - gi;
        let mut segments = vec![PatchSegment {
            start: 1,
            kind: PatchKind::Geometric { g },
            coeff: g,
        }];
        for &n in thresholds {
            let geo = segments.last().unwrap().clone();
            let nn = Interval::from_u64(n);
            let inv_n = nn.recip();
            let guard = || Error::GuardExceeded(format!("patched switch search for threshold {n}"));

            // Checkpoint where the pure geometric ratio is below 1/(2n).
            let kc = first_true(geo.start + 1, SWITCH_SEARCH_LIMIT, |k| {
                Ok(nn.mul_f64(2.0).certainly_lt(&(one_minus_g * Interval::from_u64(k))))
            })?
            .ok_or_else(guard)?;
            let gamma_c = seg_gamma(&geo, kc);
            let k1 = first_true(kc + 1, SWITCH_SEARCH_LIMIT, |k1| {
                let harm_coeff = seg_gamma(&geo, k1) / tails::harmonic_gamma(k1);
                let tail = seg_mass(&geo, kc, Some(k1)) + harm_coeff * tails::harmonic_tail(k1);
                Ok((tail / (Interval::from_u64(kc) * gamma_c)).certainly_lt(&inv_n))
            })?
            .ok_or_else(guard)?;
            let coeff_h = (seg_gamma(&geo, k1) / tails::harmonic_gamma(k1)).mid();
            segments.push(PatchSegment {
                start: k1,
                kind: PatchKind::Harmonic,
                coeff: coeff_h,
            });

            let k2 = first_true(k1 + 2, SWITCH_SEARCH_LIMIT, |k2| {
                let km = log_midpoint(k1, k2);
                let mass = (tails::harmonic_tail(km) - tails::harmonic_tail(k2)).nonneg();
                let ratio = mass / (Interval::from_u64(km) * tails::harmonic_gamma(km));
                Ok(nn.certainly_lt(&ratio))
            })?
            .ok_or_else(guard)?;
            let coeff_g = tails::harmonic_gamma(k2).mul_f64(coeff_h).mid();
            segments.push(PatchSegment {
                start: k2,
                kind: PatchKind::Geometric { g },
                coeff: coeff_g,
            });
        }
        DiscountSpec::new(DiscountFamily::Patched { segments })
    }
}

fn log_midpoint(a: u64, b: u64) -> u64 {
    let m = ((a as f64) * (b as f64)).sqrt().round() as u64;
    m.clamp(a, b - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_thresholds_give_geometric() {
        let spec = DiscountSpec::build_patched(&[]).unwrap();
        assert_eq!(spec.family, DiscountFamily::Geometric { g: 0.5 });
    }

    #[test]
    fn patched_is_monotone_and_tail_is_consistent() {
        let spec = DiscountSpec::build_patched(&[1, 2]).unwrap();
        let DiscountFamily::Patched { segments } = &spec.family else {
            panic!("expected patched");
        };
        assert_eq!(segments.len(), 5);
        let last = segments.last().unwrap().start;
        for k in 1..last + 50 {
            let a = spec.gamma_enclosure(k).unwrap();
            let b = spec.gamma_enclosure(k + 1).unwrap();
            assert!(b.hi() <= a.hi() * (1.0 + 1e-12), "k={k}");
            let lhs = spec.gamma_tail(k).unwrap();
            let rhs = spec.gamma_tail(k + 1).unwrap() + a;
            assert!(lhs.inflate(lhs.mid() * 1e-12).overlaps(&rhs), "k={k}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn every_threshold_is_crossed_both_ways() {
        let spec = DiscountSpec::build_patched(&[1, 2, 3]).unwrap();
        let DiscountFamily::Patched { segments } = &spec.family else {
            panic!("expected patched");
        };
        let end = segments.last().unwrap().start;
        let mut grid: Vec<u64> = (0..2000).map(|j| 1.01f64.powi(j) as u64).filter(|&k| k < end).collect();
        grid.dedup();
        let ratios: Vec<Interval> = grid.iter().map(|&k| spec.horizon_ratio(k).unwrap()).collect();
        for n in [1.0, 2.0, 3.0] {
            assert!(ratios.iter().any(|r| r.lo() > n), "up {n}");
            assert!(ratios.iter().any(|r| r.hi() < 1.0 / n), "down {n}");
        }
    }

    #[test]
    fn validation_rejects_bad_segments() {
        let seg = |start, coeff| PatchSegment {
            start,
            kind: PatchKind::Geometric { g: 0.5 },
            coeff,
        };
        assert!(validate(&[]).is_err());
        assert!(validate(&[seg(2, 1.0)]).is_err());
        assert!(validate(&[seg(1, 1.0), seg(1, 1.0)]).is_err());
        assert!(validate(&[seg(1, -1.0)]).is_err());
        assert!(validate(&[seg(1, 1.0), seg(4, 0.1)]).is_ok());
    }
}
