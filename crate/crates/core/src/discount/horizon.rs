//! Effective horizon, quasi-horizon, horizon ratio and the monotonicity and
//! growth diagnostics built on them.

use serde::Serialize;

use super::{DiscountFamily, DiscountSpec};
use crate::error::{Error, Result};
use crate::guards::Guards;
use crate::interval::{IntegerInterval, Interval};
use crate::search::first_true;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Bounded,
    Diverging,
    Oscillating,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneCheck {
    pub monotone: bool,
    /// First `k` with `γ_{k+1} > γ_k` certified.
    pub first_violation: Option<u64>,
    pub checked_up_to: u64,
}

/// Behaviour of `kγ_k/Γ_k` ("up") and its reciprocal ("down") on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthDiagnostic {
    pub grid: Vec<u64>,
    pub ratio: Vec<Interval>,
    pub sup_up: f64,
    pub sup_down: f64,
    pub trend_up: Trend,
    pub trend_down: Trend,
    /// Trends come from the family's closed form rather than the grid.
    pub analytic: bool,
}

impl DiscountSpec {
    fn positive_tail(&self, k: u64) -> Result<Interval> {
        super::check_index(k)?;
        let t = self.frame_at(k).tail(k)?;
        if t.lo() <= 0.0 {
            Err(Error::Undefined(format!("Γ_{k} is not certified positive")))
        } else {
            Ok(t)
        }
    }

    /// `min{h ≥ 0 : Γ_{k+h} ≤ Γ_k/2}` with the default guard.
    pub fn effective_horizon(&self, k: u64) -> Result<IntegerInterval> {
        self.effective_horizon_with(k, &Guards::default())
    }

    pub fn effective_horizon_with(&self, k: u64, guards: &Guards) -> Result<IntegerInterval> {
        super::check_index(k)?;
        match &self.family {
            DiscountFamily::Finite { m } => {
                if k > *m {
                    return Err(Error::Undefined(format!("Γ_{k} = 0 beyond the horizon {m}")));
                }
                Ok(IntegerInterval::exact((m - k + 1).div_ceil(2)))
            }
            DiscountFamily::Quadratic => Ok(IntegerInterval::exact(k)),
            DiscountFamily::Geometric { g } => Ok(geometric_half_life(*g)),
            _ => self.effective_horizon_search(k, guards),
        }
    }

    pub(crate) fn effective_horizon_search(&self, k: u64, guards: &Guards) -> Result<IntegerInterval> {
        let t0 = self.positive_tail(k)?;
        if t0.width() > 0.5 * t0.lo() {
            return Err(Error::Ambiguous(format!("Γ_{k} enclosure {t0} is too wide")));
        }
        let frame = self.frame_at(k);
        let half_hi = t0.hi() * 0.5;
        let half_lo = t0.lo() * 0.5;
        let limit = guards.max_horizon.min(u64::MAX - k);
        let guard_err = || Error::GuardExceeded(format!("effective horizon at k={k} exceeds {limit}"));
        let lo = first_true(0, limit, |h| Ok(frame.tail(k + h)?.lo() <= half_hi))?.ok_or_else(guard_err)?;
        let hi = first_true(lo, limit, |h| Ok(frame.tail(k + h)?.hi() <= half_lo))?.ok_or_else(guard_err)?;
        Ok(IntegerInterval::new(lo, hi))
    }

    /// `Γ_k / γ_k`.
    pub fn quasi_horizon(&self, k: u64) -> Result<Interval> {
        super::check_index(k)?;
        match &self.family {
            DiscountFamily::Finite { m } if k <= *m => return Ok(Interval::from_u64(m - k + 1)),
            DiscountFamily::Geometric { g } => {
                return Ok((Interval::ONE - Interval::point(*g)).recip());
            }
            DiscountFamily::Quadratic => return Ok(Interval::from_u64(k) + Interval::ONE),
            _ => {}
        }
        let frame = self.frame_at(k);
        let gk = frame.gamma(k)?;
        if gk.hi() <= 0.0 {
            return Err(Error::Undefined(format!("γ_{k} = 0")));
        }
        if gk.lo() <= 0.0 {
            return Err(Error::Ambiguous(format!("γ_{k} enclosure {gk} touches zero")));
        }
        Ok(frame.tail(k)? / gk)
    }

    /// `k γ_k / Γ_k`.
    pub fn horizon_ratio(&self, k: u64) -> Result<Interval> {
        super::check_index(k)?;
        match &self.family {
            DiscountFamily::Finite { m } if k <= *m => {
                return Ok(Interval::from_u64(k) / Interval::from_u64(m - k + 1));
            }
            DiscountFamily::Geometric { g } => {
                return Ok((Interval::ONE - Interval::point(*g)) * Interval::from_u64(k));
            }
            DiscountFamily::Quadratic => {
                return Ok(Interval::from_u64(k) / (Interval::from_u64(k) + Interval::ONE));
            }
            _ => {}
        }
        let tk = self.positive_tail(k)?;
        let frame = self.frame_at(k);
        Ok(Interval::from_u64(k) * frame.gamma(k)? / tk)
    }

    /// Scans `γ_{k+1} ≤ γ_k` for `k < k_max`, reporting only certain
    /// violations.
    pub fn check_monotone(&self, k_max: u64) -> Result<MonotoneCheck> {
        let mut prev = self.family.gamma_enc(1)?;
        for k in 1..k_max {
            let next = self.family.gamma_enc(k + 1)?;
            if next.lo() > prev.hi() {
                return Ok(MonotoneCheck {
                    monotone: false,
                    first_violation: Some(k),
                    checked_up_to: k_max,
                });
            }
            prev = next;
        }
        Ok(MonotoneCheck {
            monotone: true,
            first_violation: None,
            checked_up_to: k_max,
        })
    }

    /// Evaluates `kγ_k/Γ_k` on `grid` and classifies its growth. Families
    /// with a known closed form report the analytic trend.
    pub fn growth_diagnostic(&self, grid: &[u64]) -> Result<GrowthDiagnostic> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty grid".into()));
        }
        let mut used = Vec::with_capacity(grid.len());
        let mut ratio = Vec::with_capacity(grid.len());
        for &k in grid {
            match self.horizon_ratio(k) {
                Ok(r) => {
                    used.push(k);
                    ratio.push(r);
                }
                Err(Error::Undefined(_)) | Err(Error::Ambiguous(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        if ratio.is_empty() {
            return Err(Error::Undefined("horizon ratio undefined on the whole grid".into()));
        }
        let sup_up = ratio.iter().map(|r| r.hi()).fold(0.0, f64::max);
        let sup_down = ratio
            .iter()
            .map(|r| if r.lo() > 0.0 { 1.0 / r.lo() } else { f64::INFINITY })
            .fold(0.0, f64::max);
        let analytic = match self.family {
            DiscountFamily::Geometric { .. } => Some((Trend::Diverging, Trend::Bounded)),
            DiscountFamily::Quadratic | DiscountFamily::Power { .. } => {
                Some((Trend::Bounded, Trend::Bounded))
            }
            DiscountFamily::HarmonicLike => Some((Trend::Bounded, Trend::Diverging)),
            _ => None,
        };
        let (trend_up, trend_down) = analytic.unwrap_or_else(|| {
            let up: Vec<f64> = ratio.iter().map(|r| r.mid()).collect();
            let down: Vec<f64> = up.iter().map(|x| 1.0 / x).collect();
            (classify_trend(&up), classify_trend(&down))
        });
        Ok(GrowthDiagnostic {
            grid: used,
            ratio,
            sup_up,
            sup_down,
            trend_up,
            trend_down,
            analytic: analytic.is_some(),
        })
    }
}

/// Smallest `h` with `g^h ≤ 1/2`, certified by interval powers.
fn geometric_half_life(g: f64) -> IntegerInterval {
    let gi = Interval::point(g);
    let find = |pred: &dyn Fn(Interval) -> bool| {
        first_true(1, u64::MAX, |h| Ok(pred(gi.powi(h))))
            .ok()
            .flatten()
            .expect("g < 1 reaches 1/2")
    };
    let lo = find(&|p| p.lo() <= 0.5);
    let hi = find(&|p| p.hi() <= 0.5);
    IntegerInterval::new(lo, hi)
}

/// Heuristic trend of a positive series sampled on an increasing grid.
pub(crate) fn classify_trend(values: &[f64]) -> Trend {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite() && *x > 0.0).collect();
    if v.len() < 3 {
        return Trend::Bounded;
    }
    let logs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let mut reversals = 0;
    let mut last_sign = 0i8;
    for w in logs.windows(2) {
        let d = w[1] - w[0];
        if d.abs() < 0.1 {
            continue;
        }
        let s = if d > 0.0 { 1 } else { -1 };
        if last_sign != 0 && s != last_sign {
            reversals += 1;
        }
        last_sign = s;
    }
    if reversals >= 2 {
        return Trend::Oscillating;
    }
    let half = &logs[logs.len() / 2..];
    let rise = half.last().unwrap() - half.first().unwrap();
    let monotone_up = half.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    if monotone_up && rise > 1.5f64.ln() {
        Trend::Diverging
    } else {
        Trend::Bounded
    }
}
