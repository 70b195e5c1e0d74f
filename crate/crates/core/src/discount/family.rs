//! Per-family evaluation of `γ_k`, `Γ_k` and anchored frames.

use super::tails::{self, int_enc};
use super::{patched, DiscountFamily, PatchKind, Support, TailModel};
use crate::error::{Error, Result};
use crate::interval::Interval;

fn ceil_log2(k: u64) -> u32 {
    if k <= 1 {
        0
    } else {
        64 - (k - 1).leading_zeros()
    }
}

/// `4^{-n}`, exact for every `n` reachable from a `u64` index.
fn quarter_pow(n: u32) -> f64 {
    0.25f64.powi(n as i32)
}

impl DiscountFamily {
    pub(crate) fn gamma_point(&self, k: u64) -> Result<f64> {
        Ok(match self {
            DiscountFamily::Finite { m } => {
                if k <= *m {
                    1.0
                } else {
                    0.0
                }
            }
            DiscountFamily::Geometric { g } => g.powf(k as f64),
            DiscountFamily::Quadratic => 1.0 / (k as u128 * (k as u128 + 1)) as f64,
            DiscountFamily::Power { eps } => (k as f64).powf(-(1.0 + eps)),
            DiscountFamily::HarmonicLike => {
                let x = k.max(2) as f64;
                1.0 / (x * x.ln().powi(2))
            }
            DiscountFamily::StepLog => quarter_pow(ceil_log2(k)),
            DiscountFamily::AlternatingZero { inner } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    inner.gamma_point(k / 2)?
                }
            }
            DiscountFamily::CosineModulated => {
                let x = k as f64;
                (2.0 + (std::f64::consts::PI * (2.0 * x).sqrt()).cos()) / (x * x)
            }
            DiscountFamily::Patched { segments } => patched::gamma_point(segments, k),
            DiscountFamily::Custom(t) => {
                let len = t.table.len() as u64;
                if k <= len {
                    t.table[(k - 1) as usize]
                } else {
                    let last = *t.table.last().unwrap();
                    match t.tail {
                        Some(TailModel::Geometric { g }) => last * g.powf((k - len) as f64),
                        Some(TailModel::Power { eps }) => {
                            last * (k as f64 / len as f64).powf(-(1.0 + eps))
                        }
                        None => return Err(Error::TableExhausted { index: k, len }),
                    }
                }
            }
        })
    }

    pub(crate) fn gamma_enc(&self, k: u64) -> Result<Interval> {
        Ok(match self {
            DiscountFamily::Finite { .. } | DiscountFamily::StepLog => {
                Interval::point(self.gamma_point(k)?)
            }
            DiscountFamily::Geometric { g } => Interval::point(*g).powi(k),
            DiscountFamily::Quadratic => Interval::ONE / int_enc(k as u128 * (k as u128 + 1)),
            DiscountFamily::Power { eps } => tails::power_gamma(1.0 + eps, k),
            DiscountFamily::HarmonicLike => tails::harmonic_gamma(k),
            DiscountFamily::AlternatingZero { inner } => {
                if k % 2 == 1 {
                    Interval::ZERO
                } else {
                    inner.gamma_enc(k / 2)?
                }
            }
            DiscountFamily::CosineModulated => tails::cosine_gamma(k),
            DiscountFamily::Patched { segments } => patched::gamma_enc(segments, k),
            DiscountFamily::Custom(t) => {
                let len = t.table.len() as u64;
                if k <= len {
                    Interval::point(t.table[(k - 1) as usize])
                } else {
                    let last = Interval::point(*t.table.last().unwrap());
                    match t.tail {
                        Some(TailModel::Geometric { g }) => last * Interval::point(g).powi(k - len),
                        Some(TailModel::Power { eps }) => {
                            let s = 1.0 + eps;
                            last * Interval::from_u64(len).powf(s) * tails::power_gamma(s, k)
                        }
                        None => return Err(Error::TableExhausted { index: k, len }),
                    }
                }
            }
        })
    }

    pub(crate) fn tail_enc(&self, k: u64) -> Result<Interval> {
        Ok(match self {
            DiscountFamily::Finite { m } => {
                if k <= *m {
                    Interval::from_u64(m - k + 1)
                } else {
                    Interval::ZERO
                }
            }
            DiscountFamily::Geometric { g } => {
                let gi = Interval::point(*g);
                gi.powi(k) / (Interval::ONE - gi)
            }
            DiscountFamily::Quadratic => Interval::from_u64(k).recip(),
            DiscountFamily::Power { eps } => tails::power_tail(*eps, k),
            DiscountFamily::HarmonicLike => {
                if k == 1 {
                    tails::harmonic_gamma(2) + tails::harmonic_tail(2)
                } else {
                    tails::harmonic_tail(k)
                }
            }
            DiscountFamily::StepLog => {
                if k == 1 {
                    Interval::point(1.5)
                } else {
                    let n = ceil_log2(k);
                    let block = if n == 64 { u64::MAX - k + 2 } else { (1u64 << n) - k + 1 };
                    Interval::from_u64(block).mul_f64(quarter_pow(n))
                        + Interval::point(0.5f64.powi(n as i32 + 1))
                }
            }
            DiscountFamily::AlternatingZero { inner } => inner.tail_enc(k.div_ceil(2))?,
            DiscountFamily::CosineModulated => tails::cosine_tail(k),
            DiscountFamily::Patched { segments } => patched::tail_enc(segments, k),
            DiscountFamily::Custom(t) => {
                let len = t.table.len() as u64;
                let suffix = t.suffix();
                if k <= len {
                    suffix[(k - 1) as usize] + custom_tail_after(t.tail.as_ref(), &t.table, len + 1)
                } else if t.tail.is_none() {
                    return Err(Error::TableExhausted { index: k, len });
                } else {
                    custom_tail_after(t.tail.as_ref(), &t.table, k)
                }
            }
        })
    }

    /// `Γ` at an integer-valued index that may exceed `u64`. `None` for
    /// families without an asymptotic tail formula.
    pub(crate) fn tail_real(&self, x: f64) -> Option<Interval> {
        if x < 9.0e18 {
            return self.tail_enc(x as u64).ok();
        }
        match self {
            DiscountFamily::Finite { .. } => Some(Interval::ZERO),
            DiscountFamily::Quadratic => Some(Interval::point(x).recip()),
            DiscountFamily::Power { eps } => Some(tails::power_tail_real(*eps, x)),
            DiscountFamily::HarmonicLike => Some(tails::harmonic_tail_real(x)),
            DiscountFamily::CosineModulated => Some(tails::cosine_tail_real(x)),
            DiscountFamily::AlternatingZero { inner } => inner.tail_real((x / 2.0).ceil()),
            DiscountFamily::Custom(t) => match t.tail {
                Some(TailModel::Power { eps }) => {
                    let len = t.table.len() as u64;
                    let s = 1.0 + eps;
                    let last = Interval::point(*t.table.last().unwrap());
                    Some(last * Interval::from_u64(len).powf(s) * tails::power_tail_real(eps, x))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// A frame whose values are proportional to this family on `[k, ∞)`
    /// but stay representable where the absolute values would underflow.
    pub(crate) fn frame_at(&self, k: u64) -> Frame<'_> {
        let shifted = |g: f64, shift: u64| Frame::Shifted {
            family: DiscountFamily::Geometric { g },
            shift,
        };
        match self {
            DiscountFamily::Geometric { g } if k > 1 => shifted(*g, k - 1),
            DiscountFamily::AlternatingZero { inner } if k > 2 => match **inner {
                DiscountFamily::Geometric { g } => Frame::Shifted {
                    family: DiscountFamily::AlternatingZero {
                        inner: Box::new(DiscountFamily::Geometric { g }),
                    },
                    shift: 2 * ((k - 1) / 2),
                },
                _ => Frame::Absolute(self),
            },
            DiscountFamily::Patched { segments } => {
                let last = segments.last().expect("validated patch has segments");
                match last.kind {
                    PatchKind::Geometric { g } if k > last.start => shifted(g, k - 1),
                    _ => Frame::Absolute(self),
                }
            }
            DiscountFamily::Custom(t) => match t.tail {
                Some(TailModel::Geometric { g }) if k > t.table.len() as u64 + 1 => {
                    shifted(g, k - 1)
                }
                _ => Frame::Absolute(self),
            },
            _ => Frame::Absolute(self),
        }
    }
}

fn custom_tail_after(tail: Option<&TailModel>, table: &[f64], k: u64) -> Interval {
    let len = table.len() as u64;
    let last = Interval::point(*table.last().unwrap());
    match tail {
        None => Interval::ZERO,
        Some(TailModel::Geometric { g }) => {
            let gi = Interval::point(*g);
            last * gi.powi(k - len) / (Interval::ONE - gi)
        }
        Some(TailModel::Power { eps }) => {
            let s = 1.0 + eps;
            last * Interval::from_u64(len).powf(s) * tails::power_tail(*eps, k)
        }
    }
}

/// View of a discount restricted to `[k, ∞)`, up to a positive constant.
///
/// Every ratio of `γ`/`Γ` values taken within one frame equals the ratio of
/// the true values.
#[derive(Clone, Debug)]
pub(crate) enum Frame<'a> {
    Absolute(&'a DiscountFamily),
    /// `γ'_i = family.γ_{i - shift}`.
    Shifted { family: DiscountFamily, shift: u64 },
}

impl Frame<'_> {
    fn family(&self) -> &DiscountFamily {
        match self {
            Frame::Absolute(f) => f,
            Frame::Shifted { family, .. } => family,
        }
    }

    fn local(&self, i: u64) -> u64 {
        match self {
            Frame::Absolute(_) => i,
            Frame::Shifted { shift, .. } => {
                debug_assert!(i > *shift);
                i - shift
            }
        }
    }

    pub(crate) fn gamma(&self, i: u64) -> Result<Interval> {
        self.family().gamma_enc(self.local(i))
    }

    pub(crate) fn tail(&self, i: u64) -> Result<Interval> {
        self.family().tail_enc(self.local(i))
    }

    /// `Σ_{a ≤ i < b} γ_i`. Short ranges are summed term by term.
    pub(crate) fn mass(&self, a: u64, b: u64) -> Result<Interval> {
        if b <= a {
            return Ok(Interval::ZERO);
        }
        if b - a <= 8 {
            let mut s = Interval::ZERO;
            for i in a..b {
                s = s + self.gamma(i)?;
            }
            Ok(s)
        } else {
            Ok((self.tail(a)? - self.tail(b)?).nonneg())
        }
    }

    pub(crate) fn tail_real(&self, x: f64) -> Option<Interval> {
        match self {
            Frame::Absolute(f) => f.tail_real(x),
            Frame::Shifted { .. } => None,
        }
    }

    pub(crate) fn support(&self) -> Support {
        self.family().support()
    }
}
