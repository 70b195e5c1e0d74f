//! Rigorous enclosures for tails that have no closed form.
//!
//! Power and harmonic-like weights are completely monotone, so the
//! Euler–Maclaurin expansion truncated after the `f'` term overestimates the
//! sum by at most `|f'''|/720`. The cosine-modulated weights are not
//! monotone; their tail uses the trapezoid rule with an explicit `f''` bound.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::interval::Interval;

/// Below this index tails are summed directly before switching to the
/// asymptotic expansion.
pub(super) const EM_START: u64 = 1024;

/// Cosine-modulated tails are tabulated up to this index.
pub(super) const COSINE_TABLE_LEN: u64 = 1 << 16;

const EPS: f64 = f64::EPSILON;

/// `x^{-p}` for a positive interval. The exponent is taken as given.
pub(super) fn pow_neg(x: Interval, p: f64) -> Interval {
    x.powf(-p)
}

/// Integer enclosure for values up to 2^128.
pub(super) fn int_enc(n: u128) -> Interval {
    let x = n as f64;
    if n <= 1u128 << 53 {
        Interval::point(x)
    } else {
        Interval::around(x, 1)
    }
}

/// An integer-valued index too large for `u64`.
fn real_index(x: f64) -> Interval {
    Interval::point(x)
}

fn em_bracket(integral: Interval, f: Interval, f1: Interval, f3: Interval) -> Interval {
    let upper = integral + f.mul_f64(0.5) - f1 / Interval::point(12.0);
    let lower = upper + f3 / Interval::point(720.0);
    Interval::new(lower.lo(), upper.hi())
}

pub(super) fn power_gamma(s: f64, k: u64) -> Interval {
    pow_neg(Interval::from_u64(k), s)
}

fn power_em(eps: f64, s: f64, n: Interval) -> Interval {
    let si = Interval::point(s);
    let integral = pow_neg(n, eps) / Interval::point(eps);
    let f = pow_neg(n, s);
    let f1 = -(si * pow_neg(n, s + 1.0));
    let f3 = -(si * (si + Interval::ONE) * (si + Interval::point(2.0)) * pow_neg(n, s + 3.0));
    em_bracket(integral, f, f1, f3)
}

/// `Σ_{i≥k} i^{-1-eps}`.
pub(super) fn power_tail(eps: f64, k: u64) -> Interval {
    let s = 1.0 + eps;
    if k >= EM_START {
        power_em(eps, s, Interval::from_u64(k))
    } else {
        let head: Interval = (k..EM_START).map(|i| power_gamma(s, i)).sum();
        head + power_em(eps, s, Interval::from_u64(EM_START))
    }
}

pub(super) fn power_tail_real(eps: f64, x: f64) -> Interval {
    if x < 1.8e19 {
        power_tail(eps, x as u64)
    } else {
        power_em(eps, 1.0 + eps, real_index(x))
    }
}

/// `1/(k ln² k)` for `k ≥ 2`.
pub(super) fn harmonic_gamma(k: u64) -> Interval {
    let x = Interval::from_u64(k.max(2));
    harmonic_gamma_at(x)
}

fn harmonic_gamma_at(x: Interval) -> Interval {
    let l = x.ln();
    Interval::ONE / (x * l * l)
}

fn harmonic_em(n: Interval) -> Interval {
    let l = n.ln();
    let li = l.recip();
    let li2 = li * li;
    let li3 = li2 * li;
    let li4 = li3 * li;
    let li5 = li4 * li;
    let n2 = n * n;
    let integral = li;
    let f = harmonic_gamma_at(n);
    let f1 = -((li2 + li3.mul_f64(2.0)) / n2);
    let poly = li2.mul_f64(6.0) + li3.mul_f64(22.0) + li4.mul_f64(36.0) + li5.mul_f64(24.0);
    let f3 = -(poly / (n2 * n2));
    em_bracket(integral, f, f1, f3)
}

/// `Σ_{i≥k} γ_i` for the harmonic-like family (`γ_1 = γ_2`).
pub(super) fn harmonic_tail(k: u64) -> Interval {
    static TABLE: OnceLock<Vec<Interval>> = OnceLock::new();
    if k >= EM_START {
        return harmonic_em(Interval::from_u64(k));
    }
    let table = TABLE.get_or_init(|| {
        let n0 = EM_START as usize;
        let mut out = vec![Interval::ZERO; n0 + 1];
        out[n0] = harmonic_em(Interval::from_u64(EM_START));
        for i in (2..n0).rev() {
            out[i] = out[i + 1] + harmonic_gamma(i as u64);
        }
        out
    });
    table[k.max(2) as usize]
}

pub(super) fn harmonic_tail_real(x: f64) -> Interval {
    if x < 1.8e19 {
        harmonic_tail(x as u64)
    } else {
        harmonic_em(real_index(x))
    }
}

fn trig_enc(arg: Interval, f: fn(f64) -> f64) -> Interval {
    if !(arg.hi() < 1e15) {
        return Interval::new(-1.0, 1.0);
    }
    let m = arg.mid();
    let err = arg.width() * 0.5 + 4.0 * EPS * (1.0 + m.abs() * EPS);
    Interval::with_abs_error(f(m), err).clamp(-1.0, 1.0)
}

fn pi_enc() -> Interval {
    Interval::around(PI, 1)
}

fn cosine_gamma_at(x: Interval) -> Interval {
    let arg = pi_enc() * (x.mul_f64(2.0)).sqrt();
    let c = trig_enc(arg, f64::cos);
    (Interval::point(2.0) + c) / (x * x)
}

/// `(2 + cos(π√(2k)))/k²`.
pub(super) fn cosine_gamma(k: u64) -> Interval {
    cosine_gamma_at(Interval::from_u64(k))
}

fn cosine_trapezoid_tail(n: Interval) -> Interval {
    let pi = pi_enc();
    let t = n.mul_f64(2.0).sqrt();
    let pt = pi * t;
    let (s, c) = (trig_enc(pt, f64::sin), trig_enc(pt, f64::cos));
    let t3 = t * t * t;
    let t4 = t3 * t;
    let pi2 = pi * pi;
    let ibp_rem = Interval::point(3.0) / (pi2 * t4);
    let ibp = -(s / (pi * t3)) + Interval::point(3.0) * c / (pi2 * t4);
    let ibp = Interval::new((ibp - ibp_rem).lo(), (ibp + ibp_rem).hi());
    let integral = Interval::point(2.0) / n + ibp.mul_f64(4.0);

    // Trapezoid error: Σ max|f''|/12 with |f''(x)| ≤ C(x)/x³.
    let sq = n.sqrt();
    let c_coef = pi2.mul_f64(0.5)
        + (pi / Interval::point(8f64.sqrt()) + pi.mul_f64(4.0) / Interval::point(2f64.sqrt()))
            .widen(2)
            / sq
        + Interval::point(18.0) / n;
    let n2 = n * n;
    let e = c_coef / Interval::point(12.0) * (Interval::ONE / (n2 * n) + Interval::ONE / (n2.mul_f64(2.0)));
    let base = cosine_gamma_at(n).mul_f64(0.5) + integral;
    Interval::new((base - e).lo(), (base + e).hi())
}

fn cosine_table() -> &'static [Interval] {
    static TABLE: OnceLock<Vec<Interval>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n0 = COSINE_TABLE_LEN as usize;
        let mut out = vec![Interval::ZERO; n0 + 1];
        out[n0] = cosine_trapezoid_tail(Interval::from_u64(COSINE_TABLE_LEN));
        for k in (1..n0).rev() {
            out[k] = out[k + 1] + cosine_gamma(k as u64);
        }
        out
    })
}

pub(super) fn cosine_tail(k: u64) -> Interval {
    if k >= COSINE_TABLE_LEN {
        cosine_trapezoid_tail(Interval::from_u64(k))
    } else {
        cosine_table()[k as usize]
    }
}

pub(super) fn cosine_tail_real(x: f64) -> Interval {
    if x < 1.8e19 {
        cosine_tail(x as u64)
    } else {
        cosine_trapezoid_tail(real_index(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: impl Fn(u64) -> f64, from: u64, to: u64) -> f64 {
        // Neumaier-compensated partial sum over [from, to).
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for i in (from..to).rev() {
            let x = f(i);
            let t = s + x;
            c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
            s = t;
        }
        s + c
    }

    #[test]
    fn power_tail_matches_brute_force_with_tail_difference() {
        let eps = 1.0;
        let (k, n) = (10u64, 200_000u64);
        let head = brute(|i| (i as f64).powf(-2.0), k, n);
        let diff = power_tail(eps, k) - power_tail(eps, n);
        assert!(diff.inflate(1e-12).contains(head), "{diff} vs {head}");
        // ζ(2) = π²/6
        assert!(power_tail(1.0, 1).contains(PI * PI / 6.0));
        assert!(power_tail(1.0, 1).width() < 1e-12);
    }

    #[test]
    fn power_tail_half_is_tight() {
        let t = power_tail(0.5, 1000);
        assert!(t.width() / t.mid() < 1e-12);
        // ∫ approximation is 2/√1000
        assert!((t.mid() - 2.0 / 1000f64.sqrt()).abs() < 0.02);
    }

    #[test]
    fn harmonic_derivatives_match_finite_differences() {
        let f = |x: f64| 1.0 / (x * x.ln().powi(2));
        let x = 100.0;
        let h = 1e-3;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let l = x.ln();
        let an1 = -(l.powi(-2) + 2.0 * l.powi(-3)) / (x * x);
        assert!((d1 - an1).abs() / an1.abs() < 1e-6);
        let h3 = 0.05;
        let d3 = (f(x + 2.0 * h3) - 2.0 * f(x + h3) + 2.0 * f(x - h3) - f(x - 2.0 * h3)) / (2.0 * h3.powi(3));
        let an3 = -(6.0 * l.powi(-2) + 22.0 * l.powi(-3) + 36.0 * l.powi(-4) + 24.0 * l.powi(-5)) / x.powi(4);
        assert!((d3 - an3).abs() / an3.abs() < 1e-3, "{d3} vs {an3}");
    }

    #[test]
    fn harmonic_tail_matches_brute_force() {
        let (k, n) = (2u64, 1_000_000u64);
        let head = brute(|i| 1.0 / (i as f64 * (i as f64).ln().powi(2)), k, n);
        let diff = harmonic_tail(k) - harmonic_tail(n);
        assert!(diff.inflate(1e-11).contains(head), "{diff} vs {head}");
        assert!(harmonic_tail(2).width() < 1e-12);
    }

    #[test]
    fn cosine_tail_is_consistent_across_table_boundary() {
        let n0 = COSINE_TABLE_LEN;
        let direct = cosine_trapezoid_tail(Interval::from_u64(n0 - 1000));
        let tabled = cosine_tail(n0 - 1000);
        assert!(direct.overlaps(&tabled), "{direct} vs {tabled}");
        let head = brute(|i| (2.0 + (PI * (2.0 * i as f64).sqrt()).cos()) / (i as f64).powi(2), n0, 4 * n0);
        let diff = cosine_tail(n0) - cosine_tail(4 * n0);
        assert!(diff.inflate(1e-13).contains(head), "{diff} vs {head}");
        assert!(cosine_tail(1).width() < 1e-9);
    }

    #[test]
    fn real_index_tails_continue_integer_tails() {
        let a = harmonic_tail_real(1e18);
        let b = harmonic_tail(1_000_000_000_000_000_000);
        assert!(a.overlaps(&b));
        let big = harmonic_tail_real(2f64.powi(1000));
        let expect = 1.0 / (1000.0 * 2f64.ln());
        assert!((big.mid() - expect).abs() / expect < 1e-12);
        let p = power_tail_real(1.0, 1e30);
        assert!((p.mid() - 1e-30).abs() / 1e-30 < 1e-12);
    }
}
