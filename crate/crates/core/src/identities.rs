//! Finite identities behind the limit results, as executable checks.
//!
//! Each check returns `Err(Error::IdentityViolated)` with the offending
//! values; evaluation failures propagate unchanged.

use crate::discount::DiscountSpec;
use crate::error::{Error, Result};
use crate::guards::Guards;
use crate::interval::Interval;
use crate::reward::RewardSpec;
use crate::value::{avg_value, avg_value_from, disc_value_with, ValueOptions};

fn violated(msg: String) -> Result<()> {
    Err(Error::IdentityViolated(msg))
}

fn ones(r: &RewardSpec, k: u64, m: u64) -> Result<i128> {
    r.ones_in(k, m)
        .map(|c| c as i128)
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a binary run sequence", r.label())))
}

fn window(k: u64, m: u64) -> Result<()> {
    if 2 <= k && k <= m {
        Ok(())
    } else {
        Err(Error::InvalidIndex(format!("need 2 ≤ k ≤ m, got k = {k}, m = {m}")))
    }
}

/// `U_{1m} = U_{1,m−1} + (r_m − U_{1,m−1})/m`: exact in integers for binary
/// rewards, to rounding otherwise.
pub fn check_u_recurrence(r: &RewardSpec, m: u64) -> Result<()> {
    window(2, m)?;
    let prev = avg_value(r, m - 1)?;
    let rm = r.reward_at(m)?;
    let rec = prev + (rm - prev) / m as f64;
    let direct = avg_value(r, m)?;
    if (rec - direct).abs() > 1e-12 {
        return violated(format!("{}: U_1{m} = {direct}, recurrence gives {rec}", r.label()));
    }
    if r.is_binary() {
        // Multiplied through by m(m−1).
        let (s, sp, mi) = (ones(r, 1, m)?, ones(r, 1, m - 1)?, m as i128);
        if (mi - 1) * s != mi * sp - sp + (mi - 1) * rm as i128 {
            return violated(format!("{}: integer recurrence fails at m = {m}", r.label()));
        }
    }
    Ok(())
}

/// `m·U_{1m} = (k−1)·U_{1,k−1} + (m−k+1)·U_{km}`.
pub fn check_u_decomposition(r: &RewardSpec, k: u64, m: u64) -> Result<()> {
    window(k, m)?;
    if r.is_binary() && ones(r, 1, m)? != ones(r, 1, k - 1)? + ones(r, k, m)? {
        return violated(format!("{}: counts do not split at k = {k}, m = {m}", r.label()));
    }
    let lhs = m as f64 * avg_value(r, m)?;
    let rhs = (k - 1) as f64 * avg_value(r, k - 1)? + (m - k + 1) as f64 * avg_value_from(r, k, m)?;
    if (lhs - rhs).abs() > 1e-12 * m as f64 {
        return violated(format!("{}: decomposition {lhs} vs {rhs} at k = {k}, m = {m}", r.label()));
    }
    Ok(())
}

/// `|U_{km} − U_{1m}| ≤ |U_{1m} − U_{1,k−1}| / (m/(k−1) − 1)` for binary
/// rewards, cleared of denominators and compared in exact integers.
pub fn check_future_average_bound(r: &RewardSpec, k: u64, m: u64) -> Result<()> {
    window(k, m)?;
    let (sm, sk, skm) = (ones(r, 1, m)?, ones(r, 1, k - 1)?, ones(r, k, m)?);
    let (mi, ki) = (m as i128, k as i128);
    // Both sides times m·(m−k+1).
    let lhs = (mi * skm - (mi - ki + 1) * sm).abs();
    let rhs = ((ki - 1) * sm - mi * sk).abs();
    if lhs > rhs {
        return violated(format!("{}: {lhs} > {rhs} at k = {k}, m = {m}", r.label()));
    }
    Ok(())
}

/// `Γ_k = γ_k + Γ_{k+1}` up to the enclosure widths.
pub fn check_gamma_recurrence(g: &DiscountSpec, k: u64) -> Result<()> {
    let lhs = g.gamma_tail(k)?;
    let rhs = g.gamma_enclosure(k)? + g.gamma_tail(k + 1)?;
    if !lhs.overlaps(&rhs) {
        return violated(format!("{}: Γ_{k} = {lhs} but γ_k + Γ_(k+1) = {rhs}", g.label()));
    }
    Ok(())
}

/// `Σ_{j=k}^{K−1} δ_j = γ_k − γ_K` and
/// `Σ_{j=k}^{K−1} (j−k+1)·δ_j = Γ_k − Γ_K − (K−k)·γ_K`, `K = k + len`.
pub fn check_delta_telescopes(g: &DiscountSpec, k: u64, len: u64) -> Result<()> {
    let big_k = k + len;
    let mut plain = Interval::ZERO;
    let mut weighted = Interval::ZERO;
    for j in k..big_k {
        let d = g.delta(j)?;
        plain = plain + d;
        weighted = weighted + d.mul_f64((j - k + 1) as f64);
    }
    let gbig = g.gamma_enclosure(big_k)?;
    let first = g.gamma_enclosure(k)? - gbig;
    let second = g.gamma_tail(k)? - g.gamma_tail(big_k)? - gbig.mul_f64(len as f64);
    if !plain.overlaps(&first) {
        return violated(format!("{}: Σδ = {plain} vs {first} on [{k}, {big_k})", g.label()));
    }
    if !weighted.overlaps(&second) {
        return violated(format!("{}: Σ(j−k+1)δ = {weighted} vs {second} on [{k}, {big_k})", g.label()));
    }
    Ok(())
}

/// `Γ_k·V_k ∈ γ_k·r_k + Γ_{k+1}·V_{k+1}`. Skipped where `Γ_{k+1} = 0`.
pub fn check_v_recurrence(r: &RewardSpec, g: &DiscountSpec, k: u64) -> Result<()> {
    let tk = g.gamma_tail(k)?;
    let tk1 = g.gamma_tail(k + 1)?;
    if tk1.hi() <= 0.0 {
        return Ok(());
    }
    // Non-monotone discounts under periodic rewards need about k/tol terms;
    // a best-effort enclosure is still valid, so a small guard suffices.
    let opts = ValueOptions {
        tol: 1e-6,
        guards: Guards {
            max_terms: 2_000_000,
            ..Guards::default()
        },
    };
    let v = |i| match disc_value_with(r, g, i, &opts) {
        Ok(d) => Ok(d.raw),
        Err(Error::Inconclusive { best, .. }) => Ok(best),
        Err(e) => Err(e),
    };
    let lhs = tk * v(k)?;
    let rhs = g.gamma_enclosure(k)?.mul_f64(r.reward_at(k)?) + tk1 * v(k + 1)?;
    if !lhs.overlaps(&rhs) {
        return violated(format!("{} / {}: Γ_k V_k = {lhs}, recurrence {rhs} at k = {k}", r.label(), g.label()));
    }
    Ok(())
}
