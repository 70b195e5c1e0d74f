//! Premise checks and numerical harnesses for the average/discounted value
//! implications, plus the counterexample reward constructions.

use serde::Serialize;

use crate::discount::{DiscountFamily, DiscountSpec, Trend};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::reward::RewardSpec;
use crate::search::first_true;
use crate::value::{
    avg_enclosure, disc_value, dyadic_schedule, limit_scan, structured_tracks, summarize, LimitEstimate, Quantity,
    ScanOptions, Verdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    UImpliesV,
    VImpliesU,
    UEqualsV,
    FutureAverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseStatus {
    Satisfied,
    Violated,
    UndecidableAtScale,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Premise {
    pub name: String,
    pub status: PremiseStatus,
    /// Decided from the family's closed form rather than a grid.
    pub analytic: bool,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem: TheoremId,
    pub reward: String,
    pub discount: String,
    pub premises: Vec<Premise>,
    pub premise_status: PremiseStatus,
    pub hypothesis: Option<LimitEstimate>,
    pub conclusion: Option<LimitEstimate>,
    pub consistent: bool,
    /// A premise fails and the conclusion fails with it, as expected.
    pub expected_counterexample: bool,
    pub log: Vec<String>,
}

/// How far the harnesses look.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scale {
    /// Largest `m` for `U_{1m}`.
    pub u_max: u64,
    /// Largest `k` for `V_{kγ}` and the premise grids.
    pub v_max: u64,
}

impl Default for Scale {
    fn default() -> Self {
        Scale {
            u_max: 1 << 20,
            v_max: 1 << 20,
        }
    }
}

fn aggregate(premises: &[Premise]) -> PremiseStatus {
    if premises.iter().any(|p| p.status == PremiseStatus::Violated) {
        PremiseStatus::Violated
    } else if premises.iter().any(|p| p.status == PremiseStatus::UndecidableAtScale) {
        PremiseStatus::UndecidableAtScale
    } else {
        PremiseStatus::Satisfied
    }
}

fn dyadic_upto(max: u64) -> Vec<u64> {
    dyadic_schedule(63).into_iter().take_while(|&k| k <= max).collect()
}

/// Dyadic `k ≤ max` with `Γ_k > 0`.
fn v_grid(g: &DiscountSpec, max: u64) -> Vec<u64> {
    dyadic_upto(max)
        .into_iter()
        .filter(|&k| g.gamma_tail(k).is_ok_and(|t| t.hi() > 0.0))
        .collect()
}

/// The grid length used when a custom discount's monotonicity must be scanned.
const MONOTONE_SCAN: u64 = 1 << 16;

pub fn monotone_premise(g: &DiscountSpec, scale: &Scale) -> Premise {
    let name = "monotone discount".to_string();
    match g.documented_monotone() {
        Some(m) => Premise {
            name,
            status: if m { PremiseStatus::Satisfied } else { PremiseStatus::Violated },
            analytic: true,
            evidence: format!("{} is {}monotone by construction", g.label(), if m { "" } else { "not " }),
        },
        None => {
            let n = scale.v_max.min(MONOTONE_SCAN);
            match g.check_monotone(n) {
                Ok(c) if !c.monotone => Premise {
                    name,
                    status: PremiseStatus::Violated,
                    analytic: false,
                    evidence: format!("γ increases after k = {}", c.first_violation.unwrap_or(0)),
                },
                Ok(_) => Premise {
                    name,
                    status: PremiseStatus::UndecidableAtScale,
                    analytic: false,
                    evidence: format!("no increase found for k < {n}"),
                },
                Err(e) => Premise {
                    name,
                    status: PremiseStatus::UndecidableAtScale,
                    analytic: false,
                    evidence: e.to_string(),
                },
            }
        }
    }
}

/// `sup kγ_k/Γ_k < ∞` (`up`) or `sup Γ_k/(kγ_k) < ∞`.
pub fn growth_premise(g: &DiscountSpec, up: bool, scale: &Scale) -> Premise {
    let name = if up { "sup kγ/Γ < ∞" } else { "sup Γ/(kγ) < ∞" }.to_string();
    let grid = v_grid(g, scale.v_max);
    let diag = if grid.is_empty() {
        Err(Error::Undefined("no index with Γ_k > 0 on the grid".into()))
    } else {
        g.growth_diagnostic(&grid)
    };
    match diag {
        Ok(d) => {
            let (trend, sup) = if up { (d.trend_up, d.sup_up) } else { (d.trend_down, d.sup_down) };
            let status = match (trend, d.analytic) {
                (Trend::Bounded, true) => PremiseStatus::Satisfied,
                (Trend::Bounded, false) => PremiseStatus::UndecidableAtScale,
                _ => PremiseStatus::Violated,
            };
            let source = if d.analytic {
                "closed form".to_string()
            } else {
                format!("grid of {} dyadic points up to {}", d.grid.len(), d.grid.last().unwrap())
            };
            Premise {
                name,
                status,
                analytic: d.analytic,
                evidence: format!("trend {trend:?}, observed sup {sup:.6} ({source})"),
            }
        }
        Err(e) => Premise {
            name,
            status: PremiseStatus::UndecidableAtScale,
            analytic: false,
            evidence: e.to_string(),
        },
    }
}

fn scan_u(r: &RewardSpec, scale: &Scale, tol: f64, log: &mut Vec<String>) -> Option<LimitEstimate> {
    match limit_scan(r, None, Quantity::U, &dyadic_upto(scale.u_max), &ScanOptions::new(tol)) {
        Ok(e) => {
            log.push(format!("U scan: {}", describe(&e)));
            Some(e)
        }
        Err(e) => {
            log.push(format!("U scan failed: {e}"));
            None
        }
    }
}

fn scan_v(
    r: &RewardSpec,
    g: &DiscountSpec,
    scale: &Scale,
    tol: f64,
    log: &mut Vec<String>,
) -> Option<LimitEstimate> {
    let grid = v_grid(g, scale.v_max);
    if grid.is_empty() {
        log.push("V scan skipped: Γ_k = 0 on the whole grid".into());
        return None;
    }
    match limit_scan(r, Some(g), Quantity::V, &grid, &ScanOptions::new(tol)) {
        Ok(e) => {
            log.push(format!("V scan: {}", describe(&e)));
            Some(e)
        }
        Err(e) => {
            log.push(format!("V scan failed: {e}"));
            None
        }
    }
}

fn describe(e: &LimitEstimate) -> String {
    let b = e.band();
    match e.verdict {
        Verdict::Converged { alpha } => format!("converged to {alpha:.6} (band [{:.6}, {:.6}])", b.lo(), b.hi()),
        Verdict::Oscillating { alpha, beta } => format!("oscillating between {alpha:.6} and {beta:.6}"),
        Verdict::Inconclusive => format!("inconclusive (band [{:.6}, {:.6}])", b.lo(), b.hi()),
    }
}

/// `(premises ∧ hypothesis converges) ⇒ conclusion agrees`.
fn implication(
    status: PremiseStatus,
    hyp: Option<&LimitEstimate>,
    concl: Option<&LimitEstimate>,
    tol: f64,
    log: &mut Vec<String>,
) -> bool {
    if status != PremiseStatus::Satisfied {
        log.push("premises not established, so the implication is vacuous".into());
        return true;
    }
    let Some(h) = hyp.filter(|h| matches!(h.verdict, Verdict::Converged { .. })) else {
        log.push("hypothesis limit not established at this scale, so the implication is vacuous".into());
        return true;
    };
    let Some(c) = concl else {
        log.push("conclusion scan unavailable at this scale".into());
        return true;
    };
    if matches!(c.verdict, Verdict::Oscillating { .. }) {
        log.push("CONTRADICTION: conclusion oscillates although premises hold and the hypothesis converges".into());
        return false;
    }
    let ok = c.band().inflate(tol).overlaps(&h.band());
    if !ok {
        log.push("CONTRADICTION: conclusion band misses the hypothesis band".into());
    }
    ok
}

fn report(
    theorem: TheoremId,
    r: &RewardSpec,
    g: &DiscountSpec,
    premises: Vec<Premise>,
    hypothesis: Option<LimitEstimate>,
    conclusion: Option<LimitEstimate>,
    consistent: bool,
    expected_counterexample: bool,
    log: Vec<String>,
) -> VerificationReport {
    VerificationReport {
        theorem,
        reward: r.label(),
        discount: g.label(),
        premise_status: aggregate(&premises),
        premises,
        hypothesis,
        conclusion,
        consistent,
        expected_counterexample,
        log,
    }
}

/// If `U_{1m} → α` under a monotone discount with bounded `kγ_k/Γ_k`, then
/// `V_{kγ} → α`.
pub fn verify_u_implies_v(r: &RewardSpec, g: &DiscountSpec, scale: &Scale, tol: f64) -> VerificationReport {
    let premises = vec![monotone_premise(g, scale), growth_premise(g, true, scale)];
    let mut log = Vec::new();
    let u = scan_u(r, scale, tol, &mut log);
    let v = scan_v(r, g, scale, tol, &mut log);
    let ok = implication(aggregate(&premises), u.as_ref(), v.as_ref(), tol, &mut log);
    report(TheoremId::UImpliesV, r, g, premises, u, v, ok, false, log)
}

/// If `V_{kγ} → α` under a monotone discount with bounded `Γ_k/(kγ_k)`,
/// then `U_{1m} → α`.
pub fn verify_v_implies_u(r: &RewardSpec, g: &DiscountSpec, scale: &Scale, tol: f64) -> VerificationReport {
    let premises = vec![monotone_premise(g, scale), growth_premise(g, false, scale)];
    let mut log = Vec::new();
    let v = scan_v(r, g, scale, tol, &mut log);
    let u = scan_u(r, scale, tol, &mut log);
    let ok = implication(aggregate(&premises), v.as_ref(), u.as_ref(), tol, &mut log);
    report(TheoremId::VImpliesU, r, g, premises, v, u, ok, false, log)
}

/// If both limits exist under a monotone discount, they agree.
pub fn verify_u_eq_v(r: &RewardSpec, g: &DiscountSpec, scale: &Scale, tol: f64) -> VerificationReport {
    let premises = vec![monotone_premise(g, scale)];
    let status = aggregate(&premises);
    let mut log = Vec::new();
    let u = scan_u(r, scale, tol, &mut log);
    let v = scan_v(r, g, scale, tol, &mut log);
    let converged = |e: &Option<LimitEstimate>| e.as_ref().is_some_and(|e| matches!(e.verdict, Verdict::Converged { .. }));
    let (mut ok, mut expected) = (true, false);
    if converged(&u) && converged(&v) {
        let (ub, vb) = (u.as_ref().unwrap().band(), v.as_ref().unwrap().band());
        if vb.inflate(tol).overlaps(&ub) {
            log.push("both limits exist and agree".into());
        } else {
            match status {
                PremiseStatus::Violated => {
                    expected = true;
                    log.push("limits differ under a non-monotone discount: expected counterexample".into());
                }
                PremiseStatus::Satisfied => {
                    ok = false;
                    log.push("CONTRADICTION: limits differ under a monotone discount".into());
                }
                PremiseStatus::UndecidableAtScale => {
                    log.push("limits differ but monotonicity is undecided at this scale".into());
                }
            }
        }
    } else {
        log.push("at least one limit not established at this scale, so the statement is vacuous".into());
    }
    report(TheoremId::UEqualsV, r, g, premises, u, v, ok, expected, log)
}

/// `k ↦ m_k ≥ k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "map", content = "param", rename_all = "snake_case")]
pub enum HorizonMap {
    Identity,
    /// `m_k = c·k`.
    Multiple(u64),
    /// `m_k = k + ⌈√k⌉`.
    SqrtOffset,
    /// `m_k = k + d`.
    Offset(u64),
}

impl HorizonMap {
    pub fn apply(&self, k: u64) -> Option<u64> {
        match *self {
            HorizonMap::Identity => Some(k),
            HorizonMap::Multiple(c) => k.checked_mul(c.max(1)),
            HorizonMap::SqrtOffset => {
                let mut s = (k as f64).sqrt() as u64;
                while s.checked_mul(s).is_some_and(|x| x < k) {
                    s += 1;
                }
                while s > 0 && (s - 1) * (s - 1) >= k {
                    s -= 1;
                }
                k.checked_add(s)
            }
            HorizonMap::Offset(d) => k.checked_add(d),
        }
    }
}

/// Largest distance from 1 accepted as "`γ_{m_k}/γ_k → 1` on the grid".
const RATIO_NEAR_ONE: f64 = 0.05;
const RATIO_FAR: f64 = 0.1;

fn ratio_premise(g: &DiscountSpec, map: HorizonMap, grid: &[u64]) -> Premise {
    let name = "γ_{m_k}/γ_k → 1".to_string();
    if map == HorizonMap::Identity {
        return Premise {
            name,
            status: PremiseStatus::Satisfied,
            analytic: true,
            evidence: "m_k = k".into(),
        };
    }
    let mut dist = Vec::new();
    for &k in grid {
        let Some(m) = map.apply(k) else { break };
        let frame = g.frame_at(k);
        match (frame.gamma(k), frame.gamma(m)) {
            (Ok(a), Ok(b)) if a.lo() > 0.0 => dist.push((1.0 - (b / a).mid()).abs()),
            _ => {}
        }
    }
    if dist.len() < 4 {
        return Premise {
            name,
            status: PremiseStatus::UndecidableAtScale,
            analytic: false,
            evidence: "too few grid points with γ_k > 0".into(),
        };
    }
    let tail = &dist[dist.len() - dist.len().div_ceil(4)..];
    let last = *tail.last().unwrap();
    let shrinking = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let flat = (tail[0] - last).abs() <= 0.1 * tail[0];
    let status = if last <= RATIO_NEAR_ONE && shrinking {
        PremiseStatus::Satisfied
    } else if last >= RATIO_FAR && flat {
        PremiseStatus::Violated
    } else {
        PremiseStatus::UndecidableAtScale
    };
    Premise {
        name,
        status,
        analytic: false,
        evidence: format!("|1 − γ_{{m_k}}/γ_k| = {last:.3e} at k = {} (dyadic grid)", grid[dist.len() - 1]),
    }
}

/// If `U_{k,m_k} → α` with `m_k → ∞` and `γ_{m_k}/γ_k → 1` for a monotone
/// discount, then `V_{kγ} → α`.
pub fn verify_future_avg(
    r: &RewardSpec,
    g: &DiscountSpec,
    map: HorizonMap,
    scale: &Scale,
    tol: f64,
) -> VerificationReport {
    let grid = v_grid(g, scale.v_max);
    let premises = vec![monotone_premise(g, scale), ratio_premise(g, map, &grid)];
    let mut log = Vec::new();
    let hyp = future_scan(r, map, &grid, tol, &mut log);
    let v = scan_v(r, g, scale, tol, &mut log);
    let ok = implication(aggregate(&premises), hyp.as_ref(), v.as_ref(), tol, &mut log);
    report(TheoremId::FutureAverage, r, g, premises, hyp, v, ok, false, log)
}

fn future_scan(
    r: &RewardSpec,
    map: HorizonMap,
    grid: &[u64],
    tol: f64,
    log: &mut Vec<String>,
) -> Option<LimitEstimate> {
    if grid.is_empty() {
        log.push("U_km scan skipped: empty grid".into());
        return None;
    }
    let window = |k: u64| -> Result<Interval> {
        let m = map.apply(k).ok_or_else(|| Error::Overflow(format!("m_k overflows at k = {k}")))?;
        avg_enclosure(r, k, m)
    };
    let eval = |idx: &[u64]| idx.iter().map(|&k| window(k)).collect::<Result<Vec<_>>>();
    let run = || -> Result<LimitEstimate> {
        let values = eval(grid)?;
        let (lo, hi) = (grid[0], *grid.last().unwrap());
        let mut tracks = Vec::new();
        for (name, idx) in structured_tracks(r, Quantity::V, lo, hi) {
            let label = name.replace("V at", "U_km from");
            tracks.push((label, idx.clone(), eval(&idx)?));
        }
        Ok(summarize(Quantity::FutureU, grid.to_vec(), values, tracks, tol))
    };
    match run() {
        Ok(e) => {
            log.push(format!("U_km scan: {}", describe(&e)));
            Some(e)
        }
        Err(e) => {
            log.push(format!("U_km scan failed: {e}"));
            None
        }
    }
}

/// One verified inequality of a construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            holds,
            detail: detail.into(),
        }
    }
}

/// A constructed binary reward and the inequalities it was built to meet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Construction {
    pub proposition: u8,
    pub discount: String,
    /// `(k_n, m_n)`.
    pub runs: Vec<(u64, u64)>,
    pub requested: u64,
    /// Runs that could not be placed within the search bound, and similar.
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

impl Construction {
    pub fn reward(&self) -> RewardSpec {
        RewardSpec::ExplicitChangePoints(self.runs.iter().flat_map(|&(k, m)| [k, m]).collect())
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Unscaled `Γ`, so constructions do not depend on the scale field.
fn tail(g: &DiscountSpec, k: u64) -> Result<Interval> {
    g.family.tail_enc(k)
}

fn require_growth(g: &DiscountSpec, up: bool) -> Result<()> {
    if g.documented_monotone() == Some(false) {
        return Err(Error::PremiseViolated(format!("{} is not monotone", g.label())));
    }
    let bounded = match g.family {
        DiscountFamily::Geometric { .. } => !up,
        DiscountFamily::Quadratic | DiscountFamily::Power { .. } => true,
        DiscountFamily::HarmonicLike => up,
        DiscountFamily::Finite { .. } => true,
        _ => false,
    };
    if bounded {
        let what = if up { "kγ_k/Γ_k" } else { "Γ_k/(kγ_k)" };
        return Err(Error::PremiseViolated(format!(
            "{what} is bounded for {}, so the required ratios are never reached",
            g.label()
        )));
    }
    Ok(())
}

const V_CHECK_TOL: f64 = 1e-10;

/// Reward with `U_{1m} → 0` whose discounted value keeps returning near 1,
/// for discounts with unbounded `kγ_k/Γ_k`.
///
/// `m_n` is the first index past `m_{n−1}` with `m γ_m/Γ_m ≥ n²` and
/// `Γ_m < Γ_{m_{n−1}+1}/2`; `k_n < m_n` is the index with
/// `Γ_{k_n+1} < 2Γ_{m_n} ≤ Γ_{k_n}`. Searches assume the horizon ratio is
/// nondecreasing and compare intervals strictly.
pub fn construct_prop1_reward(g: &DiscountSpec, n_max: u64, search_bound: u64) -> Result<Construction> {
    g.validate()?;
    require_growth(g, true)?;
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    let mut m_prev = 0u64;
    for n in 1..=n_max {
        let lo = m_prev + 1;
        let reference = tail(g, lo)?;
        let n2 = (n as f64).powi(2);
        let found = first_true(lo, search_bound, |m| {
            let r = g.horizon_ratio(m)?;
            Ok(r.lo() >= n2 && tail(g, m)?.hi() < 0.5 * reference.lo())
        })?;
        let Some(m) = found else {
            if n == 1 {
                return Err(Error::GuardExceeded(format!("no m_1 below the search bound {search_bound}")));
            }
            warnings.push(format!("run {n}: no m_n below the search bound {search_bound}"));
            break;
        };
        let two_m = tail(g, m)?.mul_f64(2.0);
        // First k whose Γ_k is certainly below 2Γ_m; k_n precedes it.
        let after = first_true(lo, m, |k| Ok(tail(g, k)?.hi() < two_m.lo()))?.unwrap_or(m);
        let k = after - 1;
        let (gk, gk1) = (tail(g, k)?, tail(g, k + 1)?);
        if k < lo || !(two_m.hi() <= gk.lo() && gk1.hi() < two_m.lo()) {
            return Err(Error::Ambiguous(format!(
                "cannot certify Γ_(k+1) < 2Γ_m ≤ Γ_k for run {n} (m = {m}, k = {k})"
            )));
        }
        runs.push((k, m));
        m_prev = m;
    }
    let mut c = Construction {
        proposition: 1,
        discount: g.label(),
        runs,
        requested: n_max,
        warnings,
        checks: Vec::new(),
    };
    c.checks = prop1_checks(g, &c.runs)?;
    Ok(c)
}

fn prop1_checks(g: &DiscountSpec, runs: &[(u64, u64)]) -> Result<Vec<Check>> {
    let reward = RewardSpec::ExplicitChangePoints(runs.iter().flat_map(|&(k, m)| [k, m]).collect());
    let mut checks = Vec::new();
    let mut m_prev = 0;
    for (i, &(k, m)) in runs.iter().enumerate() {
        let n = i as u64 + 1;
        let (gm, gk, gk1, gref) = (tail(g, m)?, tail(g, k)?, tail(g, k + 1)?, tail(g, m_prev + 1)?);
        checks.push(Check::new(
            format!("run {n}: Γ_m < Γ_(m_prev+1)/2"),
            gm.hi() < 0.5 * gref.lo(),
            format!("Γ_{m} ≤ {:.6e}, Γ_{} ≥ {:.6e}", gm.hi(), m_prev + 1, gref.lo()),
        ));
        checks.push(Check::new(
            format!("run {n}: Γ_(k+1) < 2Γ_m ≤ Γ_k"),
            gk1.hi() < 2.0 * gm.hi() && 2.0 * gm.lo() <= gk.hi(),
            format!("k = {k}, m = {m}"),
        ));
        let r = g.horizon_ratio(m)?;
        checks.push(Check::new(
            format!("run {n}: mγ_m/Γ_m ≥ n²"),
            r.lo() >= (n * n) as f64,
            format!("ratio ≥ {:.4}", r.lo()),
        ));
        let vk = disc_value(&reward, g, k, V_CHECK_TOL)?.value;
        let vm = disc_value(&reward, g, m, V_CHECK_TOL)?.value;
        let q = (Interval::ONE - vk) / (Interval::ONE - vm);
        checks.push(Check::new(
            format!("run {n}: (1−V_k)/(1−V_m) ≤ 1/2"),
            q.hi() <= 0.5 + 1e-6,
            format!("ratio ≤ {:.9}", q.hi()),
        ));
        if n >= 2 {
            let u = avg_enclosure(&reward, 1, m - 1)?;
            let worst = (2..=n)
                .map(|l| {
                    let (kl, _) = runs[l as usize - 1];
                    u.hi() - (kl as f64 / m as f64 + 2.0 / (l - 1) as f64)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::new(
                format!("run {n}: U_(1,m−1) ≤ k_l/m + 2/(l−1) for 2 ≤ l ≤ n"),
                worst <= 0.0,
                format!("U ≤ {:.6}, largest excess {worst:.3e}", u.hi()),
            ));
        }
        m_prev = m;
    }
    Ok(checks)
}

/// Reward whose average oscillates between `≥ 1/2` and `≤ 1/4` while the
/// discounted value tends to 0, for discounts with unbounded `Γ_k/(kγ_k)`.
///
/// `k_n` is the first index past `8k_{n−1}` with `k γ_k/Γ_k ≤ 1/n²`, and
/// `m_n = 2k_n`.
pub fn construct_prop2_reward(g: &DiscountSpec, n_max: u64, search_bound: u64) -> Result<Construction> {
    g.validate()?;
    require_growth(g, false)?;
    let mut runs: Vec<(u64, u64)> = Vec::new();
    let mut warnings = Vec::new();
    let mut k_prev = 0u64;
    for n in 1..=n_max {
        let lo = k_prev.checked_mul(8).and_then(|x| x.checked_add(1));
        let target = 1.0 / (n as f64).powi(2);
        let found = match lo {
            Some(lo) if lo <= search_bound => {
                first_true(lo, search_bound, |k| Ok(g.horizon_ratio(k)?.hi() <= target))?
            }
            _ => None,
        };
        let Some((k, m)) = found.and_then(|k| Some((k, k.checked_mul(2)?))) else {
            if n == 1 {
                return Err(Error::GuardExceeded(format!("no k_1 below the search bound {search_bound}")));
            }
            warnings.push(format!("run {n}: no k_n below the search bound {search_bound}"));
            break;
        };
        runs.push((k, m));
        k_prev = k;
    }
    let mut c = Construction {
        proposition: 2,
        discount: g.label(),
        runs,
        requested: n_max,
        warnings,
        checks: Vec::new(),
    };
    c.checks = prop2_checks(g, &c.runs)?;
    Ok(c)
}

fn prop2_checks(g: &DiscountSpec, runs: &[(u64, u64)]) -> Result<Vec<Check>> {
    let reward = RewardSpec::ExplicitChangePoints(runs.iter().flat_map(|&(k, m)| [k, m]).collect());
    let mut checks = Vec::new();
    for (i, &(k, m)) in runs.iter().enumerate() {
        let n = i as u64 + 1;
        checks.push(Check::new(format!("run {n}: m = 2k"), m == 2 * k, format!("k = {k}, m = {m}")));
        let next = runs.get(i + 1).map(|&(k2, _)| k2);
        if let Some(k2) = next {
            checks.push(Check::new(format!("run {n}: k_(n+1) > 8k_n"), k2 > 8 * k, format!("{k2} vs {}", 8 * k)));
        }
        let r = g.horizon_ratio(k)?;
        checks.push(Check::new(
            format!("run {n}: kγ_k/Γ_k ≤ 1/n²"),
            r.hi() <= 1.0 / (n * n) as f64,
            format!("ratio ≤ {:.6}", r.hi()),
        ));
        if n >= 2 {
            let v = disc_value(&reward, g, k, V_CHECK_TOL)?.value;
            let bound = 1.0 / (n - 1) as f64;
            checks.push(Check::new(
                format!("run {n}: V_k ≤ 1/(n−1)"),
                v.hi() <= bound + 1e-3,
                format!("V ≤ {:.6}, bound {bound:.6}", v.hi()),
            ));
            let high = avg_enclosure(&reward, 1, m - 1)?;
            checks.push(Check::new(
                format!("run {n}: U_(1,m−1) ≥ 1/2"),
                high.lo() >= 0.5,
                format!("U ≥ {:.6}", high.lo()),
            ));
            // Past the last run the zeros continue, so 8k_n stands in for k_(n+1).
            let low_at = next.map_or(8 * k, |k2| k2 - 1);
            let low = avg_enclosure(&reward, 1, low_at)?;
            checks.push(Check::new(
                format!("run {n}: U_(1,k_(n+1)−1) ≤ 1/4"),
                low.hi() <= 0.25 + 1e-3,
                format!("U ≤ {:.6} at m = {low_at}", low.hi()),
            ));
        }
    }
    Ok(checks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma4Pattern {
    /// `γ_{k+1}/γ_k → 1` and `γ_k/Γ_k → 0` both observed.
    BothHold,
    /// Only the weight ratio vanishes, as for the step-log discount.
    OnlyWeightVanishes,
    /// Would contradict the implication; never expected.
    OnlyRatioToOne,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma4Report {
    pub grid: Vec<u64>,
    /// `γ_{k+1}/γ_k`
    pub gamma_ratio: Vec<Interval>,
    /// `γ_k/Γ_k`
    pub weight: Vec<Interval>,
    /// `Γ_{k+1}/Γ_k`
    pub tail_ratio: Vec<Interval>,
    pub ratio_to_one: bool,
    pub weight_vanishes: bool,
    pub pattern: Lemma4Pattern,
}

const LEMMA4_BAND: f64 = 0.05;

/// `γ_{k+1}/γ_k`, `γ_k/Γ_k` and `Γ_{k+1}/Γ_k` on a grid, judged on its
/// trailing quarter.
pub fn lemma4_diagnostics(g: &DiscountSpec, grid: &[u64]) -> Result<Lemma4Report> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid must be nonempty and increasing".into()));
    }
    let (mut gamma_ratio, mut weight, mut tail_ratio) = (Vec::new(), Vec::new(), Vec::new());
    for &k in grid {
        let frame = g.frame_at(k);
        let (gk, gk1, tk, tk1) = (frame.gamma(k)?, frame.gamma(k + 1)?, frame.tail(k)?, frame.tail(k + 1)?);
        gamma_ratio.push(gk1 / gk);
        weight.push(gk / tk);
        tail_ratio.push(tk1 / tk);
    }
    let tail_of = |v: &[Interval]| v[v.len() - v.len().div_ceil(4)..].to_vec();
    let ratio_to_one = tail_of(&gamma_ratio).iter().all(|r| (r.mid() - 1.0).abs() <= LEMMA4_BAND);
    let weight_vanishes = tail_of(&weight).iter().all(|w| w.hi() <= LEMMA4_BAND);
    let pattern = match (ratio_to_one, weight_vanishes) {
        (true, true) => Lemma4Pattern::BothHold,
        (false, true) => Lemma4Pattern::OnlyWeightVanishes,
        (true, false) => Lemma4Pattern::OnlyRatioToOne,
        (false, false) => Lemma4Pattern::Neither,
    };
    Ok(Lemma4Report {
        grid: grid.to_vec(),
        gamma_ratio,
        weight,
        tail_ratio,
        ratio_to_one,
        weight_vanishes,
        pattern,
    })
}

/// A named (reward, discount) pair for the harnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub reward: RewardSpec,
    pub discount: DiscountSpec,
}

/// The worked examples and a few trivial pairs.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    let geo = |g| DiscountSpec::geometric(g).expect("valid ratio");
    let entry = |name, reward, discount| CorpusEntry { name, reward, discount };
    vec![
        entry("linear-runs/quadratic", RewardSpec::LinearRuns, DiscountSpec::quadratic()),
        entry("alternating/geometric-0.5", RewardSpec::alternating(), geo(0.5)),
        entry("linear-runs/geometric-0.5", RewardSpec::LinearRuns, geo(0.5)),
        entry("exponential-runs/harmonic", RewardSpec::ExponentialRuns, DiscountSpec::harmonic_like()),
        entry(
            "alternating/alternating-zero",
            RewardSpec::alternating(),
            DiscountSpec::alternating_zero(DiscountFamily::Geometric { g: 0.5 }).expect("valid inner"),
        ),
        entry("linear-runs/cosine", RewardSpec::LinearRuns, DiscountSpec::cosine_modulated()),
        entry(
            "linear-runs/patched-1-2",
            RewardSpec::LinearRuns,
            DiscountSpec::build_patched(&[1, 2]).expect("patch builds"),
        ),
        entry("linear-runs/power-1", RewardSpec::LinearRuns, DiscountSpec::power(1.0).expect("valid")),
        entry("linear-runs/harmonic", RewardSpec::LinearRuns, DiscountSpec::harmonic_like()),
        entry("exponential-runs/quadratic", RewardSpec::ExponentialRuns, DiscountSpec::quadratic()),
        entry("exponential-runs/geometric-0.9", RewardSpec::ExponentialRuns, geo(0.9)),
        entry(
            "periodic-100/quadratic",
            RewardSpec::periodic(vec![1.0, 0.0, 0.0]).expect("valid"),
            DiscountSpec::quadratic(),
        ),
        entry("constant-0.3/power-1", RewardSpec::constant(0.3).expect("valid"), DiscountSpec::power(1.0).expect("valid")),
        entry("constant-0.3/geometric-0.9", RewardSpec::constant(0.3).expect("valid"), geo(0.9)),
        entry("constant-0.7/step-log", RewardSpec::constant(0.7).expect("valid"), DiscountSpec::step_log()),
    ]
}
