//! Average values `U_{km}`, discounted values `V_{kγ}` and limit scans.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::discount::{check_index, DiscountSpec, Frame};
use crate::error::{Error, Result};
use crate::guards::Guards;
use crate::interval::Interval;
use crate::reward::{RewardSpec, Runs};
use crate::sum::CompensatedSum;

pub const DEFAULT_TOL: f64 = 1e-3;

/// `U_{1m}`.
pub fn avg_value(spec: &RewardSpec, m: u64) -> Result<f64> {
    avg_value_from(spec, 1, m)
}

/// `U_{km} = (Σ_{i=k}^m r_i)/(m−k+1)`.
pub fn avg_value_from(spec: &RewardSpec, k: u64, m: u64) -> Result<f64> {
    check_index(k)?;
    if k > m {
        return Err(Error::InvalidIndex(format!("window start {k} is after its end {m}")));
    }
    let len = (m - k + 1) as f64;
    Ok((spec.partial_sum(k, m)? / len).clamp(0.0, 1.0))
}

/// Rigorous enclosure of `U_{km}`; exact counts for binary rewards.
pub fn avg_enclosure(spec: &RewardSpec, k: u64, m: u64) -> Result<Interval> {
    let u = avg_value_from(spec, k, m)?;
    Ok(match spec.ones_in(k, m) {
        Some(ones) if ones < 1 << 64 => {
            (Interval::from_u64(ones as u64) / Interval::from_u64(m - k + 1)).clamp01()
        }
        _ => Interval::around(u, 8).clamp01(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueOptions {
    /// Largest admissible truncation contribution to the enclosure width.
    pub tol: f64,
    pub guards: Guards,
}

impl Default for ValueOptions {
    fn default() -> Self {
        ValueOptions {
            tol: DEFAULT_TOL,
            guards: Guards::default(),
        }
    }
}

impl ValueOptions {
    pub fn with_tol(tol: f64) -> Self {
        ValueOptions {
            tol,
            ..Self::default()
        }
    }
}

/// An enclosure of `V_{kγ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscValue {
    /// `raw` clamped to `[0, 1]`.
    pub value: Interval,
    /// Before clamping.
    pub raw: Interval,
    /// Last index summed explicitly; `None` when the sum is exact.
    pub truncation: Option<u64>,
    /// Runs, segments or terms summed.
    pub segments: u64,
}

/// `V_{kγ}` with the default guards.
pub fn disc_value(spec: &RewardSpec, disc: &DiscountSpec, k: u64, tol: f64) -> Result<DiscValue> {
    disc_value_with(spec, disc, k, &ValueOptions::with_tol(tol))
}

pub fn disc_value_with(
    spec: &RewardSpec,
    disc: &DiscountSpec,
    k: u64,
    opts: &ValueOptions,
) -> Result<DiscValue> {
    check_index(k)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {} must be positive", opts.tol)));
    }
    let frame = disc.frame_at(k);
    let gk = frame.tail(k)?;
    if gk.hi() <= 0.0 {
        return Err(Error::Undefined(format!("Γ_{k} = 0, so V_{k} has no normalizer")));
    }
    let (inf, sup) = spec.tail_bounds(k, frame.support());
    if inf == sup {
        let raw = Interval::point(inf);
        return Ok(DiscValue {
            value: raw.clamp01(),
            raw,
            truncation: None,
            segments: 0,
        });
    }
    let mut acc = Accumulator {
        frame,
        gk,
        tol: opts.tol,
        max_terms: opts.guards.max_terms,
        sum: Interval::ZERO,
        segments: 0,
    };
    let monotone = disc.documented_monotone() == Some(true);
    match spec.runs() {
        Some(runs) => acc.binary(runs, k, monotone),
        None => acc.general(spec, k, monotone),
    }
}

struct Accumulator<'a> {
    frame: Frame<'a>,
    gk: Interval,
    tol: f64,
    max_terms: u64,
    /// `Σ γ_i r_i` over the indices consumed so far, in frame units.
    sum: Interval,
    segments: u64,
}

enum Step {
    Done(DiscValue),
    Continue,
}

impl Accumulator<'_> {
    fn enclosure(&self, tail: Interval) -> Interval {
        (self.sum + tail) / self.gk
    }

    fn finish(&self, tail: Interval, truncation: Option<u64>) -> DiscValue {
        let raw = self.enclosure(tail);
        DiscValue {
            value: raw.clamp01(),
            raw,
            truncation,
            segments: self.segments,
        }
    }

    fn inconclusive(&self, tail: Interval, reason: String) -> Error {
        Error::Inconclusive {
            best: self.enclosure(tail).clamp01(),
            tol: self.tol,
            reason,
        }
    }

    /// Stops once the unsummed remainder `tail` is pinned down to `tol`.
    fn checkpoint(&mut self, tail: Interval, pos: u64) -> Result<Step> {
        if tail.width() <= self.tol * self.gk.lo() {
            return Ok(Step::Done(self.finish(tail, pos.checked_sub(1))));
        }
        self.segments += 1;
        if self.segments > self.max_terms {
            return Err(self.inconclusive(tail, format!("segment guard {} reached at index {pos}", self.max_terms)));
        }
        Ok(Step::Continue)
    }

    fn general(&mut self, spec: &RewardSpec, k: u64, monotone: bool) -> Result<DiscValue> {
        let support = self.frame.support();
        let abel = match spec {
            RewardSpec::Periodic { pattern } if monotone => Some(AbelBound::new(pattern)),
            _ => None,
        };
        let mut pos = k;
        let mut segments = spec.segments(k);
        loop {
            let t = self.frame.tail(pos)?;
            let (lo, hi) = spec.tail_bounds(pos, support);
            let mut tail = t * Interval::new(lo, hi);
            if let Some(ab) = &abel {
                let g = self.frame.gamma(pos)?;
                if let Some(better) = tail.intersect(&ab.tail(t, g)) {
                    tail = better;
                }
            }
            if let Step::Done(v) = self.checkpoint(tail, pos)? {
                return Ok(v);
            }
            let Some(seg) = segments.next() else {
                return Err(self.inconclusive(tail, format!("reward data ends before index {pos}")));
            };
            match seg.end {
                None => {
                    self.sum = self.sum + t.mul_f64(seg.value);
                    return Ok(self.finish(Interval::ZERO, None));
                }
                Some(e) => {
                    self.sum = self.sum + self.frame.mass(seg.start, e)?.mul_f64(seg.value);
                    pos = e;
                }
            }
        }
    }

    /// Binary rewards, consumed one run at a time. At the start `k_l` of a
    /// 1-run the remaining 1-mass `X` of a monotone discount satisfies
    /// `T/(1+σ) ≤ X ≤ ρ(b_{l−1}+T)/(1+ρ)`, where `T = Γ_{k_l}` and `ρ`, `σ`
    /// bound `A_n/B_{n−1}` and `B_n/A_n` for `n ≥ l`.
    fn binary(&mut self, runs: Runs<'_>, k: u64, monotone: bool) -> Result<DiscValue> {
        let at = runs.locate(k);
        let mut b_prev = None;
        let zeros_from = if at.in_one {
            let (_, m) = runs.run(at.run).expect("located run exists");
            self.sum = self.sum + self.frame.mass(k, m)?;
            m
        } else {
            k
        };
        let mut l = at.run + 1;
        match runs.run(l) {
            Some((kl, _)) => {
                let b = self.frame.mass(zeros_from, kl)?;
                let complete = at.run >= 1 && runs.run(at.run).is_some_and(|(_, m)| m == zeros_from);
                if complete {
                    b_prev = Some(b);
                }
            }
            None if runs.count().is_some() => return Ok(self.finish(Interval::ZERO, None)),
            None => {
                let complete = at.run >= 1 && !at.in_one && runs.run(at.run).is_some_and(|(_, m)| m == k);
                return self.binary_real(runs, l, zeros_from, complete || at.in_one, monotone);
            }
        }
        loop {
            let (kl, ml) = runs.run(l).expect("run checked before advancing");
            let t = self.frame.tail(kl)?;
            let tail = run_tail(runs, l, t, b_prev, monotone);
            if let Step::Done(v) = self.checkpoint(tail, kl)? {
                return Ok(v);
            }
            self.sum = self.sum + self.frame.mass(kl, ml)?;
            match runs.run(l + 1) {
                Some((next, _)) => {
                    b_prev = Some(self.frame.mass(ml, next)?);
                    l += 1;
                }
                None if runs.count().is_some() => return Ok(self.finish(Interval::ZERO, None)),
                None => return self.binary_real(runs, l + 1, ml, true, monotone),
            }
        }
    }

    /// Continues past `u64` indices with real change points, where the
    /// generator and the discount's tail formula allow it. `zeros_from`
    /// starts the 0-run preceding run `l0`; `complete` says it is whole.
    fn binary_real(
        &mut self,
        runs: Runs<'_>,
        l0: u64,
        zeros_from: u64,
        complete: bool,
        monotone: bool,
    ) -> Result<DiscValue> {
        let t_from = self.frame.tail(zeros_from)?;
        let real = runs.run_real(l0).and_then(|(k0, _)| self.frame.tail_real(k0));
        let Some(mut t) = real else {
            let tail = Interval::new(0.0, t_from.hi());
            return Err(self.inconclusive(tail, format!("no tail formula past index {zeros_from}")));
        };
        let mut b_prev = complete.then(|| (t_from - t).nonneg());
        let mut l = l0;
        loop {
            let tail = run_tail(runs, l, t, b_prev, monotone);
            if let Step::Done(mut v) = self.checkpoint(tail, u64::MAX)? {
                v.truncation = Some(u64::MAX);
                return Ok(v);
            }
            let next = runs.run_real(l + 1).and_then(|(k2, _)| Some((k2, self.frame.tail_real(k2)?)));
            let (Some((_, ml)), Some((_, t_next))) = (runs.run_real(l), next) else {
                return Err(self.inconclusive(tail, format!("change points leave the f64 range after run {l}")));
            };
            let tm = self.frame.tail_real(ml).expect("tail formula covers the range");
            self.sum = self.sum + (t - tm).nonneg();
            b_prev = Some((tm - t_next).nonneg());
            t = t_next;
            l += 1;
        }
    }
}

/// Enclosure of the 1-mass from the start of run `l`, given its tail `t`.
fn run_tail(runs: Runs<'_>, l: u64, t: Interval, b_prev: Option<Interval>, monotone: bool) -> Interval {
    let plain = Interval::new(0.0, t.hi());
    let (Some(b), true, true) = (b_prev, monotone, l >= 2) else {
        return plain;
    };
    let Some((rho, sigma)) = runs.ratio_sups(l) else {
        return plain;
    };
    let rho = Interval::point(rho);
    let lo = (t / (Interval::ONE + Interval::point(sigma))).lo().max(0.0);
    let hi = (rho * (b + t) / (Interval::ONE + rho)).hi().min(t.hi());
    if lo <= hi {
        Interval::new(lo, hi)
    } else {
        plain
    }
}

/// Abel-summation bound for periodic rewards under a monotone discount:
/// `|Σ_{i≥N} γ_i (r_i − c)| ≤ C γ_N + η Γ_N`, with `C` the absolute
/// deviation over one period and `η` the error in the computed mean `c`.
struct AbelBound {
    mean: f64,
    dev: f64,
}

impl AbelBound {
    const MEAN_ERR: f64 = 1e-14;

    fn new(pattern: &[f64]) -> Self {
        let mean = pattern.iter().copied().collect::<CompensatedSum>().value() / pattern.len() as f64;
        let dev = pattern.iter().map(|r| (r - mean).abs()).sum::<f64>();
        AbelBound {
            mean,
            dev: dev * (1.0 + 1e-12) + Self::MEAN_ERR * pattern.len() as f64,
        }
    }

    fn tail(&self, t: Interval, g: Interval) -> Interval {
        let spread = self.dev * g.hi() + Self::MEAN_ERR * t.hi();
        (t.mul_f64(self.mean)).inflate(spread.next_up())
    }
}

/// Where a structured subsequence samples a binary reward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunPoint {
    /// `k_n`, where `V` peaks.
    AtKn,
    /// `m_n`, where `V` bottoms out.
    AtMn,
}

/// `V` at the change points of runs `ns`.
pub fn subsequence_values(
    spec: &RewardSpec,
    disc: &DiscountSpec,
    which: RunPoint,
    ns: std::ops::RangeInclusive<u64>,
    tol: f64,
) -> Result<Vec<Interval>> {
    if !spec.is_binary() {
        return Err(Error::InvalidParameter(format!("{} has no change points", spec.label())));
    }
    let opts = ValueOptions::with_tol(tol);
    ns.into_par_iter()
        .map(|n| {
            let (k, m) = spec.change_points(n)?;
            let idx = match which {
                RunPoint::AtKn => k.max(1),
                RunPoint::AtMn => m,
            };
            Ok(disc_value_with(spec, disc, idx, &opts)?.value)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    U,
    V,
    /// `U_{k,m_k}` along a schedule of `k`.
    #[serde(rename = "U_km")]
    FutureU,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Converged { alpha: f64 },
    Oscillating { alpha: f64, beta: f64 },
    Inconclusive,
}

/// Values along one subsequence and the hull of its trailing quarter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Track {
    pub name: String,
    pub indices: Vec<u64>,
    pub values: Vec<Interval>,
    pub band: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub quantity: Quantity,
    pub schedule: Vec<u64>,
    pub values: Vec<Interval>,
    /// Change-point or residue subsequences added to the schedule.
    pub tracks: Vec<Track>,
    pub liminf_est: Interval,
    pub limsup_est: Interval,
    pub verdict: Verdict,
    pub tol: f64,
    /// Points whose enclosure missed `value_tol`; their best interval is used.
    pub inconclusive_points: usize,
}

pub const VERDICT_BASIS: &str = "finite-sample proxy: converged when every trailing-quarter band fits in \
width tol; oscillating when the lower and upper subsequence bands are separated by at least tol";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Band width deciding the verdict.
    pub tol: f64,
    /// Tolerance for each discounted value.
    pub value_tol: f64,
    pub guards: Guards,
}

impl ScanOptions {
    pub fn new(tol: f64) -> Self {
        ScanOptions {
            tol,
            value_tol: tol / 4.0,
            guards: Guards::default(),
        }
    }
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self::new(DEFAULT_TOL)
    }
}

/// `2^0, 2^1, ..., 2^max_exp`.
pub fn dyadic_schedule(max_exp: u32) -> Vec<u64> {
    (0..=max_exp.min(63)).map(|j| 1u64 << j).collect()
}

const TRACK_TAIL: usize = 48;
const MAX_RESIDUE_PERIOD: usize = 16;

fn quarter_band(values: &[Interval]) -> Interval {
    let w = values.len().div_ceil(4);
    values[values.len() - w..]
        .iter()
        .copied()
        .reduce(|a, b| a.hull(&b))
        .expect("nonempty")
}

pub(crate) fn structured_tracks(spec: &RewardSpec, quantity: Quantity, lo: u64, hi: u64) -> Vec<(String, Vec<u64>)> {
    if let Some(runs) = spec.runs() {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut n = 1;
        while let Some((k, m)) = runs.run(n) {
            let next_k = runs.run(n + 1).map(|(k2, _)| k2);
            let (l, u) = match quantity {
                Quantity::V => (Some(m), Some(k.max(1))),
                _ => (next_k.map(|k2| k2 - 1), Some(m - 1)),
            };
            if k > hi {
                break;
            }
            let keep = |x: u64| x >= lo && x <= hi;
            if let Some(x) = l.filter(|&x| keep(x)) {
                lower.push((n, x));
            }
            if let Some(x) = u.filter(|&x| keep(x)) {
                upper.push((n, x));
            }
            n += 1;
        }
        let thin = |v: Vec<(u64, u64)>| -> Vec<u64> {
            let len = v.len();
            v.into_iter()
                .enumerate()
                .filter(|(i, (n, _))| i + TRACK_TAIL >= len || n.is_power_of_two())
                .map(|(_, (_, x))| x)
                .collect()
        };
        let (lname, uname) = match quantity {
            Quantity::V => ("V at m_n", "V at k_n"),
            _ => ("U at k_{n+1}-1", "U at m_n-1"),
        };
        return [(lname, thin(lower)), (uname, thin(upper))]
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(s, v)| (s.to_string(), v))
            .collect();
    }
    Vec::new()
}

fn residue_tracks(spec: &RewardSpec, schedule: &[u64]) -> Vec<(String, Vec<u64>)> {
    let RewardSpec::Periodic { pattern } = spec else {
        return Vec::new();
    };
    let p = pattern.len() as u64;
    if p < 2 || pattern.len() > MAX_RESIDUE_PERIOD {
        return Vec::new();
    }
    (0..p)
        .map(|r| {
            let mut idx: Vec<u64> = schedule
                .iter()
                .filter_map(|&s| s.checked_add((r + p - s % p) % p))
                .collect();
            idx.dedup();
            (format!("residue {r} mod {p}"), idx)
        })
        .collect()
}

/// Estimates `liminf`/`limsup` of `U_{1m}` (schedule of `m`) or `V_{kγ}`
/// (schedule of `k`), augmenting the schedule with change-point or
/// residue subsequences.
pub fn limit_scan(
    spec: &RewardSpec,
    disc: Option<&DiscountSpec>,
    quantity: Quantity,
    schedule: &[u64],
    opts: &ScanOptions,
) -> Result<LimitEstimate> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "schedule must be a nonempty, strictly increasing list of positive indices".into(),
        ));
    }
    if !(opts.tol > 0.0 && opts.value_tol > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    let disc = match (quantity, disc) {
        (Quantity::V, None) => {
            return Err(Error::InvalidParameter("a discount is required for V".into()));
        }
        (Quantity::FutureU, _) => {
            return Err(Error::InvalidParameter("windowed averages need a horizon map".into()));
        }
        (_, d) => d,
    };
    let (lo, hi) = (schedule[0], *schedule.last().unwrap());
    let mut track_specs = structured_tracks(spec, quantity, lo, hi);
    track_specs.extend(residue_tracks(spec, schedule));

    let mut points: Vec<u64> = schedule.to_vec();
    for (_, idx) in &track_specs {
        points.extend(idx);
    }
    points.sort_unstable();
    points.dedup();

    let vopts = ValueOptions {
        tol: opts.value_tol,
        guards: opts.guards,
    };
    let evaluated: Vec<(u64, Result<(Interval, bool)>)> = points
        .par_iter()
        .map(|&i| {
            let r = match quantity {
                Quantity::U | Quantity::FutureU => avg_enclosure(spec, 1, i).map(|x| (x, false)),
                Quantity::V => match disc_value_with(spec, disc.unwrap(), i, &vopts) {
                    Ok(v) => Ok((v.value, false)),
                    Err(Error::Inconclusive { best, .. }) => Ok((best, true)),
                    Err(e) => Err(e),
                },
            };
            (i, r)
        })
        .collect();
    let mut table = BTreeMap::new();
    let mut inconclusive_points = 0;
    for (i, r) in evaluated {
        let (v, missed) = r?;
        inconclusive_points += missed as usize;
        table.insert(i, v);
    }

    let values: Vec<Interval> = schedule.iter().map(|i| table[i]).collect();
    let tracks: Vec<(String, Vec<u64>, Vec<Interval>)> = track_specs
        .into_iter()
        .map(|(name, indices)| {
            let values = indices.iter().map(|i| table[i]).collect();
            (name, indices, values)
        })
        .collect();
    let mut est = summarize(quantity, schedule.to_vec(), values, tracks, opts.tol);
    est.inconclusive_points = inconclusive_points;
    Ok(est)
}

/// Builds the verdict from values along a schedule and optional
/// subsequence tracks.
pub fn summarize(
    quantity: Quantity,
    schedule: Vec<u64>,
    values: Vec<Interval>,
    tracks: Vec<(String, Vec<u64>, Vec<Interval>)>,
    tol: f64,
) -> LimitEstimate {
    assert_eq!(schedule.len(), values.len(), "one value per schedule point");
    assert!(!values.is_empty(), "nonempty schedule");
    let tracks: Vec<Track> = tracks
        .into_iter()
        .filter(|(_, idx, _)| !idx.is_empty())
        .map(|(name, indices, values)| Track {
            name,
            band: quarter_band(&values),
            indices,
            values,
        })
        .collect();
    let main = quarter_band(&values);
    let (liminf_est, limsup_est) = if tracks.is_empty() {
        (main, main)
    } else {
        let by_mid = |a: &&Track, b: &&Track| a.band.mid().total_cmp(&b.band.mid());
        let lower = tracks.iter().min_by(by_mid).unwrap().band;
        let upper = tracks.iter().max_by(by_mid).unwrap().band;
        (lower, upper)
    };
    let all = tracks.iter().fold(main.hull(&liminf_est).hull(&limsup_est), |acc, t| acc.hull(&t.band));
    let verdict = if all.width() <= tol {
        Verdict::Converged { alpha: all.mid() }
    } else if limsup_est.lo() - liminf_est.hi() >= tol {
        Verdict::Oscillating {
            alpha: liminf_est.mid(),
            beta: limsup_est.mid(),
        }
    } else {
        Verdict::Inconclusive
    };
    LimitEstimate {
        quantity,
        schedule,
        values,
        tracks,
        liminf_est,
        limsup_est,
        verdict,
        tol,
        inconclusive_points: 0,
    }
}

impl LimitEstimate {
    pub fn alpha(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Converged { alpha } | Verdict::Oscillating { alpha, .. } => Some(alpha),
            Verdict::Inconclusive => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Converged { alpha } => Some(alpha),
            Verdict::Oscillating { beta, .. } => Some(beta),
            Verdict::Inconclusive => None,
        }
    }

    /// Hull of every trailing-quarter band.
    pub fn band(&self) -> Interval {
        self.tracks.iter().fold(
            quarter_band(&self.values).hull(&self.liminf_est).hull(&self.limsup_est),
            |acc, t| acc.hull(&t.band),
        )
    }

    pub fn verdict_label(&self) -> &'static str {
        match self.verdict {
            Verdict::Converged { .. } => "converged",
            Verdict::Oscillating { .. } => "oscillating",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pairs = |v: &[Interval]| v.iter().map(|x| [x.lo(), x.hi()]).collect::<Vec<_>>();
        serde_json::json!({
            "quantity": self.quantity,
            "schedule": self.schedule,
            "values": pairs(&self.values),
            "verdict": self.verdict_label(),
            "alpha": self.alpha(),
            "beta": self.beta(),
            "tol": self.tol,
            "verdict_basis": VERDICT_BASIS,
            "liminf_est": [self.liminf_est.lo(), self.liminf_est.hi()],
            "limsup_est": [self.limsup_est.lo(), self.limsup_est.hi()],
            "inconclusive_points": self.inconclusive_points,
            "tracks": self.tracks.iter().map(|t| serde_json::json!({
                "name": t.name,
                "indices": t.indices,
                "values": pairs(&t.values),
                "band": [t.band.lo(), t.band.hi()],
            })).collect::<Vec<_>>(),
        })
    }

    /// `index,lo,hi` rows for the schedule and every track.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["series", "index", "lo", "hi"]).map_err(io)?;
        let rows = std::iter::once(("schedule", &self.schedule, &self.values))
            .chain(self.tracks.iter().map(|t| (t.name.as_str(), &t.indices, &t.values)));
        for (name, idx, vals) in rows {
            for (i, v) in idx.iter().zip(vals) {
                w.serialize((name, i, v.lo(), v.hi())).map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
