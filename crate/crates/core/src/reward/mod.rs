//! Bounded reward sequences `r_k ∈ [0,1]`, with binary sequences carried as
//! change-point generators.

mod runs;
mod stats;

use serde::{Deserialize, Serialize};

use crate::discount::Support;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

pub(crate) use runs::Runs;
pub use stats::{LimitPrediction, RunStats, SequencePair};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum RewardSpec {
    Constant { alpha: f64 },
    /// `r_k = pattern[(k−1) mod len]`.
    Periodic { pattern: Vec<f64> },
    /// Flat list `[k_1, m_1, k_2, m_2, ...]`; zeros follow the last `m`.
    ExplicitChangePoints(Vec<u64>),
    /// `1¹ 0² 1³ 0⁴ ...`
    LinearRuns,
    /// `1¹ 0² 1⁴ 0⁸ ...`
    ExponentialRuns,
    Custom { table: Vec<f64> },
}

/// A maximal stretch `[start, end)` of constant reward. `end = None` means
/// the value persists forever.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: u64,
    pub end: Option<u64>,
    pub value: f64,
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl RewardSpec {
    pub fn constant(alpha: f64) -> Result<Self> {
        let r = RewardSpec::Constant { alpha };
        r.validate()?;
        Ok(r)
    }

    /// `1, 0, 1, 0, ...`
    pub fn alternating() -> Self {
        RewardSpec::Periodic {
            pattern: vec![1.0, 0.0],
        }
    }

    pub fn periodic(pattern: Vec<f64>) -> Result<Self> {
        let r = RewardSpec::Periodic { pattern };
        r.validate()?;
        Ok(r)
    }

    pub fn change_points_list(points: Vec<u64>) -> Result<Self> {
        let r = RewardSpec::ExplicitChangePoints(points);
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            RewardSpec::Constant { alpha } if !unit(*alpha) => {
                bad(format!("constant reward {alpha} is outside [0,1]"))
            }
            RewardSpec::Periodic { pattern } if pattern.is_empty() => {
                bad("periodic pattern is empty".into())
            }
            RewardSpec::Periodic { pattern } | RewardSpec::Custom { table: pattern }
                if !pattern.iter().all(|x| unit(*x)) =>
            {
                bad("rewards must lie in [0,1]".into())
            }
            RewardSpec::Custom { table } if table.is_empty() => bad("custom reward table is empty".into()),
            RewardSpec::ExplicitChangePoints(p) => runs::validate_points(p),
            _ => Ok(()),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: RewardSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reward spec serializes")
    }

    /// Reads `k,r` rows with indices 1, 2, ... in order.
    pub fn custom_from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = Vec::new();
        for (row, rec) in rdr.deserialize::<(u64, f64)>().enumerate() {
            let (k, r) = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if k != row as u64 + 1 {
                return Err(Error::Parse(format!("reward row {} has index {k}", row + 1)));
            }
            table.push(r);
        }
        let spec = RewardSpec::Custom { table };
        spec.validate()?;
        Ok(spec)
    }

    pub fn label(&self) -> String {
        match self {
            RewardSpec::Constant { alpha } => format!("constant({alpha})"),
            RewardSpec::Periodic { pattern } => format!("periodic({pattern:?})"),
            RewardSpec::ExplicitChangePoints(p) => format!("change-points({} runs)", p.len() / 2),
            RewardSpec::LinearRuns => "linear-runs".into(),
            RewardSpec::ExponentialRuns => "exponential-runs".into(),
            RewardSpec::Custom { table } => format!("custom({} entries)", table.len()),
        }
    }

    pub(crate) fn runs(&self) -> Option<Runs<'_>> {
        match self {
            RewardSpec::ExplicitChangePoints(p) => Some(Runs::Explicit(p)),
            RewardSpec::LinearRuns => Some(Runs::Linear),
            RewardSpec::ExponentialRuns => Some(Runs::Exponential),
            _ => None,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.runs().is_some()
    }

    /// `r_k`.
    pub fn reward_at(&self, k: u64) -> Result<f64> {
        crate::discount::check_index(k)?;
        Ok(match self {
            RewardSpec::Constant { alpha } => *alpha,
            RewardSpec::Periodic { pattern } => pattern[((k - 1) % pattern.len() as u64) as usize],
            RewardSpec::Custom { table } => *table.get((k - 1) as usize).ok_or(Error::TableExhausted {
                index: k,
                len: table.len() as u64,
            })?,
            _ => {
                if self.runs().unwrap().locate(k).in_one {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// `(k_n, m_n)` of a binary reward.
    pub fn change_points(&self, n: u64) -> Result<(u64, u64)> {
        let runs = self
            .runs()
            .ok_or_else(|| Error::InvalidParameter(format!("{} has no change points", self.label())))?;
        if n == 0 {
            return Err(Error::InvalidIndex("runs are numbered from 1".into()));
        }
        runs.run(n).ok_or_else(|| match runs.count() {
            Some(c) if n > c => Error::InvalidIndex(format!("only {c} runs")),
            _ => Error::Overflow(format!("run {n} lies beyond u64 indices")),
        })
    }

    /// Number of ones in `[k, m]` for binary rewards.
    pub fn ones_in(&self, k: u64, m: u64) -> Option<u128> {
        let runs = self.runs()?;
        if k > m {
            return Some(0);
        }
        Some(runs.ones_upto(m) - runs.ones_upto(k.saturating_sub(1)))
    }

    /// `Σ_{i=k}^{m} r_i`; exact for binary and rational-free families.
    pub fn partial_sum(&self, k: u64, m: u64) -> Result<f64> {
        crate::discount::check_index(k)?;
        if k > m {
            return Ok(0.0);
        }
        Ok(match self {
            RewardSpec::Constant { alpha } => alpha * (m - k + 1) as f64,
            RewardSpec::Periodic { pattern } => {
                let p = pattern.len() as u64;
                let mut prefix = CompensatedSum::new();
                let mut prefixes = Vec::with_capacity(pattern.len() + 1);
                prefixes.push(0.0);
                for &x in pattern {
                    prefix.add(x);
                    prefixes.push(prefix.value());
                }
                let full = prefixes[pattern.len()];
                let upto = |j: u64| -> (f64, f64) { ((j / p) as f64 * full, prefixes[(j % p) as usize]) };
                let (a1, a2) = upto(m);
                let (b1, b2) = upto(k - 1);
                let mut s = CompensatedSum::new();
                for x in [a1, a2, -b1, -b2] {
                    s.add(x);
                }
                s.value()
            }
            RewardSpec::Custom { table } => {
                if m > table.len() as u64 {
                    return Err(Error::TableExhausted {
                        index: m,
                        len: table.len() as u64,
                    });
                }
                table[(k - 1) as usize..m as usize].iter().copied().collect::<CompensatedSum>().value()
            }
            _ => self.ones_in(k, m).unwrap() as f64,
        })
    }

    /// Constant-value stretches starting at `from`. The iterator ends
    /// without an unbounded segment when the data runs out (custom tables,
    /// runs beyond `u64`).
    pub fn segments(&self, from: u64) -> SegmentIter<'_> {
        SegmentIter {
            spec: self,
            pos: from.max(1),
            done: false,
        }
    }

    /// Bounds on `r_i` over `i ≥ from` restricted to `support`.
    pub fn tail_bounds(&self, from: u64, support: Support) -> (f64, f64) {
        let keep = |i: u64| support == Support::All || i % 2 == 0;
        match self {
            RewardSpec::Constant { alpha } => (*alpha, *alpha),
            RewardSpec::Periodic { pattern } => {
                let span = 2 * pattern.len() as u64;
                let vals = (from..from + span).filter(|&i| keep(i)).map(|i| pattern[((i - 1) % (span / 2)) as usize]);
                vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
            }
            RewardSpec::ExplicitChangePoints(p) => match p.last() {
                Some(&last) if from < last => (0.0, 1.0),
                _ => (0.0, 0.0),
            },
            _ => (0.0, 1.0),
        }
    }
}

pub struct SegmentIter<'a> {
    spec: &'a RewardSpec,
    pos: u64,
    done: bool,
}

impl Iterator for SegmentIter<'_> {
    type Item = Segment;

    fn next(&mut self) -> Option<Segment> {
        if self.done {
            return None;
        }
        let pos = self.pos;
        let seg = match self.spec {
            RewardSpec::Constant { alpha } => Segment {
                start: pos,
                end: None,
                value: *alpha,
            },
            RewardSpec::Periodic { pattern } => {
                let p = pattern.len() as u64;
                let v = pattern[((pos - 1) % p) as usize];
                let run = (1..p).take_while(|d| pattern[((pos - 1 + d) % p) as usize] == v).count() as u64 + 1;
                Segment {
                    start: pos,
                    end: if run == p { None } else { pos.checked_add(run) },
                    value: v,
                }
            }
            RewardSpec::Custom { table } => {
                let v = *table.get((pos - 1) as usize)?;
                Segment {
                    start: pos,
                    end: Some(pos + 1),
                    value: v,
                }
            }
            _ => {
                let runs = self.spec.runs().unwrap();
                let at = runs.locate(pos);
                if at.in_one {
                    let (_, m) = runs.run(at.run).unwrap();
                    Segment {
                        start: pos,
                        end: Some(m),
                        value: 1.0,
                    }
                } else {
                    match runs.run(at.run + 1) {
                        Some((k, _)) => Segment {
                            start: pos,
                            end: Some(k),
                            value: 0.0,
                        },
                        None if runs.count().is_some() => Segment {
                            start: pos,
                            end: None,
                            value: 0.0,
                        },
                        None => {
                            self.done = true;
                            return None;
                        }
                    }
                }
            }
        };
        match seg.end {
            Some(e) => self.pos = e,
            None => self.done = true,
        }
        Some(seg)
    }
}
