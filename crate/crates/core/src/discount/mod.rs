//! Discount sequences: exact `γ_k`, rigorous tail enclosures `Γ_k`, and the
//! horizon metrics derived from them.

mod family;
mod horizon;
mod patched;
mod tails;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub(crate) use family::Frame;
pub use horizon::{GrowthDiagnostic, MonotoneCheck, Trend};
pub use patched::DEFAULT_PATCH_RATIO;

/// Which indices may carry positive weight. Lets value computations ignore
/// rewards sitting on zero-weight indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    All,
    EvenOnly,
}

/// Tail continuation of a custom table past its last entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum TailModel {
    /// `γ_k = γ_L g^{k-L}` for `k > L`.
    Geometric { g: f64 },
    /// `γ_k = γ_L (k/L)^{-1-eps}` for `k > L`.
    Power { eps: f64 },
}

/// Backward partial sums of a custom table, filled once on first use.
#[derive(Default)]
pub(crate) struct SuffixCache(OnceLock<Vec<Interval>>);

impl Clone for SuffixCache {
    fn clone(&self) -> Self {
        SuffixCache::default()
    }
}

impl std::fmt::Debug for SuffixCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SuffixCache")
    }
}

impl PartialEq for SuffixCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// Table-driven discount: `γ_k = table[k-1]` for `k ≤ L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomTable {
    pub table: Vec<f64>,
    #[serde(default)]
    pub tail: Option<TailModel>,
    #[serde(skip)]
    pub(crate) suffix: SuffixCache,
}

impl CustomTable {
    pub fn new(table: Vec<f64>, tail: Option<TailModel>) -> Self {
        CustomTable {
            table,
            tail,
            suffix: SuffixCache::default(),
        }
    }

    /// Reads `k,gamma` rows. Indices must run 1, 2, ... without gaps.
    pub fn from_csv<R: std::io::Read>(reader: R, tail: Option<TailModel>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = Vec::new();
        for (row, rec) in rdr.deserialize::<(u64, f64)>().enumerate() {
            let (k, g) = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if k != row as u64 + 1 {
                return Err(Error::Parse(format!(
                    "custom table row {} has index {k}, expected {}",
                    row + 1,
                    row + 1
                )));
            }
            table.push(g);
        }
        Ok(CustomTable::new(table, tail))
    }

    fn suffix(&self) -> &[Interval] {
        self.suffix.0.get_or_init(|| {
            let mut acc = Interval::ZERO;
            let mut out = vec![Interval::ZERO; self.table.len() + 1];
            for (i, &g) in self.table.iter().enumerate().rev() {
                acc = acc + Interval::point(g);
                out[i] = acc;
            }
            out
        })
    }
}

/// Kind of one piece of a patched discount.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PatchKind {
    /// `γ_k = c g^{k-start}`
    Geometric { g: f64 },
    /// `γ_k = c / (k ln² k)`
    Harmonic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchSegment {
    pub start: u64,
    pub kind: PatchKind,
    pub coeff: f64,
}

/// The discount families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum DiscountFamily {
    /// 1 up to `m`, 0 afterwards.
    Finite { m: u64 },
    /// `g^k`, `0 < g < 1`.
    Geometric { g: f64 },
    /// `1/(k(k+1))`
    Quadratic,
    /// `k^{-1-eps}`
    Power { eps: f64 },
    /// `1/(k ln² k)` for `k ≥ 2`, with `γ_1 := γ_2`.
    HarmonicLike,
    /// `4^{-⌈log₂ k⌉}`
    StepLog,
    /// Zero at odd `k`; `γ_{2j} = inner γ_j`.
    AlternatingZero { inner: Box<DiscountFamily> },
    /// `(2 + cos(π√(2k)))/k²`
    CosineModulated,
    Patched { segments: Vec<PatchSegment> },
    Custom(CustomTable),
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

/// A discount family plus a positive multiplier.
///
/// Horizon metrics and discounted values are ratios, so they never depend
/// on `scale`; internally everything is computed on the unscaled family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    #[serde(flatten)]
    pub family: DiscountFamily,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
}

impl From<DiscountFamily> for DiscountSpec {
    fn from(family: DiscountFamily) -> Self {
        DiscountSpec { family, scale: 1.0 }
    }
}

impl DiscountSpec {
    pub fn new(family: DiscountFamily) -> Result<Self> {
        Self::with_scale(family, 1.0)
    }

    pub fn with_scale(family: DiscountFamily, scale: f64) -> Result<Self> {
        let spec = DiscountSpec { family, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn finite(m: u64) -> Result<Self> {
        Self::new(DiscountFamily::Finite { m })
    }

    pub fn geometric(g: f64) -> Result<Self> {
        Self::new(DiscountFamily::Geometric { g })
    }

    pub fn quadratic() -> Self {
        DiscountFamily::Quadratic.into()
    }

    pub fn power(eps: f64) -> Result<Self> {
        Self::new(DiscountFamily::Power { eps })
    }

    pub fn harmonic_like() -> Self {
        DiscountFamily::HarmonicLike.into()
    }

    pub fn step_log() -> Self {
        DiscountFamily::StepLog.into()
    }

    pub fn cosine_modulated() -> Self {
        DiscountFamily::CosineModulated.into()
    }

    pub fn alternating_zero(inner: DiscountFamily) -> Result<Self> {
        Self::new(DiscountFamily::AlternatingZero {
            inner: Box::new(inner),
        })
    }

    pub fn custom(table: CustomTable) -> Result<Self> {
        Self::new(DiscountFamily::Custom(table))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: DiscountSpec =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("discount spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive and finite, got {}",
                self.scale
            )));
        }
        self.family.validate()
    }

    /// Short human-readable name, e.g. `geometric(0.5)`.
    pub fn label(&self) -> String {
        let base = self.family.label();
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{base}", self.scale)
        }
    }

    /// `γ_k`.
    pub fn gamma(&self, k: u64) -> Result<f64> {
        check_index(k)?;
        Ok(self.family.gamma_point(k)? * self.scale)
    }

    /// Enclosure of `γ_k`.
    pub fn gamma_enclosure(&self, k: u64) -> Result<Interval> {
        check_index(k)?;
        Ok(self.scaled(self.family.gamma_enc(k)?))
    }

    /// Enclosure of `Γ_k = Σ_{i≥k} γ_i`.
    pub fn gamma_tail(&self, k: u64) -> Result<Interval> {
        check_index(k)?;
        Ok(self.scaled(self.family.tail_enc(k)?))
    }

    /// `δ_j = γ_j − γ_{j+1}`.
    pub fn delta(&self, j: u64) -> Result<Interval> {
        Ok(self.gamma_enclosure(j)? - self.gamma_enclosure(j + 1)?)
    }

    /// Families whose construction guarantees `γ_{k+1} ≤ γ_k`. `None` when
    /// only a scan can tell.
    pub fn documented_monotone(&self) -> Option<bool> {
        self.family.documented_monotone()
    }

    pub(crate) fn frame_at(&self, k: u64) -> Frame<'_> {
        self.family.frame_at(k)
    }

    fn scaled(&self, x: Interval) -> Interval {
        if self.scale == 1.0 {
            x
        } else {
            x.mul_f64(self.scale)
        }
    }
}

pub(crate) fn check_index(k: u64) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidIndex("indices start at 1".into()))
    } else {
        Ok(())
    }
}

impl DiscountFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            DiscountFamily::Finite { m } if *m == 0 => bad("finite horizon m must be ≥ 1".into()),
            DiscountFamily::Geometric { g } if !(*g > 0.0 && *g < 1.0) => {
                bad(format!("geometric factor must satisfy 0 < g < 1, got {g}"))
            }
            DiscountFamily::Power { eps } if !(eps.is_finite() && *eps > 0.0) => {
                bad(format!("power exponent eps must be > 0, got {eps}"))
            }
            DiscountFamily::AlternatingZero { inner } => inner.validate(),
            DiscountFamily::Patched { segments } => patched::validate(segments),
            DiscountFamily::Custom(t) => {
                if t.table.is_empty() {
                    return bad("custom table is empty".into());
                }
                if let Some(bad_g) = t.table.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
                    return bad(format!("custom table entry {bad_g} is not a finite nonnegative number"));
                }
                match &t.tail {
                    Some(TailModel::Geometric { g }) if !(*g > 0.0 && *g < 1.0) => {
                        return bad(format!("tail geometric factor must satisfy 0 < g < 1, got {g}"));
                    }
                    Some(TailModel::Power { eps }) if !(eps.is_finite() && *eps > 0.0) => {
                        return bad(format!("tail power eps must be > 0, got {eps}"));
                    }
                    Some(_) if *t.table.last().unwrap() <= 0.0 => {
                        return bad("a tail model needs a positive last table entry".into());
                    }
                    _ => {}
                }
                if t.table.iter().all(|g| *g == 0.0) {
                    return bad("custom table has Γ_1 = 0".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DiscountFamily::Finite { m } => format!("finite({m})"),
            DiscountFamily::Geometric { g } => format!("geometric({g})"),
            DiscountFamily::Quadratic => "quadratic".into(),
            DiscountFamily::Power { eps } => format!("power({eps})"),
            DiscountFamily::HarmonicLike => "harmonic-like".into(),
            DiscountFamily::StepLog => "step-log".into(),
            DiscountFamily::AlternatingZero { inner } => {
                format!("alternating-zero({})", inner.label())
            }
            DiscountFamily::CosineModulated => "cosine-modulated".into(),
            DiscountFamily::Patched { segments } => format!("patched({} segments)", segments.len()),
            DiscountFamily::Custom(t) => format!("custom({} entries)", t.table.len()),
        }
    }

    pub fn documented_monotone(&self) -> Option<bool> {
        match self {
            DiscountFamily::AlternatingZero { .. } | DiscountFamily::CosineModulated => Some(false),
            DiscountFamily::Custom(_) => None,
            _ => Some(true),
        }
    }

    pub(crate) fn support(&self) -> Support {
        match self {
            DiscountFamily::AlternatingZero { .. } => Support::EvenOnly,
            _ => Support::All,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape_is_family_params_scale() {
        let spec = DiscountSpec::with_scale(DiscountFamily::Geometric { g: 0.5 }, 3.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&spec.to_json()).unwrap();
        assert_eq!(v["family"], "geometric");
        assert_eq!(v["params"]["g"], 0.5);
        assert_eq!(v["scale"], 3.0);
        let back = DiscountSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unit_family_without_params_parses() {
        let spec = DiscountSpec::from_json(r#"{"family":"quadratic"}"#).unwrap();
        assert_eq!(spec.family, DiscountFamily::Quadratic);
        assert_eq!(spec.scale, 1.0);
    }

    #[test]
    fn custom_table_json_with_tail() {
        let js = r#"{"family":"custom","params":{"table":[0.5,0.25,0.125],"tail":{"type":"geometric","params":{"g":0.5}}}}"#;
        let spec = DiscountSpec::from_json(js).unwrap();
        match &spec.family {
            DiscountFamily::Custom(t) => {
                assert_eq!(t.table.len(), 3);
                assert_eq!(t.tail, Some(TailModel::Geometric { g: 0.5 }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(DiscountSpec::geometric(1.0).is_err());
        assert!(DiscountSpec::geometric(0.0).is_err());
        assert!(DiscountSpec::power(0.0).is_err());
        assert!(DiscountSpec::power(-1.0).is_err());
        assert!(DiscountSpec::finite(0).is_err());
        assert!(DiscountSpec::with_scale(DiscountFamily::Quadratic, 0.0).is_err());
        assert!(DiscountSpec::from_json(r#"{"family":"nonsense"}"#).is_err());
    }

    #[test]
    fn custom_csv_requires_contiguous_indices() {
        let ok = "k,gamma\n1,0.5\n2,0.25\n";
        let t = CustomTable::from_csv(ok.as_bytes(), None).unwrap();
        assert_eq!(t.table, vec![0.5, 0.25]);
        let gap = "k,gamma\n1,0.5\n3,0.25\n";
        assert!(CustomTable::from_csv(gap.as_bytes(), None).is_err());
    }

    #[test]
    fn index_zero_is_rejected() {
        assert!(DiscountSpec::quadratic().gamma(0).is_err());
        assert!(DiscountSpec::quadratic().gamma_tail(0).is_err());
    }
}
