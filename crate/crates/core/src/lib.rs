//! Average and discounted values of reward sequences under general discounts.

pub mod discount;
pub mod error;
pub mod identities;
mod guards;
pub mod interval;
pub mod reward;
mod search;
pub mod sum;
pub mod theorems;
pub mod value;

pub use discount::{
    CustomTable, DiscountFamily, DiscountSpec, GrowthDiagnostic, MonotoneCheck, PatchKind,
    PatchSegment, Support, TailModel, Trend,
};
pub use error::{Error, Result};
pub use guards::Guards;
pub use interval::{IntegerInterval, Interval};
pub use reward::{LimitPrediction, RewardSpec, RunStats, Segment, SequencePair};
pub use value::{
    avg_enclosure, avg_value, avg_value_from, disc_value, disc_value_with, dyadic_schedule, limit_scan,
    subsequence_values, DiscValue, LimitEstimate, Quantity, RunPoint, ScanOptions, Track, ValueOptions, Verdict,
};
pub use theorems::{
    builtin_corpus, construct_prop1_reward, construct_prop2_reward, lemma4_diagnostics, verify_future_avg,
    verify_u_eq_v, verify_u_implies_v, verify_v_implies_u, Check, Construction, CorpusEntry, HorizonMap,
    Lemma4Pattern, Lemma4Report, Premise, PremiseStatus, Scale, TheoremId, VerificationReport,
};
