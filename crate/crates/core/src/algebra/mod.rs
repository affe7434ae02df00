//! Interval algebra over fact time ranges: Allen relations, temporal
//! semantic operations, set operations, durations and ranking.

pub mod allen;
mod duration;
mod rank;
mod sets;
mod tso;

use thiserror::Error;

use crate::tkg::FactId;

pub use allen::{
    allen_relation, dictionary_tsv, lookup, signature, AllenKind, AllenRelation, AllenSignature,
    PairType, ALLEN_DICTIONARY,
};
pub use duration::{compare_duration, delta, duration, Duration, DurationDelta, Magnitude};
pub use rank::{rank_facts, RankKey, RankOrder};
pub use sets::{intersection, negation, union, IntervalSet};
pub use tso::{tso, SignalWord, TsoRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unknown signal word `{0}`")]
    UnknownSignalWord(String),
    #[error("signal word `{0}` names an Allen relation, not a temporal semantic operation")]
    NoTsoRule(SignalWord),
    #[error("`{0}` leaves no room on the timeline for this range")]
    DegenerateConstraint(SignalWord),
    #[error("need at least {needed} facts, got {got}")]
    TooFewFacts { needed: usize, got: usize },
    #[error("fact {0} has no temporal information")]
    Timeless(FactId),
}
