//! Question-answer generation.
//!
//! A context sample of 1-3 facts picks the question level; each level has a
//! factual and a temporal generation path driven by a [`TemplateBank`].
//! Every answer is computed with [`crate::algebra`] and re-checked by
//! [`audit()`] before the dataset is split and written.

mod audit;
mod build;
mod config;
mod dataset;
mod split;
mod template;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, SignalWord};
use crate::sampler::SamplerError;
use crate::tkg::FactId;

pub use audit::{audit, AuditError};
pub use build::{generate_complex, generate_medium, generate_simple, Draft};
pub use config::{generate_pairs, Counts, GeneratorConfig, SplitRatios};
pub use dataset::{read_dataset, read_jsonl, write_dataset, DatasetFiles, DatasetStats};
pub use split::assign_splits;
pub use template::{Operation, OperationGroup, OrdinalWord, Template, TemplateBank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Simple,
    Medium,
    Complex,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Simple, Level::Medium, Level::Complex];

    /// Number of context facts.
    pub fn arity(self) -> usize {
        match self {
            Level::Simple => 1,
            Level::Medium => 2,
            Level::Complex => 3,
        }
    }

    pub fn from_arity(n: usize) -> Option<Level> {
        match n {
            1 => Some(Level::Simple),
            2 => Some(Level::Medium),
            3 => Some(Level::Complex),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Simple => "simple",
            Level::Medium => "medium",
            Level::Complex => "complex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Focus {
    Factual,
    Temporal,
}

impl Focus {
    pub fn name(self) -> &'static str {
        match self {
            Focus::Factual => "factual",
            Focus::Temporal => "temporal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuestionCategory {
    pub level: Level,
    pub focus: Focus,
}

impl QuestionCategory {
    pub const ALL: [QuestionCategory; 6] = [
        QuestionCategory::new(Level::Simple, Focus::Factual),
        QuestionCategory::new(Level::Simple, Focus::Temporal),
        QuestionCategory::new(Level::Medium, Focus::Factual),
        QuestionCategory::new(Level::Medium, Focus::Temporal),
        QuestionCategory::new(Level::Complex, Focus::Factual),
        QuestionCategory::new(Level::Complex, Focus::Temporal),
    ];

    pub const fn new(level: Level, focus: Focus) -> Self {
        QuestionCategory { level, focus }
    }
}

impl fmt::Display for QuestionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cap = |s: &str| {
            let mut c = s.chars();
            c.next()
                .map(|h| h.to_ascii_uppercase().to_string() + c.as_str())
                .unwrap_or_default()
        };
        write!(f, "{}.{}", cap(self.level.name()), cap(self.focus.name()))
    }
}

/// Reasoning capabilities a question exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Capability {
    /// Temporal constrained retrieval.
    #[serde(rename = "TCR")]
    Tcr,
    /// Timeline position retrieval.
    #[serde(rename = "TPR")]
    Tpr,
    /// Temporal semantic operation.
    #[serde(rename = "TSO")]
    Tso,
    /// Timeline arithmetic operation.
    #[serde(rename = "TAO")]
    Tao,
}

impl Capability {
    pub const ALL: [Capability; 4] = [
        Capability::Tcr,
        Capability::Tpr,
        Capability::Tso,
        Capability::Tao,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Capability::Tcr => "TCR",
            Capability::Tpr => "TPR",
            Capability::Tso => "TSO",
            Capability::Tao => "TAO",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Capability::Tcr => "Temporal Constrained Retrieval",
            Capability::Tpr => "Timeline Position Retrieval",
            Capability::Tso => "Temporal Semantic Operation",
            Capability::Tao => "Timeline Arithmetic Operation",
        }
    }
}

/// The fixed capability set of each category.
pub fn capabilities_for(category: QuestionCategory) -> BTreeSet<Capability> {
    use Capability::*;
    let caps: &[Capability] = match (category.level, category.focus) {
        (Level::Simple, Focus::Factual) => &[Tcr],
        (Level::Simple, Focus::Temporal) => &[Tpr],
        (Level::Medium, Focus::Factual) => &[Tpr, Tso, Tcr],
        (Level::Medium, Focus::Temporal) => &[Tpr, Tao],
        (Level::Complex, Focus::Factual) => &[Tpr, Tcr, Tso, Tao],
        (Level::Complex, Focus::Temporal) => &[Tpr, Tao],
    };
    caps.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerType {
    Subject,
    Object,
    TimestampStart,
    TimestampEnd,
    TimestampRange,
    Duration,
    RelationDuration,
    RelationRanking,
    RelationUnionOrIntersection,
}

impl AnswerType {
    pub const ALL: [AnswerType; 9] = [
        AnswerType::Subject,
        AnswerType::Object,
        AnswerType::TimestampStart,
        AnswerType::TimestampEnd,
        AnswerType::TimestampRange,
        AnswerType::Duration,
        AnswerType::RelationDuration,
        AnswerType::RelationRanking,
        AnswerType::RelationUnionOrIntersection,
    ];

    /// Simple-question types emitted by default.
    pub const SIMPLE_DEFAULT: [AnswerType; 6] = [
        AnswerType::Subject,
        AnswerType::Object,
        AnswerType::TimestampStart,
        AnswerType::TimestampEnd,
        AnswerType::TimestampRange,
        AnswerType::Duration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnswerType::Subject => "subject",
            AnswerType::Object => "object",
            AnswerType::TimestampStart => "timestamp_start",
            AnswerType::TimestampEnd => "timestamp_end",
            AnswerType::TimestampRange => "timestamp_range",
            AnswerType::Duration => "duration",
            AnswerType::RelationDuration => "relation_duration",
            AnswerType::RelationRanking => "relation_ranking",
            AnswerType::RelationUnionOrIntersection => "relation_union_or_intersection",
        }
    }

    /// Focus of a simple question with this answer type.
    pub fn simple_focus(self) -> Focus {
        match self {
            AnswerType::Subject | AnswerType::Object => Focus::Factual,
            _ => Focus::Temporal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerFormat {
    Open,
    YesNo,
    MultipleChoice,
}

impl AnswerFormat {
    pub const ALL: [AnswerFormat; 3] = [
        AnswerFormat::Open,
        AnswerFormat::YesNo,
        AnswerFormat::MultipleChoice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnswerFormat::Open => "open",
            AnswerFormat::YesNo => "yes_no",
            AnswerFormat::MultipleChoice => "multiple_choice",
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// How an answer was computed, kept alongside a generated pair so the audit
/// can recompute it. Not part of the dataset record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub operation: Operation,
    /// Presentation order: `order[i]` is the position in `context_fact_ids`
    /// of the fact the template calls fact `i + 1`.
    pub order: Vec<usize>,
    pub claim: Option<Claim>,
    /// Multiple-choice options, answer included exactly once.
    pub choices: Vec<String>,
}

/// The proposition a yes/no or ranking question asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Relation(crate::algebra::AllenKind),
    Ordinal(OrdinalWord),
}

/// One dataset record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAPair {
    pub id: u64,
    pub question: String,
    pub answer: String,
    pub level: Level,
    pub focus: Focus,
    pub answer_type: AnswerType,
    pub answer_format: AnswerFormat,
    pub capabilities: Vec<Capability>,
    pub context_fact_ids: Vec<FactId>,
    pub signal_words: Vec<SignalWord>,
    pub split: Split,
    pub paraphrased: bool,
    #[serde(skip)]
    pub derivation: Option<Derivation>,
    /// Entity names, timestamps and options inserted into the question.
    #[serde(skip)]
    pub surface_forms: Vec<String>,
}

impl QAPair {
    pub fn category(&self) -> QuestionCategory {
        QuestionCategory::new(self.level, self.focus)
    }

    /// Context fact ids as a sorted set, the unit splits are grouped by.
    pub fn context_key(&self) -> Vec<FactId> {
        let mut key = self.context_fact_ids.clone();
        key.sort();
        key.dedup();
        key
    }
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no template for {category} / {answer_type} / {format}")]
    MissingTemplate {
        category: QuestionCategory,
        answer_type: String,
        format: String,
    },
    #[error("template bank line {line}: {reason}")]
    Template { line: usize, reason: String },
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("self-audit failed for pair {id}: {source}")]
    Audit {
        id: u64,
        #[source]
        source: AuditError,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}
