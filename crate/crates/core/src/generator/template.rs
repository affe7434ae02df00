use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnswerFormat, AnswerType, Focus, GeneratorError, Level, QuestionCategory};
use crate::algebra::{RankKey, RankOrder};

const DEFAULT_BANK: &str = include_str!("../../data/templates.jsonl");

/// What a template asks for, and therefore how its answer is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    FactSubject,
    FactObject,
    FactStart,
    FactEnd,
    FactRange,
    FactDuration,
    ConstrainedSubject,
    ConstrainedObject,
    UnionDuration,
    UnionRange,
    IntersectionRange,
    DifferenceRange,
    OverlapCheck,
    UnionDurationChoice,
    AllenOpen,
    AllenCheck,
    AllenChoice,
    DurationDifference,
    LongerCheck,
    DurationDifferenceChoice,
    DurationSum,
    DurationSumChoice,
    RankStart,
    RankEnd,
    RankDuration,
    RankStartCheck,
    RankEndCheck,
    RankDurationCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperationGroup {
    Fact,
    Constrained,
    Set,
    Allen,
    Duration,
    Ranking,
}

impl Operation {
    pub const ALL: [Operation; 28] = [
        Operation::FactSubject,
        Operation::FactObject,
        Operation::FactStart,
        Operation::FactEnd,
        Operation::FactRange,
        Operation::FactDuration,
        Operation::ConstrainedSubject,
        Operation::ConstrainedObject,
        Operation::UnionDuration,
        Operation::UnionRange,
        Operation::IntersectionRange,
        Operation::DifferenceRange,
        Operation::OverlapCheck,
        Operation::UnionDurationChoice,
        Operation::AllenOpen,
        Operation::AllenCheck,
        Operation::AllenChoice,
        Operation::DurationDifference,
        Operation::LongerCheck,
        Operation::DurationDifferenceChoice,
        Operation::DurationSum,
        Operation::DurationSumChoice,
        Operation::RankStart,
        Operation::RankEnd,
        Operation::RankDuration,
        Operation::RankStartCheck,
        Operation::RankEndCheck,
        Operation::RankDurationCheck,
    ];

    pub fn group(self) -> OperationGroup {
        use Operation::*;
        match self {
            FactSubject | FactObject | FactStart | FactEnd | FactRange | FactDuration => {
                OperationGroup::Fact
            }
            ConstrainedSubject | ConstrainedObject => OperationGroup::Constrained,
            UnionDuration | UnionRange | IntersectionRange | DifferenceRange | OverlapCheck
            | UnionDurationChoice => OperationGroup::Set,
            AllenOpen | AllenCheck | AllenChoice => OperationGroup::Allen,
            DurationDifference
            | LongerCheck
            | DurationDifferenceChoice
            | DurationSum
            | DurationSumChoice => OperationGroup::Duration,
            RankStart | RankEnd | RankDuration | RankStartCheck | RankEndCheck
            | RankDurationCheck => OperationGroup::Ranking,
        }
    }

    /// Context sizes the operation is defined for.
    pub fn arities(self) -> &'static [usize] {
        use Operation::*;
        match self.group() {
            OperationGroup::Fact => &[1],
            OperationGroup::Constrained => &[2, 3],
            OperationGroup::Allen => &[2],
            OperationGroup::Ranking => &[3],
            OperationGroup::Set => &[2, 3],
            OperationGroup::Duration => match self {
                DurationDifference | DurationDifferenceChoice => &[2],
                _ => &[2, 3],
            },
        }
    }

    pub fn focus(self) -> Focus {
        use Operation::*;
        match self {
            FactSubject | FactObject | ConstrainedSubject | ConstrainedObject => Focus::Factual,
            _ => Focus::Temporal,
        }
    }

    pub fn answer_type(self) -> AnswerType {
        use Operation::*;
        match self {
            FactSubject | ConstrainedSubject => AnswerType::Subject,
            FactObject | ConstrainedObject => AnswerType::Object,
            FactStart => AnswerType::TimestampStart,
            FactEnd => AnswerType::TimestampEnd,
            FactRange => AnswerType::TimestampRange,
            FactDuration => AnswerType::Duration,
            _ => match self.group() {
                OperationGroup::Duration => AnswerType::RelationDuration,
                OperationGroup::Ranking => AnswerType::RelationRanking,
                _ => AnswerType::RelationUnionOrIntersection,
            },
        }
    }

    pub fn answer_format(self) -> AnswerFormat {
        use Operation::*;
        match self {
            OverlapCheck | AllenCheck | LongerCheck | RankStartCheck | RankEndCheck
            | RankDurationCheck => AnswerFormat::YesNo,
            UnionDurationChoice | AllenChoice | DurationDifferenceChoice | DurationSumChoice => {
                AnswerFormat::MultipleChoice
            }
            _ => AnswerFormat::Open,
        }
    }

    pub fn uses_negation(self) -> bool {
        self == Operation::DifferenceRange
    }

    /// Key and direction for ranking operations.
    pub fn rank_spec(self) -> Option<(RankKey, RankOrder)> {
        use Operation::*;
        match self {
            RankStart | RankStartCheck => Some((RankKey::Start, RankOrder::Asc)),
            RankEnd | RankEndCheck => Some((RankKey::End, RankOrder::Asc)),
            RankDuration | RankDurationCheck => Some((RankKey::Duration, RankOrder::Desc)),
            _ => None,
        }
    }
}

/// Ordinal position named in a ranking question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrdinalWord {
    First,
    Second,
    Third,
    Last,
}

impl OrdinalWord {
    pub const ALL: [OrdinalWord; 4] = [
        OrdinalWord::First,
        OrdinalWord::Second,
        OrdinalWord::Third,
        OrdinalWord::Last,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OrdinalWord::First => "first",
            OrdinalWord::Second => "second",
            OrdinalWord::Third => "third",
            OrdinalWord::Last => "last",
        }
    }

    /// Competition ordinal the word denotes among `n` ranked facts whose
    /// largest ordinal is `max_ordinal`.
    pub fn value(self, max_ordinal: u32) -> u32 {
        match self {
            OrdinalWord::First => 1,
            OrdinalWord::Second => 2,
            OrdinalWord::Third => 3,
            OrdinalWord::Last => max_ordinal,
        }
    }
}

/// Slots a pattern may use. Unsuffixed fact slots refer to fact 1.
const FACT_SLOTS: [&str; 5] = ["subject", "predicate", "object", "t_start", "t_end"];
const OTHER_SLOTS: [&str; 5] = ["signal", "ordinal", "relation", "unit", "choice_list"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    pub level: Level,
    pub focus: Focus,
    pub answer_type: AnswerType,
    pub answer_format: AnswerFormat,
    pub operation: Operation,
    pub pattern: String,
}

impl Template {
    pub fn category(&self) -> QuestionCategory {
        QuestionCategory::new(self.level, self.focus)
    }

    /// Slot names in the pattern, in order of appearance.
    pub fn slots(&self) -> Result<Vec<String>, String> {
        let mut out = Vec::new();
        let mut rest = self.pattern.as_str();
        while let Some(open) = rest.find('{') {
            let after = &rest[open + 1..];
            let close = after
                .find('}')
                .ok_or_else(|| format!("unclosed slot in `{}`", self.pattern))?;
            out.push(after[..close].to_string());
            rest = &after[close + 1..];
        }
        if rest.contains('}') {
            return Err(format!("stray `}}` in `{}`", self.pattern));
        }
        Ok(out)
    }

    /// Checks the template against its operation and slot vocabulary.
    pub fn validate(&self) -> Result<(), String> {
        let op = self.operation;
        if op.focus() != self.focus {
            return Err(format!("{op:?} is a {} operation", op.focus().name()));
        }
        if op.answer_type() != self.answer_type {
            return Err(format!("{op:?} answers {}", op.answer_type().name()));
        }
        if op.answer_format() != self.answer_format {
            return Err(format!("{op:?} has format {}", op.answer_format().name()));
        }
        let arity = self.level.arity();
        if !op.arities().contains(&arity) {
            return Err(format!("{op:?} is not defined for {} facts", arity));
        }
        for slot in self.slots()? {
            let (base, index) = split_index(&slot);
            let known = FACT_SLOTS.contains(&base) || OTHER_SLOTS.contains(&base);
            if !known {
                return Err(format!("unknown slot {{{slot}}}"));
            }
            let index = index.unwrap_or(1);
            if index == 0 || index > arity {
                return Err(format!("slot {{{slot}}} is out of range for {arity} facts"));
            }
            if self.focus == Focus::Temporal && (base == "t_start" || base == "t_end") {
                return Err(format!(
                    "temporal question reveals a timestamp via {{{slot}}}"
                ));
            }
            if self.level != Level::Simple && (base == "t_start" || base == "t_end") {
                return Err(format!("{{{slot}}} reveals a context timestamp"));
            }
            let needs = |ok: bool| {
                if ok {
                    Ok(())
                } else {
                    Err(format!("{{{slot}}} has no value for {op:?}"))
                }
            };
            match base {
                "signal" => needs(op.group() == OperationGroup::Constrained && index < arity)?,
                "ordinal" => needs(op.group() == OperationGroup::Ranking)?,
                "relation" => needs(op == Operation::AllenCheck)?,
                "choice_list" => needs(op.answer_format() == AnswerFormat::MultipleChoice)?,
                _ => {}
            }
        }
        let slots = self.slots()?;
        if op.answer_format() == AnswerFormat::MultipleChoice
            && !slots.iter().any(|s| s == "choice_list")
        {
            return Err("multiple-choice pattern lacks {choice_list}".into());
        }
        if op == Operation::AllenCheck && !slots.iter().any(|s| s == "relation") {
            return Err("pattern lacks {relation}".into());
        }
        if op.group() == OperationGroup::Ranking && !slots.iter().any(|s| s == "ordinal") {
            return Err("pattern lacks {ordinal}".into());
        }
        if op.group() == OperationGroup::Constrained {
            for i in 1..arity {
                if !slots.iter().any(|s| s == &format!("signal{i}")) {
                    return Err(format!("pattern lacks {{signal{i}}}"));
                }
            }
        }
        Ok(())
    }
}

/// `subject2` -> `("subject", Some(2))`.
pub(crate) fn split_index(slot: &str) -> (&str, Option<usize>) {
    let digits = slot.len() - slot.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return (slot, None);
    }
    let (base, idx) = slot.split_at(slot.len() - digits);
    (base, idx.parse().ok())
}

/// Validated templates indexed by (category, answer type, format).
#[derive(Debug, Clone)]
pub struct TemplateBank {
    templates: Vec<Template>,
    cells: BTreeMap<(QuestionCategory, AnswerType, AnswerFormat), Vec<usize>>,
}

impl TemplateBank {
    /// The bundled bank.
    pub fn builtin() -> TemplateBank {
        TemplateBank::parse(DEFAULT_BANK).expect("bundled template bank is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TemplateBank, GeneratorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GeneratorError::Io {
            context: format!("reading template bank {}", path.display()),
            source,
        })?;
        TemplateBank::parse(&text)
    }

    /// Parses one JSON template per line; blank lines are ignored.
    pub fn parse(text: &str) -> Result<TemplateBank, GeneratorError> {
        let mut templates: Vec<Template> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let t: Template = serde_json::from_str(line).map_err(|e| GeneratorError::Template {
                line: i + 1,
                reason: e.to_string(),
            })?;
            t.validate().map_err(|reason| GeneratorError::Template {
                line: i + 1,
                reason: format!("{}: {reason}", t.id),
            })?;
            if templates.iter().any(|o| o.id == t.id) {
                return Err(GeneratorError::Template {
                    line: i + 1,
                    reason: format!("duplicate template id {}", t.id),
                });
            }
            templates.push(t);
        }
        Ok(TemplateBank::from_templates(templates))
    }

    fn from_templates(templates: Vec<Template>) -> TemplateBank {
        let mut cells: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        for (i, t) in templates.iter().enumerate() {
            cells
                .entry((t.category(), t.answer_type, t.answer_format))
                .or_default()
                .push(i);
        }
        TemplateBank { templates, cells }
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn cell(
        &self,
        category: QuestionCategory,
        answer_type: AnswerType,
        format: AnswerFormat,
    ) -> Vec<&Template> {
        self.cells
            .get(&(category, answer_type, format))
            .map(|ix| ix.iter().map(|&i| &self.templates[i]).collect())
            .unwrap_or_default()
    }

    /// Templates of one category and format whose operation is in `group`.
    pub fn by_group(
        &self,
        category: QuestionCategory,
        group: OperationGroup,
        format: AnswerFormat,
    ) -> Vec<&Template> {
        self.templates
            .iter()
            .filter(|t| {
                t.category() == category
                    && t.answer_format == format
                    && t.operation.group() == group
            })
            .collect()
    }

    /// Number of templates in each populated cell.
    pub fn cell_sizes(&self) -> BTreeMap<(QuestionCategory, AnswerType, AnswerFormat), usize> {
        self.cells.iter().map(|(k, v)| (*k, v.len())).collect()
    }

    /// Every (category, answer type, format) some operation can produce.
    pub fn legal_cells() -> Vec<(QuestionCategory, AnswerType, AnswerFormat)> {
        let mut cells: Vec<_> = Operation::ALL
            .iter()
            .flat_map(|&op| {
                op.arities().iter().map(move |&n| {
                    let level = Level::from_arity(n).expect("arity 1-3");
                    (
                        QuestionCategory::new(level, op.focus()),
                        op.answer_type(),
                        op.answer_format(),
                    )
                })
            })
            .collect();
        cells.sort();
        cells.dedup();
        cells
    }
}
