use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::template::{split_index, OperationGroup};
use super::{
    capabilities_for, AnswerFormat, Claim, Derivation, Focus, GeneratorConfig, GeneratorError,
    Level, Operation, OrdinalWord, QAPair, QuestionCategory, Split, Template, TemplateBank,
};
use crate::algebra::{
    allen_relation, compare_duration, duration, intersection, rank_facts, union, AllenKind,
    Duration, IntervalSet, SignalWord,
};
use crate::tkg::{Fact, FactId, TemporalKG};

/// A generated pair before ids and splits are assigned.
pub type Draft = QAPair;

/// Number of sibling or random facts tried when building distractors.
const DISTRACTOR_PROBES: usize = 48;

pub(crate) fn yes_no(b: bool) -> String {
    if b { "Yes" } else { "No" }.to_string()
}

/// Label of a ranked fact: its subject, or the whole statement when the
/// subjects alone do not tell the facts apart.
pub(crate) fn rank_label(kg: &TemporalKG, fact: &Fact, all: &[Fact]) -> String {
    let clash = all
        .iter()
        .filter(|o| o.id != fact.id && o.subject == fact.subject)
        .count()
        > 0;
    if clash {
        format!(
            "{} {} {}",
            kg.entity_name(fact.subject),
            kg.relation_name(fact.predicate),
            kg.entity_name(fact.object)
        )
    } else {
        kg.entity_name(fact.subject).to_string()
    }
}

/// "a, b, c or d"
pub(crate) fn choice_list(choices: &[String]) -> String {
    match choices {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} or {}", init.join(", "), last),
    }
}

/// Answer of `op` over facts in presentation order.
fn evaluate(op: Operation, kg: &TemporalKG, p: &[Fact], claim: Option<Claim>) -> Option<String> {
    use Operation::*;
    let gran = kg.granularity();
    let intervals: Vec<_> = p.iter().map(|f| f.interval).collect();
    let first = p.first()?;
    Some(match op {
        FactSubject => kg.entity_name(first.subject).to_string(),
        FactObject => kg.entity_name(first.object).to_string(),
        FactStart => kg.render_time(first.interval.start()),
        FactEnd => kg.render_time(first.interval.end()),
        FactRange => first.interval.render(gran),
        FactDuration => duration(&first.interval).to_string(),
        ConstrainedSubject => kg.entity_name(p.last()?.subject).to_string(),
        ConstrainedObject => kg.entity_name(p.last()?.object).to_string(),
        UnionDuration | UnionDurationChoice => union(&intervals).total_duration().to_string(),
        UnionRange => union(&intervals).render(gran),
        IntersectionRange => intersection(&intervals).render(gran),
        DifferenceRange => {
            let rest = union(&intervals[1..]);
            IntervalSet::from_intervals([first.interval])
                .intersection(&rest.negation())
                .render(gran)
        }
        OverlapCheck => yes_no(!intersection(&intervals).is_empty()),
        AllenOpen | AllenChoice => allen_relation(&intervals[0], &intervals[1])
            .kind
            .phrase()
            .into(),
        AllenCheck => {
            let Some(Claim::Relation(k)) = claim else {
                return None;
            };
            yes_no(allen_relation(&intervals[0], &intervals[1]).kind == k)
        }
        DurationDifference | DurationDifferenceChoice => {
            compare_duration(&intervals[0], &intervals[1])
                .magnitude
                .to_string()
        }
        LongerCheck => yes_no(
            intervals[1..]
                .iter()
                .all(|o| compare_duration(&intervals[0], o).sign == 1),
        ),
        DurationSum | DurationSumChoice => intervals
            .iter()
            .map(duration)
            .fold(Duration::Finite(0), |a, b| a + b)
            .to_string(),
        RankStart | RankEnd | RankDuration => {
            let Some(Claim::Ordinal(w)) = claim else {
                return None;
            };
            let (key, order) = op.rank_spec()?;
            let ranked = rank_facts(p, key, order).ok()?;
            let max = ranked.iter().map(|r| r.1).max()?;
            let hits: Vec<&Fact> = ranked
                .iter()
                .filter(|r| r.1 == w.value(max))
                .map(|r| &r.0)
                .collect();
            match hits.as_slice() {
                [only] => rank_label(kg, only, p),
                _ => return None,
            }
        }
        RankStartCheck | RankEndCheck | RankDurationCheck => {
            let Some(Claim::Ordinal(w)) = claim else {
                return None;
            };
            let (key, order) = op.rank_spec()?;
            let ranked = rank_facts(p, key, order).ok()?;
            let max = ranked.iter().map(|r| r.1).max()?;
            let own = ranked.iter().find(|r| r.0.id == first.id)?.1;
            yes_no(own == w.value(max))
        }
    })
}

/// Words that may name ordinal `value` when the largest ordinal is `max`.
fn words_for(value: u32, max: u32) -> Vec<OrdinalWord> {
    OrdinalWord::ALL
        .into_iter()
        .filter(|w| w.value(max) == value)
        .collect()
}

/// Picks the claim a ranking or relation-check question makes.
fn choose_claim(op: Operation, p: &[Fact], rng: &mut impl Rng) -> Option<Option<Claim>> {
    use Operation::*;
    match op {
        AllenCheck => {
            let truth = allen_relation(&p[0].interval, &p[1].interval).kind;
            let kind = if rng.random_bool(0.5) {
                truth
            } else {
                let others: Vec<AllenKind> =
                    AllenKind::ALL.into_iter().filter(|&k| k != truth).collect();
                *others.choose(rng)?
            };
            Some(Some(Claim::Relation(kind)))
        }
        RankStart | RankEnd | RankDuration => {
            let (key, order) = op.rank_spec()?;
            let ranked = rank_facts(p, key, order).ok()?;
            let max = ranked.iter().map(|r| r.1).max()?;
            let unique: Vec<u32> = ranked
                .iter()
                .map(|r| r.1)
                .filter(|&o| ranked.iter().filter(|r| r.1 == o).count() == 1)
                .collect();
            let value = *unique.choose(rng)?;
            let word = *words_for(value, max).choose(rng)?;
            Some(Some(Claim::Ordinal(word)))
        }
        RankStartCheck | RankEndCheck | RankDurationCheck => {
            let (key, order) = op.rank_spec()?;
            let ranked = rank_facts(p, key, order).ok()?;
            let max = ranked.iter().map(|r| r.1).max()?;
            let own = ranked.iter().find(|r| r.0.id == p[0].id)?.1;
            let pool: Vec<OrdinalWord> = if rng.random_bool(0.5) {
                words_for(own, max)
            } else {
                OrdinalWord::ALL
                    .into_iter()
                    .filter(|w| w.value(max) != own)
                    .collect()
            };
            Some(Some(Claim::Ordinal(*pool.choose(rng)?)))
        }
        _ => Some(None),
    }
}

/// Three wrong options for a multiple-choice question, or `None` if the
/// answer is not something options can be built for.
fn distractors(
    op: Operation,
    kg: &TemporalKG,
    p: &[Fact],
    answer: &str,
    rng: &mut impl Rng,
) -> Option<Vec<String>> {
    if op == Operation::AllenChoice {
        let mut kinds: Vec<&str> = AllenKind::ALL
            .iter()
            .map(|k| k.phrase())
            .filter(|ph| *ph != answer)
            .collect();
        kinds.shuffle(rng);
        return Some(kinds.into_iter().take(3).map(str::to_string).collect());
    }
    let truth: u64 = answer.parse().ok()?;
    let mut found: Vec<u64> = Vec::new();
    let consider = |v: Option<String>, found: &mut Vec<u64>| {
        if let Some(v) = v.and_then(|s| s.parse::<u64>().ok()) {
            if v != truth && !found.contains(&v) {
                found.push(v);
            }
        }
    };
    let context: Vec<FactId> = p.iter().map(|f| f.id).collect();
    for _ in 0..DISTRACTOR_PROBES {
        if found.len() >= 3 {
            break;
        }
        let pos = rng.random_range(0..p.len());
        let entity = if rng.random_bool(0.5) {
            p[pos].subject
        } else {
            p[pos].object
        };
        let Some(&sib) = kg.facts_of(entity).choose(rng) else {
            continue;
        };
        if context.contains(&sib) {
            continue;
        }
        let mut swapped = p.to_vec();
        swapped[pos] = *kg.fact(sib)?;
        consider(evaluate(op, kg, &swapped, None), &mut found);
    }
    for _ in 0..DISTRACTOR_PROBES {
        if found.len() >= 3 || kg.is_empty() {
            break;
        }
        let pos = rng.random_range(0..p.len());
        let other = kg.facts()[rng.random_range(0..kg.len())];
        if context.contains(&other.id) {
            continue;
        }
        let mut swapped = p.to_vec();
        swapped[pos] = other;
        consider(evaluate(op, kg, &swapped, None), &mut found);
    }
    let mut k = 1u64;
    while found.len() < 3 {
        for v in [truth.checked_add(k), truth.checked_sub(k)]
            .into_iter()
            .flatten()
        {
            if found.len() < 3 && v != truth && !found.contains(&v) {
                found.push(v);
            }
        }
        k += 1;
    }
    found.shuffle(rng);
    Some(found.into_iter().take(3).map(|v| v.to_string()).collect())
}

/// Fills `template` for facts `p` (presentation order, `order` mapping back
/// into the sample). Returns `None` when the operation has no well-defined
/// answer for these facts.
fn instantiate(
    template: &Template,
    kg: &TemporalKG,
    sample: &[Fact],
    order: Vec<usize>,
    rng: &mut impl Rng,
) -> Option<QAPair> {
    let op = template.operation;
    let p: Vec<Fact> = order.iter().map(|&i| sample[i]).collect();
    let temporal_needed = op.group() != OperationGroup::Fact;
    if temporal_needed && p.iter().any(|f| !f.has_time) {
        return None;
    }
    let signals: Vec<SignalWord> = if op.group() == OperationGroup::Constrained {
        let target = p.last()?;
        p[..p.len() - 1]
            .iter()
            .map(|a| {
                allen_relation(&target.interval, &a.interval)
                    .semantic
                    .parse()
                    .ok()
            })
            .collect::<Option<_>>()?
    } else {
        Vec::new()
    };
    let claim = choose_claim(op, &p, rng)?;
    let answer = evaluate(op, kg, &p, claim)?;
    let choices = if op.answer_format() == AnswerFormat::MultipleChoice {
        let mut c = distractors(op, kg, &p, &answer, rng)?;
        let at = rng.random_range(0..=c.len());
        c.insert(at, answer.clone());
        c
    } else {
        Vec::new()
    };

    let gran = kg.granularity();
    let mut surface_forms: Vec<String> = Vec::new();
    let mut question = String::new();
    let mut rest = template.pattern.as_str();
    while let Some(open) = rest.find('{') {
        question.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}')?;
        let slot = &after[..close];
        rest = &after[close + 1..];
        let (base, index) = split_index(slot);
        let i = index.unwrap_or(1) - 1;
        let value = match base {
            "subject" => kg.entity_name(p.get(i)?.subject).to_string(),
            "object" => kg.entity_name(p.get(i)?.object).to_string(),
            "predicate" => kg.relation_name(p.get(i)?.predicate).to_string(),
            "t_start" => p.get(i)?.interval.start().render(gran),
            "t_end" => p.get(i)?.interval.end().render(gran),
            "signal" => signals.get(i)?.phrase().to_string(),
            "ordinal" => match claim? {
                Claim::Ordinal(w) => w.as_str().to_string(),
                Claim::Relation(_) => return None,
            },
            "relation" => match claim? {
                Claim::Relation(k) => k.phrase().to_string(),
                Claim::Ordinal(_) => return None,
            },
            "unit" => gran.plural().to_string(),
            "choice_list" => choice_list(&choices),
            _ => return None,
        };
        if matches!(base, "subject" | "object" | "t_start" | "t_end") {
            surface_forms.push(value.clone());
        }
        question.push_str(&value);
    }
    question.push_str(rest);
    surface_forms.extend(choices.iter().cloned());
    surface_forms.sort();
    surface_forms.dedup();

    let category = template.category();
    Some(QAPair {
        id: 0,
        question,
        answer,
        level: template.level,
        focus: template.focus,
        answer_type: template.answer_type,
        answer_format: template.answer_format,
        capabilities: capabilities_for(category).into_iter().collect(),
        context_fact_ids: sample.iter().map(|f| f.id).collect(),
        signal_words: signals,
        split: Split::default(),
        paraphrased: false,
        derivation: Some(Derivation {
            operation: op,
            order,
            claim,
            choices,
        }),
        surface_forms,
    })
}

fn load(kg: &TemporalKG, ids: &[FactId], level: Level) -> Result<Vec<Fact>, GeneratorError> {
    if ids.len() != level.arity() {
        return Err(GeneratorError::Config(format!(
            "{} questions need {} facts, got {}",
            level.name(),
            level.arity(),
            ids.len()
        )));
    }
    ids.iter()
        .map(|&id| {
            kg.fact(id)
                .copied()
                .ok_or_else(|| GeneratorError::Config(format!("fact {id} is not in the graph")))
        })
        .collect()
}

fn missing(
    category: QuestionCategory,
    what: impl Into<String>,
    format: AnswerFormat,
) -> GeneratorError {
    GeneratorError::MissingTemplate {
        category,
        answer_type: what.into(),
        format: format.name().to_string(),
    }
}

/// Tries the templates in random order until one yields an answer.
fn first_fit(
    mut candidates: Vec<&Template>,
    kg: &TemporalKG,
    sample: &[Fact],
    order: &[usize],
    rng: &mut impl Rng,
) -> Option<QAPair> {
    candidates.shuffle(rng);
    candidates
        .into_iter()
        .find_map(|t| instantiate(t, kg, sample, order.to_vec(), rng))
}

/// Factual questions constrained by the other context facts.
fn constrained(
    kg: &TemporalKG,
    sample: &[Fact],
    bank: &TemplateBank,
    level: Level,
    rng: &mut impl Rng,
) -> Result<Vec<QAPair>, GeneratorError> {
    let category = QuestionCategory::new(level, Focus::Factual);
    let mut out = Vec::new();
    for at in [super::AnswerType::Subject, super::AnswerType::Object] {
        let cell = bank.cell(category, at, AnswerFormat::Open);
        if cell.is_empty() {
            return Err(missing(category, at.name(), AnswerFormat::Open));
        }
        let target = rng.random_range(0..sample.len());
        let mut order: Vec<usize> = (0..sample.len()).filter(|&i| i != target).collect();
        order.push(target);
        out.extend(first_fit(cell, kg, sample, &order, rng));
    }
    Ok(out)
}

/// One question per format for a temporal operation group.
#[allow(clippy::too_many_arguments)]
fn temporal_group(
    kg: &TemporalKG,
    sample: &[Fact],
    bank: &TemplateBank,
    cfg: &GeneratorConfig,
    level: Level,
    group: OperationGroup,
    formats: &[AnswerFormat],
    rng: &mut impl Rng,
) -> Result<Vec<QAPair>, GeneratorError> {
    let category = QuestionCategory::new(level, Focus::Temporal);
    let order: Vec<usize> = (0..sample.len()).collect();
    let mut out = Vec::new();
    for &format in formats {
        let cell: Vec<&Template> = bank
            .by_group(category, group, format)
            .into_iter()
            .filter(|t| cfg.enable_negation || !t.operation.uses_negation())
            .collect();
        if cell.is_empty() {
            return Err(missing(category, format!("{group:?} operations"), format));
        }
        out.extend(first_fit(cell, kg, sample, &order, rng));
    }
    Ok(out)
}

/// One question per configured simple answer type.
pub fn generate_simple(
    kg: &TemporalKG,
    fact: FactId,
    bank: &TemplateBank,
    cfg: &GeneratorConfig,
    rng: &mut impl Rng,
) -> Result<Vec<QAPair>, GeneratorError> {
    let sample = load(kg, &[fact], Level::Simple)?;
    let mut out = Vec::new();
    for &at in &cfg.simple_answer_types {
        let category = QuestionCategory::new(Level::Simple, at.simple_focus());
        let cell = bank.cell(category, at, AnswerFormat::Open);
        if cell.is_empty() {
            return Err(missing(category, at.name(), AnswerFormat::Open));
        }
        out.extend(first_fit(cell, kg, &sample, &[0], rng));
    }
    Ok(out)
}

/// Constrained factual questions plus open, yes/no and multiple-choice
/// questions for one randomly chosen temporal operation group.
pub fn generate_medium(
    kg: &TemporalKG,
    facts: &[FactId],
    bank: &TemplateBank,
    cfg: &GeneratorConfig,
    rng: &mut impl Rng,
) -> Result<Vec<QAPair>, GeneratorError> {
    let sample = load(kg, facts, Level::Medium)?;
    let mut out = constrained(kg, &sample, bank, Level::Medium, rng)?;
    let group = *[
        OperationGroup::Set,
        OperationGroup::Allen,
        OperationGroup::Duration,
    ]
    .choose(rng)
    .expect("non-empty");
    out.extend(temporal_group(
        kg,
        &sample,
        bank,
        cfg,
        Level::Medium,
        group,
        &AnswerFormat::ALL,
        rng,
    )?);
    Ok(out)
}

/// Constrained factual questions, ranking questions, and one set or duration
/// group.
pub fn generate_complex(
    kg: &TemporalKG,
    facts: &[FactId],
    bank: &TemplateBank,
    cfg: &GeneratorConfig,
    rng: &mut impl Rng,
) -> Result<Vec<QAPair>, GeneratorError> {
    let sample = load(kg, facts, Level::Complex)?;
    let mut out = constrained(kg, &sample, bank, Level::Complex, rng)?;
    out.extend(temporal_group(
        kg,
        &sample,
        bank,
        cfg,
        Level::Complex,
        OperationGroup::Ranking,
        &[AnswerFormat::Open, AnswerFormat::YesNo],
        rng,
    )?);
    let group = *[OperationGroup::Set, OperationGroup::Duration]
        .choose(rng)
        .expect("non-empty");
    out.extend(temporal_group(
        kg,
        &sample,
        bank,
        cfg,
        Level::Complex,
        group,
        &AnswerFormat::ALL,
        rng,
    )?);
    Ok(out)
}
