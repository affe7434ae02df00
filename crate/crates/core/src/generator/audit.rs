//! Independent re-derivation of generated answers.

use thiserror::Error;

use super::build::{rank_label, yes_no};
use super::template::OperationGroup;
use super::{capabilities_for, AnswerFormat, Claim, Operation, QAPair};
use crate::algebra::{allen_relation, lookup, signature, tso, SignalWord};
use crate::tkg::{Fact, TemporalKG, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("pair carries no derivation")]
    NoDerivation,
    #[error("context fact {0} is not in the graph")]
    UnknownFact(u64),
    #[error("{0}")]
    Structure(String),
    #[error("{field}: expected `{expected}`, found `{found}`")]
    Mismatch {
        field: &'static str,
        expected: String,
        found: String,
    },
}

fn check(
    field: &'static str,
    expected: impl ToString,
    found: impl ToString,
) -> Result<(), AuditError> {
    let (expected, found) = (expected.to_string(), found.to_string());
    if expected == found {
        Ok(())
    } else {
        Err(AuditError::Mismatch {
            field,
            expected,
            found,
        })
    }
}

fn structure(msg: impl Into<String>) -> AuditError {
    AuditError::Structure(msg.into())
}

/// Finite `[start, end]` bounds; open ends stay as sentinels.
type Span = (Timestamp, Timestamp);

fn span(f: &Fact) -> Span {
    (f.interval.start(), f.interval.end())
}

fn next(t: Timestamp) -> Timestamp {
    match t {
        Timestamp::At(v) => v.checked_add(1).map_or(Timestamp::PosInf, Timestamp::At),
        other => other,
    }
}

/// Sorted sweep merging overlapping or adjacent spans.
fn merge(mut spans: Vec<Span>) -> Vec<Span> {
    spans.sort();
    let mut out: Vec<Span> = Vec::new();
    for (s, e) in spans {
        if let Some(last) = out.last_mut() {
            if s <= next(last.1) {
                last.1 = last.1.max(e);
                continue;
            }
        }
        out.push((s, e));
    }
    out
}

/// Common part of all spans, if any.
fn common(spans: &[Span]) -> Option<Span> {
    let s = spans.iter().map(|x| x.0).max()?;
    let e = spans.iter().map(|x| x.1).min()?;
    (s <= e).then_some((s, e))
}

/// Parts of `a` outside every span in `others`.
fn subtract(a: Span, others: &[Span]) -> Vec<Span> {
    let mut pieces = vec![a];
    for &(os, oe) in &merge(others.to_vec()) {
        let mut kept = Vec::new();
        for (s, e) in pieces {
            if oe < s || e < os {
                kept.push((s, e));
                continue;
            }
            if s < os {
                if let Timestamp::At(v) = os {
                    kept.push((s, Timestamp::At(v - 1)));
                }
            }
            if oe < e {
                if let Timestamp::At(v) = oe {
                    kept.push((Timestamp::At(v + 1), e));
                }
            }
        }
        pieces = kept;
    }
    pieces
}

/// `None` means infinite.
fn length(s: &Span) -> Option<u64> {
    match *s {
        (Timestamp::At(a), Timestamp::At(b)) => u64::try_from(i128::from(b) - i128::from(a)).ok(),
        _ => None,
    }
}

fn total(spans: &[Span]) -> Option<u64> {
    spans
        .iter()
        .try_fold(0u64, |acc, s| acc.checked_add(length(s)?))
}

fn show_len(v: Option<u64>) -> String {
    v.map_or_else(|| "infinite".to_string(), |n| n.to_string())
}

fn show_spans(kg: &TemporalKG, spans: &[Span]) -> String {
    if spans.is_empty() {
        return "none".into();
    }
    spans
        .iter()
        .map(|(s, e)| format!("{} to {}", kg.render_time(*s), kg.render_time(*e)))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Ordinal of `p[idx]` under `key` (smaller key first), competition style.
fn ordinal_of(keys: &[Option<i128>], idx: usize) -> u32 {
    // None sorts after every finite key.
    let rank = |k: Option<i128>| (k.is_none(), k.unwrap_or(0));
    1 + keys.iter().filter(|&&k| rank(k) < rank(keys[idx])).count() as u32
}

fn time_value(t: Timestamp) -> i128 {
    match t {
        Timestamp::NegInf => i128::MIN,
        Timestamp::At(v) => i128::from(v),
        Timestamp::PosInf => i128::MAX,
    }
}

fn rank_keys(op: Operation, p: &[Fact]) -> Vec<Option<i128>> {
    use Operation::*;
    p.iter()
        .map(|f| match op {
            RankStart | RankStartCheck => Some(time_value(f.interval.start())),
            RankEnd | RankEndCheck => Some(time_value(f.interval.end())),
            // longest first: negate so smaller keys rank earlier
            _ => length(&span(f)).map(|d| -i128::from(d)),
        })
        .map(|k| match (op, k) {
            (RankDuration | RankDurationCheck, None) => Some(i128::MIN),
            (_, k) => k,
        })
        .collect()
}

fn recompute(
    op: Operation,
    kg: &TemporalKG,
    p: &[Fact],
    claim: Option<Claim>,
) -> Result<String, AuditError> {
    use Operation::*;
    let spans: Vec<Span> = p.iter().map(span).collect();
    let need_claim = || structure(format!("{op:?} needs a claim"));
    Ok(match op {
        FactSubject => kg.entity_name(p[0].subject).into(),
        FactObject => kg.entity_name(p[0].object).into(),
        FactStart => kg.render_time(spans[0].0),
        FactEnd => kg.render_time(spans[0].1),
        FactRange => show_spans(kg, &spans[..1]),
        FactDuration => show_len(length(&spans[0])),
        ConstrainedSubject => kg.entity_name(p[p.len() - 1].subject).into(),
        ConstrainedObject => kg.entity_name(p[p.len() - 1].object).into(),
        UnionDuration | UnionDurationChoice => show_len(total(&merge(spans))),
        UnionRange => show_spans(kg, &merge(spans)),
        IntersectionRange => show_spans(kg, &common(&spans).into_iter().collect::<Vec<_>>()),
        DifferenceRange => show_spans(kg, &subtract(spans[0], &spans[1..])),
        OverlapCheck => yes_no(common(&spans).is_some()),
        AllenOpen | AllenChoice | AllenCheck => {
            let rel = lookup(signature(&p[0].interval, &p[1].interval))
                .ok_or_else(|| structure("no Allen relation for the pair"))?;
            if op == AllenCheck {
                let Some(Claim::Relation(k)) = claim else {
                    return Err(need_claim());
                };
                yes_no(rel.kind == k)
            } else {
                rel.kind.phrase().into()
            }
        }
        DurationDifference | DurationDifferenceChoice => {
            match (length(&spans[0]), length(&spans[1])) {
                (Some(a), Some(b)) => a.abs_diff(b).to_string(),
                (None, None) => "indeterminate".into(),
                _ => "infinite".into(),
            }
        }
        LongerCheck => {
            let longer = |a: Option<u64>, b: Option<u64>| match (a, b) {
                (Some(x), Some(y)) => x > y,
                (None, Some(_)) => true,
                _ => false,
            };
            let a = length(&spans[0]);
            yes_no(spans[1..].iter().all(|s| longer(a, length(s))))
        }
        DurationSum | DurationSumChoice => show_len(total(&spans)),
        RankStart | RankEnd | RankDuration | RankStartCheck | RankEndCheck | RankDurationCheck => {
            let Some(Claim::Ordinal(w)) = claim else {
                return Err(need_claim());
            };
            let keys = rank_keys(op, p);
            let ords: Vec<u32> = (0..p.len()).map(|i| ordinal_of(&keys, i)).collect();
            let max = *ords.iter().max().expect("non-empty");
            let want = w.value(max);
            if matches!(op, RankStart | RankEnd | RankDuration) {
                let hits: Vec<usize> = (0..p.len()).filter(|&i| ords[i] == want).collect();
                match hits.as_slice() {
                    [i] => rank_label(kg, &p[*i], p),
                    _ => return Err(structure("ranking ordinal is not held by exactly one fact")),
                }
            } else {
                yes_no(ords[0] == want)
            }
        }
    })
}

/// Recomputes the answer and every derived field of `pair` from its
/// context facts.
pub fn audit(pair: &QAPair, kg: &TemporalKG) -> Result<(), AuditError> {
    let d = pair.derivation.as_ref().ok_or(AuditError::NoDerivation)?;
    let op = d.operation;
    let facts: Vec<Fact> = pair
        .context_fact_ids
        .iter()
        .map(|&id| kg.fact(id).copied().ok_or(AuditError::UnknownFact(id.0)))
        .collect::<Result<_, _>>()?;
    let n = facts.len();
    check("arity", pair.level.arity(), n)?;
    if !op.arities().contains(&n) {
        return Err(structure(format!("{op:?} is undefined for {n} facts")));
    }
    let mut ids = pair.context_fact_ids.clone();
    ids.sort();
    ids.dedup();
    if ids.len() != n {
        return Err(structure("context facts repeat"));
    }
    let mut seen = d.order.clone();
    seen.sort();
    if seen != (0..n).collect::<Vec<_>>() {
        return Err(structure("presentation order is not a permutation"));
    }
    check("focus", op.focus().name(), pair.focus.name())?;
    check(
        "answer_type",
        op.answer_type().name(),
        pair.answer_type.name(),
    )?;
    check(
        "answer_format",
        op.answer_format().name(),
        pair.answer_format.name(),
    )?;
    let caps: Vec<_> = capabilities_for(pair.category()).into_iter().collect();
    if caps != pair.capabilities {
        return Err(AuditError::Mismatch {
            field: "capabilities",
            expected: format!("{caps:?}"),
            found: format!("{:?}", pair.capabilities),
        });
    }

    let p: Vec<Fact> = d.order.iter().map(|&i| facts[i]).collect();
    if op.group() == OperationGroup::Constrained {
        let target = p[n - 1];
        check("signal count", n - 1, pair.signal_words.len())?;
        for (anchor, &word) in p[..n - 1].iter().zip(&pair.signal_words) {
            let rel = allen_relation(&target.interval, &anchor.interval);
            let expected: SignalWord = rel
                .semantic
                .parse()
                .map_err(|_| structure(format!("bad semantic word {}", rel.semantic)))?;
            check("signal word", expected, word)?;
            if word.tso_rule().is_some() {
                let window = tso(word, &anchor.interval).map_err(|e| structure(e.to_string()))?;
                if !window.intersects(&target.interval) {
                    return Err(structure(format!("`{word}` window misses the target fact")));
                }
            }
        }
    } else if !pair.signal_words.is_empty() {
        return Err(structure("signal words on a non-constrained question"));
    }

    let expected = recompute(op, kg, &p, d.claim)?;
    check("answer", expected, &pair.answer)?;

    match pair.answer_format {
        AnswerFormat::YesNo if !matches!(pair.answer.as_str(), "Yes" | "No") => {
            return Err(structure("yes/no answer is neither Yes nor No"));
        }
        AnswerFormat::MultipleChoice => {
            check("choice count", 4, d.choices.len())?;
            check(
                "answer among choices",
                1,
                d.choices.iter().filter(|c| **c == pair.answer).count(),
            )?;
            let mut distinct = d.choices.clone();
            distinct.sort();
            distinct.dedup();
            check("distinct choices", 4, distinct.len())?;
        }
        _ => {}
    }
    Ok(())
}
