//! The temporal knowledge graph: facts, symbol tables, the entity index and
//! the fact-file format.

mod parse;
mod time;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_facts, parse_facts_str, FACT_HEADER};
pub use time::{
    DateError, Endpoint, Granularity, IntervalError, TimeInterval, Timestamp, UnknownGranularity,
    BEGINNING_OF_TIME, END_OF_TIME,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactId(pub u64);

impl std::fmt::Display for FactId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum TkgError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected 5 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {source}")]
    Date {
        line: usize,
        #[source]
        source: DateError,
    },
    #[error("fact {fact}{}: {source}", .line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Interval {
        fact: FactId,
        line: Option<usize>,
        #[source]
        source: IntervalError,
    },
    #[error("fact {fact}: {reason}")]
    Inconsistent { fact: FactId, reason: String },
}

/// A time-stamped quintuple `(subject, predicate, object, start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fact {
    pub id: FactId,
    pub subject: EntityId,
    pub predicate: RelationId,
    pub object: EntityId,
    pub interval: TimeInterval,
    /// False exactly when the interval is the whole timeline.
    pub has_time: bool,
}

/// Bidirectional id <-> surface-name table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl SymbolTable {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.lookup.get(name) {
            return id;
        }
        let id = u32::try_from(self.names.len()).expect("symbol table overflow");
        self.names.push(name.to_string());
        self.lookup.insert(name.to_string(), id);
        id
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.lookup.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (i as u32, n.as_str()))
    }
}

/// An immutable temporal knowledge graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalKG {
    facts: Vec<Fact>,
    entities: SymbolTable,
    relations: SymbolTable,
    entity_index: Vec<Vec<FactId>>,
    granularity: Granularity,
}

impl TemporalKG {
    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        self.facts.get(id.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn entities(&self) -> &SymbolTable {
        &self.entities
    }

    pub fn relations(&self) -> &SymbolTable {
        &self.relations
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        self.entities.name(id.0).expect("entity id from this graph")
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        self.relations
            .name(id.0)
            .expect("relation id from this graph")
    }

    /// Facts in which `entity` appears as subject or object, in id order.
    pub fn facts_of(&self, entity: EntityId) -> &[FactId] {
        self.entity_index
            .get(entity.0 as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Renders a timestamp at this graph's granularity.
    pub fn render_time(&self, t: Timestamp) -> String {
        t.render(self.granularity)
    }

    /// `<subject> <predicate> <object> from <start> to <end>`
    pub fn verbalize(&self, fact: &Fact) -> String {
        format!(
            "{} {} {} from {} to {}",
            self.entity_name(fact.subject),
            self.relation_name(fact.predicate),
            self.entity_name(fact.object),
            self.render_time(fact.interval.start()),
            self.render_time(fact.interval.end()),
        )
    }

    /// Number of facts each entity takes part in, counting both slots (a
    /// self-loop counts twice).
    pub fn entity_frequency(&self) -> BTreeMap<EntityId, u64> {
        let mut counts = BTreeMap::new();
        for f in &self.facts {
            *counts.entry(f.subject).or_insert(0) += 1;
            *counts.entry(f.object).or_insert(0) += 1;
        }
        counts
    }

    /// Canonical fact-file serialization: header line plus one row per fact.
    /// Uses `|` unless some name contains it, in which case tab is used.
    pub fn to_fact_file(&self) -> String {
        let pipe_safe = self
            .entities
            .iter()
            .chain(self.relations.iter())
            .all(|(_, n)| !n.contains('|'));
        let sep = if pipe_safe { "|" } else { "\t" };
        let mut out = FACT_HEADER.replace('|', sep);
        out.push('\n');
        for f in &self.facts {
            let row = [
                self.entity_name(f.subject).to_string(),
                self.relation_name(f.predicate).to_string(),
                self.entity_name(f.object).to_string(),
                self.render_time(f.interval.start()),
                self.render_time(f.interval.end()),
            ];
            out.push_str(&row.join(sep));
            out.push('\n');
        }
        out
    }
}

/// Incremental constructor; the only way to obtain a [`TemporalKG`].
#[derive(Debug, Clone)]
pub struct KgBuilder {
    kg: TemporalKG,
}

impl KgBuilder {
    pub fn new(granularity: Granularity) -> Self {
        KgBuilder {
            kg: TemporalKG {
                facts: Vec::new(),
                entities: SymbolTable::default(),
                relations: SymbolTable::default(),
                entity_index: Vec::new(),
                granularity,
            },
        }
    }

    pub fn add(
        &mut self,
        subject: &str,
        predicate: &str,
        object: &str,
        start: Timestamp,
        end: Timestamp,
    ) -> Result<FactId, TkgError> {
        let id = FactId(self.kg.facts.len() as u64);
        let interval = TimeInterval::new(start, end).map_err(|source| TkgError::Interval {
            fact: id,
            line: None,
            source,
        })?;
        let subject = EntityId(self.kg.entities.intern(subject));
        let predicate = RelationId(self.kg.relations.intern(predicate));
        let object = EntityId(self.kg.entities.intern(object));
        self.kg
            .entity_index
            .resize(self.kg.entities.len(), Vec::new());
        self.kg.entity_index[subject.0 as usize].push(id);
        if object != subject {
            self.kg.entity_index[object.0 as usize].push(id);
        }
        self.kg.facts.push(Fact {
            id,
            subject,
            predicate,
            object,
            interval,
            has_time: !interval.is_full(),
        });
        Ok(id)
    }

    /// Convenience for finite ranges.
    pub fn add_range(
        &mut self,
        subject: &str,
        predicate: &str,
        object: &str,
        start: i64,
        end: i64,
    ) -> Result<FactId, TkgError> {
        self.add(
            subject,
            predicate,
            object,
            Timestamp::At(start),
            Timestamp::At(end),
        )
    }

    pub fn build(self) -> TemporalKG {
        self.kg
    }
}

/// Normalizes a parsed graph: every fact carries an interval, facts without
/// temporal information hold the whole timeline with `has_time = false`, and
/// all structural invariants are checked. Idempotent.
pub fn unify(kg: TemporalKG) -> Result<TemporalKG, TkgError> {
    let mut kg = kg;
    for (pos, f) in kg.facts.iter_mut().enumerate() {
        if f.id.0 != pos as u64 {
            return Err(TkgError::Inconsistent {
                fact: f.id,
                reason: format!("id does not match position {pos}"),
            });
        }
        if f.interval.start() > f.interval.end() {
            return Err(TkgError::Interval {
                fact: f.id,
                line: None,
                source: IntervalError::Inverted {
                    start: f.interval.start(),
                    end: f.interval.end(),
                },
            });
        }
        if kg.entities.name(f.subject.0).is_none()
            || kg.entities.name(f.object.0).is_none()
            || kg.relations.name(f.predicate.0).is_none()
        {
            return Err(TkgError::Inconsistent {
                fact: f.id,
                reason: "references an unknown symbol".into(),
            });
        }
        f.has_time = !f.interval.is_full();
    }
    Ok(kg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TemporalKG {
        let mut b = KgBuilder::new(Granularity::Year);
        b.add_range("Obama", "educated at", "Harvard", 1988, 1991)
            .unwrap();
        b.add(
            "Obama",
            "president of",
            "USA",
            Timestamp::At(2009),
            Timestamp::At(2017),
        )
        .unwrap();
        b.add(
            "Earth",
            "orbits",
            "Sun",
            Timestamp::NegInf,
            Timestamp::PosInf,
        )
        .unwrap();
        b.build()
    }

    #[test]
    fn verbalize_format() {
        let kg = sample();
        assert_eq!(
            kg.verbalize(&kg.facts()[0]),
            "Obama educated at Harvard from 1988 to 1991"
        );
        assert_eq!(
            kg.verbalize(&kg.facts()[2]),
            "Earth orbits Sun from beginning of time to end of time"
        );
        assert_eq!(kg.verbalize(&kg.facts()[0]), kg.verbalize(&kg.facts()[0]));
    }

    #[test]
    fn timeless_flag() {
        let kg = sample();
        assert!(kg.facts()[0].has_time);
        assert!(!kg.facts()[2].has_time);
    }

    #[test]
    fn frequency_counts_both_slots() {
        let mut b = KgBuilder::new(Granularity::Year);
        b.add_range("A", "r", "B", 1, 2).unwrap();
        let kg = b.build();
        let freq = kg.entity_frequency();
        assert_eq!(freq.values().copied().collect::<Vec<_>>(), vec![1, 1]);

        let mut b = KgBuilder::new(Granularity::Year);
        b.add_range("A", "likes", "A", 1, 2).unwrap();
        let kg = b.build();
        let a = EntityId(kg.entities().id("A").unwrap());
        assert_eq!(kg.entity_frequency()[&a], 2);
        // the index still lists the fact once
        assert_eq!(kg.facts_of(a), &[FactId(0)]);
    }

    #[test]
    fn frequency_brute_force() {
        let mut b = KgBuilder::new(Granularity::Year);
        b.add_range("A", "r", "B", 1, 2).unwrap();
        b.add_range("A", "r", "C", 1, 2).unwrap();
        b.add_range("A", "s", "D", 1, 2).unwrap();
        let kg = b.build();
        let freq = kg.entity_frequency();
        for (id, name) in kg.entities().iter() {
            let scan = kg
                .facts()
                .iter()
                .map(|f| (f.subject.0 == id) as u64 + (f.object.0 == id) as u64)
                .sum::<u64>();
            assert_eq!(freq[&EntityId(id)], scan, "{name}");
        }
        assert_eq!(freq[&EntityId(kg.entities().id("A").unwrap())], 3);
        assert_eq!(freq.values().sum::<u64>(), 2 * kg.len() as u64);
    }

    #[test]
    fn unify_idempotent() {
        let kg = sample();
        let once = unify(kg.clone()).unwrap();
        assert_eq!(once, kg);
        assert_eq!(unify(once.clone()).unwrap(), once);
    }

    #[test]
    fn unify_rederives_has_time() {
        let mut kg = sample();
        kg.facts[2].has_time = true;
        kg.facts[0].has_time = false;
        let kg = unify(kg).unwrap();
        assert!(kg.facts()[0].has_time);
        assert!(!kg.facts()[2].has_time);
    }

    #[test]
    fn builder_rejects_inverted() {
        let mut b = KgBuilder::new(Granularity::Year);
        let err = b.add_range("A", "r", "B", 5, 2).unwrap_err();
        assert!(err.to_string().contains("fact 0"), "{err}");
    }
}
