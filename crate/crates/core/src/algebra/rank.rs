use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::tkg::Fact;

use super::duration::duration;
use super::AlgebraError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankKey {
    Start,
    End,
    Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOrder {
    Asc,
    Desc,
}

fn compare_by(key: RankKey, a: &Fact, b: &Fact) -> Ordering {
    match key {
        RankKey::Start => a.interval.start().cmp(&b.interval.start()),
        RankKey::End => a.interval.end().cmp(&b.interval.end()),
        RankKey::Duration => duration(&a.interval).cmp(&duration(&b.interval)),
    }
}

/// Orders facts by `key`, breaking ties by fact id, and assigns 1-based
/// competition ordinals: tied facts share an ordinal and the next distinct
/// value skips ahead (1, 1, 3).
pub fn rank_facts(
    facts: &[Fact],
    key: RankKey,
    order: RankOrder,
) -> Result<Vec<(Fact, u32)>, AlgebraError> {
    if facts.len() < 2 {
        return Err(AlgebraError::TooFewFacts {
            needed: 2,
            got: facts.len(),
        });
    }
    if let Some(f) = facts.iter().find(|f| !f.has_time) {
        return Err(AlgebraError::Timeless(f.id));
    }
    let directed = |a: &Fact, b: &Fact| match order {
        RankOrder::Asc => compare_by(key, a, b),
        RankOrder::Desc => compare_by(key, b, a),
    };
    let mut sorted: Vec<Fact> = facts.to_vec();
    sorted.sort_by(|a, b| directed(a, b).then(a.id.cmp(&b.id)));

    let mut out: Vec<(Fact, u32)> = Vec::with_capacity(sorted.len());
    for (pos, f) in sorted.into_iter().enumerate() {
        let ordinal = match out.last() {
            Some((prev, ord)) if directed(prev, &f) == Ordering::Equal => *ord,
            _ => pos as u32 + 1,
        };
        out.push((f, ordinal));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tkg::{Granularity, KgBuilder, TemporalKG};

    fn kg(ranges: &[(i64, i64)]) -> TemporalKG {
        let mut b = KgBuilder::new(Granularity::Year);
        for (i, &(s, e)) in ranges.iter().enumerate() {
            b.add_range(&format!("e{i}"), "r", "x", s, e).unwrap();
        }
        b.build()
    }

    fn ordinals(ranked: &[(Fact, u32)]) -> Vec<(u64, u32)> {
        ranked.iter().map(|(f, o)| (f.id.0, *o)).collect()
    }

    #[test]
    fn by_start() {
        let g = kg(&[(2001, 2009), (1964, 1968), (1967, 1971)]);
        let ranked = rank_facts(g.facts(), RankKey::Start, RankOrder::Asc).unwrap();
        assert_eq!(ordinals(&ranked), vec![(1, 1), (2, 2), (0, 3)]);
    }

    #[test]
    fn competition_ties() {
        let g = kg(&[(1990, 1995), (1990, 1992), (1999, 2000)]);
        let ranked = rank_facts(g.facts(), RankKey::Start, RankOrder::Asc).unwrap();
        assert_eq!(ordinals(&ranked), vec![(0, 1), (1, 1), (2, 3)]);

        let g = kg(&[(1964, 1968), (1967, 1971), (2001, 2009)]);
        let ranked = rank_facts(g.facts(), RankKey::Duration, RankOrder::Asc).unwrap();
        assert_eq!(ordinals(&ranked), vec![(0, 1), (1, 1), (2, 3)]);
    }

    #[test]
    fn reversal_mirrors_distinct_keys() {
        let g = kg(&[(5, 9), (1, 2), (3, 3), (7, 20)]);
        let asc = rank_facts(g.facts(), RankKey::End, RankOrder::Asc).unwrap();
        let desc = rank_facts(g.facts(), RankKey::End, RankOrder::Desc).unwrap();
        let n = asc.len() as u32;
        for (f, o) in &asc {
            let (_, od) = desc.iter().find(|(g, _)| g.id == f.id).unwrap();
            assert_eq!(*od, n + 1 - o);
        }
    }

    #[test]
    fn domain_errors() {
        let g = kg(&[(1, 2)]);
        assert_eq!(
            rank_facts(g.facts(), RankKey::Start, RankOrder::Asc),
            Err(AlgebraError::TooFewFacts { needed: 2, got: 1 })
        );
        let mut b = KgBuilder::new(Granularity::Year);
        b.add_range("a", "r", "b", 1, 2).unwrap();
        b.add(
            "a",
            "r",
            "c",
            crate::tkg::Timestamp::NegInf,
            crate::tkg::Timestamp::PosInf,
        )
        .unwrap();
        let g = b.build();
        assert!(matches!(
            rank_facts(g.facts(), RankKey::Start, RankOrder::Asc),
            Err(AlgebraError::Timeless(_))
        ));
    }
}
