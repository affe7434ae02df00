//! Canonical sets of closed integer intervals.
//!
//! `[a, b]` contains both endpoints. Two members whose ends touch (`b + 1 ==
//! a'`) cover a contiguous stretch of the timeline, so they are merged; the
//! canonical form is therefore sorted, disjoint and non-adjacent.

use std::fmt;

use crate::tkg::{Granularity, TimeInterval, Timestamp};

use super::duration::{duration, Duration};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    intervals: Vec<TimeInterval>,
}

fn succ(t: Timestamp) -> Timestamp {
    match t {
        Timestamp::At(v) => v.checked_add(1).map_or(Timestamp::PosInf, Timestamp::At),
        other => other,
    }
}

fn pred(t: Timestamp) -> Timestamp {
    match t {
        Timestamp::At(v) => v.checked_sub(1).map_or(Timestamp::NegInf, Timestamp::At),
        other => other,
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn full() -> Self {
        IntervalSet {
            intervals: vec![TimeInterval::full()],
        }
    }

    /// Builds the canonical form of any collection of intervals.
    pub fn from_intervals(xs: impl IntoIterator<Item = TimeInterval>) -> Self {
        let mut xs: Vec<TimeInterval> = xs.into_iter().collect();
        xs.sort_by_key(|i| (i.start(), i.end()));
        let mut merged: Vec<TimeInterval> = Vec::with_capacity(xs.len());
        for next in xs {
            match merged.last_mut() {
                Some(cur) if next.start() <= succ(cur.end()) => {
                    if next.end() > cur.end() {
                        *cur = TimeInterval::new(cur.start(), next.end())
                            .expect("merged interval keeps start <= end");
                    }
                }
                _ => merged.push(next),
            }
        }
        IntervalSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[TimeInterval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.intervals.iter().any(|i| i.contains(t))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.intervals.iter().chain(&other.intervals).copied())
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let start = a[i].start().max(b[j].start());
            let end = a[i].end().min(b[j].end());
            if start <= end {
                out.push(TimeInterval::new(start, end).expect("overlap of valid intervals"));
            }
            if a[i].end() < b[j].end() {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { intervals: out }
    }

    /// Complement within the whole timeline.
    pub fn negation(&self) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = Some(Timestamp::NegInf);
        for iv in &self.intervals {
            let Some(from) = cursor else { break };
            if iv.start() > from {
                let to = pred(iv.start());
                if from <= to {
                    if let Ok(gap) = TimeInterval::new(from, to) {
                        out.push(gap);
                    }
                }
            }
            cursor = match iv.end() {
                Timestamp::PosInf => None,
                end => Some(succ(end)),
            };
        }
        if let Some(from) = cursor {
            if let Ok(tail) = TimeInterval::new(from, Timestamp::PosInf) {
                out.push(tail);
            }
        }
        IntervalSet { intervals: out }
    }

    /// Sum of member durations.
    pub fn total_duration(&self) -> Duration {
        self.intervals
            .iter()
            .map(duration)
            .fold(Duration::Finite(0), |acc, d| acc + d)
    }

    /// `"1964 to 1968; 1970 to 1971"`, or `"none"` for the empty set.
    pub fn render(&self, granularity: Granularity) -> String {
        if self.intervals.is_empty() {
            return "none".to_string();
        }
        self.intervals
            .iter()
            .map(|i| i.render(granularity))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|i| format!("[{:?}, {:?}]", i.start(), i.end()))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Points covered by any input.
pub fn union(xs: &[TimeInterval]) -> IntervalSet {
    IntervalSet::from_intervals(xs.iter().copied())
}

/// Points covered by every input; empty for an empty input.
pub fn intersection(xs: &[TimeInterval]) -> IntervalSet {
    let Some((first, rest)) = xs.split_first() else {
        return IntervalSet::empty();
    };
    rest.iter()
        .fold(IntervalSet::from_intervals([*first]), |acc, x| {
            acc.intersection(&IntervalSet::from_intervals([*x]))
        })
}

pub fn negation(x: &IntervalSet) -> IntervalSet {
    x.negation()
}
