use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::tkg::{TimeInterval, Timestamp};

/// Length of an interval in granularity units; open intervals are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Duration {
    Finite(u64),
    Infinite,
}

impl Add for Duration {
    type Output = Duration;

    fn add(self, rhs: Duration) -> Duration {
        match (self, rhs) {
            (Duration::Finite(a), Duration::Finite(b)) => a
                .checked_add(b)
                .map_or(Duration::Infinite, Duration::Finite),
            _ => Duration::Infinite,
        }
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Duration::Finite(v) => write!(f, "{v}"),
            Duration::Infinite => f.write_str("infinite"),
        }
    }
}

pub fn duration(x: &TimeInterval) -> Duration {
    match (x.start(), x.end()) {
        (Timestamp::At(s), Timestamp::At(e)) => {
            let diff = i128::from(e) - i128::from(s);
            u64::try_from(diff).map_or(Duration::Infinite, Duration::Finite)
        }
        _ => Duration::Infinite,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Magnitude {
    Finite(u64),
    Infinite,
    /// Both durations infinite.
    Indeterminate,
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Finite(v) => write!(f, "{v}"),
            Magnitude::Infinite => f.write_str("infinite"),
            Magnitude::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

/// Sign and size of `duration(a) - duration(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DurationDelta {
    pub sign: i8,
    pub magnitude: Magnitude,
}

pub fn compare_duration(a: &TimeInterval, b: &TimeInterval) -> DurationDelta {
    delta(duration(a), duration(b))
}

pub fn delta(da: Duration, db: Duration) -> DurationDelta {
    match (da, db) {
        (Duration::Finite(x), Duration::Finite(y)) => DurationDelta {
            sign: match x.cmp(&y) {
                Ordering::Less => -1,
                Ordering::Equal => 0,
                Ordering::Greater => 1,
            },
            magnitude: Magnitude::Finite(x.abs_diff(y)),
        },
        (Duration::Infinite, Duration::Infinite) => DurationDelta {
            sign: 0,
            magnitude: Magnitude::Indeterminate,
        },
        (Duration::Infinite, _) => DurationDelta {
            sign: 1,
            magnitude: Magnitude::Infinite,
        },
        (_, Duration::Infinite) => DurationDelta {
            sign: -1,
            magnitude: Magnitude::Infinite,
        },
    }
}
