//! Timestamps, granularities and closed time intervals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Canonical spelling of the lower sentinel.
pub const BEGINNING_OF_TIME: &str = "beginning of time";
/// Canonical spelling of the upper sentinel.
pub const END_OF_TIME: &str = "end of time";

/// The unit every timestamp of one graph is counted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Minute,
    Hour,
    Day,
    Week,
    Month,
    Year,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DateError {
    #[error("unrecognised date `{0}`")]
    Unrecognised(String),
    #[error("date `{0}` is out of range")]
    OutOfRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown granularity `{0}` (expected minute, hour, day, week, month or year)")]
pub struct UnknownGranularity(pub String);

impl Granularity {
    pub const ALL: [Granularity; 6] = [
        Granularity::Minute,
        Granularity::Hour,
        Granularity::Day,
        Granularity::Week,
        Granularity::Month,
        Granularity::Year,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Granularity::Minute => "minute",
            Granularity::Hour => "hour",
            Granularity::Day => "day",
            Granularity::Week => "week",
            Granularity::Month => "month",
            Granularity::Year => "year",
        }
    }

    /// Plural unit name used when phrasing durations ("years", "days").
    pub fn plural(self) -> &'static str {
        match self {
            Granularity::Minute => "minutes",
            Granularity::Hour => "hours",
            Granularity::Day => "days",
            Granularity::Week => "weeks",
            Granularity::Month => "months",
            Granularity::Year => "years",
        }
    }

    /// Parses an ISO-8601 prefix (`YYYY`, `YYYY-MM`, `YYYY-MM-DD`, optionally
    /// followed by `Thh:mm`) or a bare integer year, and converts it to a unit
    /// count. Finer components are truncated, missing ones default to the
    /// start of the enclosing period.
    pub fn parse_units(self, text: &str) -> Result<i64, DateError> {
        let text = text.trim();
        let unrecognised = || DateError::Unrecognised(text.to_string());

        if let Ok(year) = text.parse::<i64>() {
            return self.units_from_parts(text, year, 1, 1, 0, 0);
        }

        let (date_part, time_part) = match text.find(['T', ' ']) {
            Some(pos) => (&text[..pos], Some(&text[pos + 1..])),
            None => (text, None),
        };
        let mut pieces = date_part.split('-');
        let year: i64 = pieces
            .next()
            .filter(|s| s.len() == 4)
            .and_then(|s| s.parse().ok())
            .ok_or_else(unrecognised)?;
        let month: u32 = match pieces.next() {
            Some(s) if s.len() == 2 => s.parse().map_err(|_| unrecognised())?,
            Some(_) => return Err(unrecognised()),
            None => 1,
        };
        let day: u32 = match pieces.next() {
            Some(s) if s.len() == 2 => s.parse().map_err(|_| unrecognised())?,
            Some(_) => return Err(unrecognised()),
            None => 1,
        };
        if pieces.next().is_some() {
            return Err(unrecognised());
        }

        let (hour, minute) = match time_part {
            None => (0, 0),
            Some(t) => {
                let mut hm = t.split(':');
                let hour: u32 = hm
                    .next()
                    .filter(|s| s.len() == 2)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(unrecognised)?;
                let minute: u32 = match hm.next() {
                    Some(s) if s.len() == 2 => s.parse().map_err(|_| unrecognised())?,
                    Some(_) => return Err(unrecognised()),
                    None => 0,
                };
                // seconds, if present, are below every supported granularity
                if let Some(sec) = hm.next() {
                    if sec.len() < 2 || !sec[..2].bytes().all(|b| b.is_ascii_digit()) {
                        return Err(unrecognised());
                    }
                }
                (hour, minute)
            }
        };

        self.units_from_parts(text, year, month, day, hour, minute)
    }

    fn units_from_parts(
        self,
        text: &str,
        year: i64,
        month: u32,
        day: u32,
        hour: u32,
        minute: u32,
    ) -> Result<i64, DateError> {
        if self == Granularity::Year {
            // still validate the finer components
            if !(1..=12).contains(&month) || day == 0 || day > 31 || hour > 23 || minute > 59 {
                return Err(DateError::Unrecognised(text.to_string()));
            }
            return Ok(year);
        }
        let out_of_range = || DateError::OutOfRange(text.to_string());
        let y = i32::try_from(year).map_err(|_| out_of_range())?;
        let date = NaiveDate::from_ymd_opt(y, month, day)
            .ok_or_else(|| DateError::Unrecognised(text.to_string()))?;
        let time = NaiveTime::from_hms_opt(hour, minute, 0)
            .ok_or_else(|| DateError::Unrecognised(text.to_string()))?;
        let dt = NaiveDateTime::new(date, time);
        let epoch = epoch();
        let units = match self {
            Granularity::Minute => (dt - epoch).num_minutes(),
            Granularity::Hour => (dt - epoch).num_minutes().div_euclid(60),
            Granularity::Day => (date - epoch.date()).num_days(),
            Granularity::Week => (date - epoch.date()).num_days().div_euclid(7),
            Granularity::Month => (year - 1970) * 12 + i64::from(month) - 1,
            Granularity::Year => unreachable!(),
        };
        Ok(units)
    }

    /// Renders a unit count in the canonical textual form of this granularity.
    pub fn format_units(self, units: i64) -> String {
        match self {
            Granularity::Year => format!("{units}"),
            Granularity::Month => {
                let year = 1970 + units.div_euclid(12);
                let month = units.rem_euclid(12) + 1;
                format!("{year:04}-{month:02}")
            }
            Granularity::Day => date_after_epoch(units).format("%Y-%m-%d").to_string(),
            Granularity::Week => date_after_epoch(units.saturating_mul(7))
                .format("%Y-%m-%d")
                .to_string(),
            Granularity::Hour => {
                let dt = epoch() + chrono::Duration::hours(units);
                format!("{}T{:02}:00", dt.date().format("%Y-%m-%d"), dt.hour())
            }
            Granularity::Minute => {
                let dt = epoch() + chrono::Duration::minutes(units);
                format!(
                    "{}T{:02}:{:02}",
                    dt.date().format("%Y-%m-%d"),
                    dt.hour(),
                    dt.minute()
                )
            }
        }
    }
}

fn epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(1970, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

fn date_after_epoch(days: i64) -> NaiveDate {
    let date = epoch().date() + chrono::Duration::days(days);
    debug_assert!(date.year() > -262_000);
    date
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Granularity {
    type Err = UnknownGranularity;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Granularity::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownGranularity(s.to_string()))
    }
}

/// A point on the timeline: a unit count since the epoch, or one of the two
/// open-end sentinels. The derived ordering puts `NegInf` below and `PosInf`
/// above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Timestamp {
    NegInf,
    At(i64),
    PosInf,
}

/// Which end of an interval a textual value belongs to; decides how an empty
/// field is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Start,
    End,
}

impl Timestamp {
    pub fn is_finite(self) -> bool {
        matches!(self, Timestamp::At(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Timestamp::At(v) => Some(v),
            _ => None,
        }
    }

    /// Reads a timestamp field. Sentinel spellings are matched
    /// case-insensitively; an empty field is the open end on its side.
    pub fn parse(
        text: &str,
        endpoint: Endpoint,
        granularity: Granularity,
    ) -> Result<Self, DateError> {
        let trimmed = text.trim();
        let lower = trimmed.to_ascii_lowercase();
        match lower.as_str() {
            "" => Ok(match endpoint {
                Endpoint::Start => Timestamp::NegInf,
                Endpoint::End => Timestamp::PosInf,
            }),
            BEGINNING_OF_TIME | "-inf" => Ok(Timestamp::NegInf),
            END_OF_TIME | "+inf" => Ok(Timestamp::PosInf),
            _ => granularity.parse_units(trimmed).map(Timestamp::At),
        }
    }

    pub fn render(self, granularity: Granularity) -> String {
        match self {
            Timestamp::NegInf => BEGINNING_OF_TIME.to_string(),
            Timestamp::PosInf => END_OF_TIME.to_string(),
            Timestamp::At(v) => granularity.format_units(v),
        }
    }

    /// Sign of `self - other` under the sentinel ordering.
    pub fn sign_diff(self, other: Timestamp) -> i8 {
        match self.cmp(&other) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("interval start {start:?} is after its end {end:?}")]
    Inverted { start: Timestamp, end: Timestamp },
    #[error("an interval cannot start and end on the same sentinel")]
    SentinelPoint,
}

/// A closed interval `[start, end]`. `start == end` denotes an instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeInterval {
    start: Timestamp,
    end: Timestamp,
}

impl TimeInterval {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self, IntervalError> {
        if start > end {
            return Err(IntervalError::Inverted { start, end });
        }
        if start == end && !start.is_finite() {
            return Err(IntervalError::SentinelPoint);
        }
        Ok(TimeInterval { start, end })
    }

    /// Finite range; panics if `start > end`.
    pub fn range(start: i64, end: i64) -> Self {
        TimeInterval::new(Timestamp::At(start), Timestamp::At(end))
            .expect("range start must not exceed its end")
    }

    pub fn point(at: i64) -> Self {
        TimeInterval {
            start: Timestamp::At(at),
            end: Timestamp::At(at),
        }
    }

    /// The whole timeline `(-inf, +inf)`.
    pub fn full() -> Self {
        TimeInterval {
            start: Timestamp::NegInf,
            end: Timestamp::PosInf,
        }
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    pub fn is_point(&self) -> bool {
        self.start == self.end && self.start.is_finite()
    }

    pub fn is_full(&self) -> bool {
        self.start == Timestamp::NegInf && self.end == Timestamp::PosInf
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn intersects(&self, other: &TimeInterval) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Midpoint used for proximity weighting. One open end collapses to the
    /// finite endpoint; a fully open interval has no midpoint.
    pub fn midpoint(&self) -> Option<f64> {
        match (self.start, self.end) {
            (Timestamp::At(s), Timestamp::At(e)) => Some((s as f64 + e as f64) / 2.0),
            (Timestamp::At(s), _) => Some(s as f64),
            (_, Timestamp::At(e)) => Some(e as f64),
            _ => None,
        }
    }

    pub fn render(&self, granularity: Granularity) -> String {
        format!(
            "{} to {}",
            self.start.render(granularity),
            self.end.render(granularity)
        )
    }
}
