//! Temporal semantic operations: a signal word applied to a time range
//! yields a new constraint range.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::tkg::{TimeInterval, Timestamp};

use super::allen::AllenKind;
use super::AlgebraError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalWord {
    Before,
    PriorTo,
    After,
    Since,
    Until,
    During,
    While,
    Between,
    When,
    Meets,
    MetBy,
    Starts,
    StartedBy,
    Finishes,
    FinishedBy,
    Overlaps,
    OverlappedBy,
    Equal,
}

/// What a signal word does to a range `(start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsoRule {
    /// `(-inf, start)`
    UpToStart,
    /// `(end, +inf)`
    FromEnd,
    /// `(start, +inf)`
    FromStart,
    /// `(-inf, end)`
    UpToEnd,
    /// `(start, end)`
    Within,
}

impl SignalWord {
    pub const ALL: [SignalWord; 18] = [
        SignalWord::Before,
        SignalWord::PriorTo,
        SignalWord::After,
        SignalWord::Since,
        SignalWord::Until,
        SignalWord::During,
        SignalWord::While,
        SignalWord::Between,
        SignalWord::When,
        SignalWord::Meets,
        SignalWord::MetBy,
        SignalWord::Starts,
        SignalWord::StartedBy,
        SignalWord::Finishes,
        SignalWord::FinishedBy,
        SignalWord::Overlaps,
        SignalWord::OverlappedBy,
        SignalWord::Equal,
    ];

    pub fn as_str(self) -> &'static str {
        use SignalWord::*;
        match self {
            Before => "before",
            PriorTo => "prior to",
            After => "after",
            Since => "since",
            Until => "until",
            During => "during",
            While => "while",
            Between => "between",
            When => "when",
            Meets => "meets",
            MetBy => "met-by",
            Starts => "starts",
            StartedBy => "started-by",
            Finishes => "finishes",
            FinishedBy => "finished-by",
            Overlaps => "overlaps",
            OverlappedBy => "overlapped-by",
            Equal => "equal",
        }
    }

    /// How the word reads inside a question ("met by" rather than "met-by").
    pub fn phrase(self) -> &'static str {
        use SignalWord::*;
        match self {
            MetBy => "met by",
            StartedBy => "started by",
            FinishedBy => "finished by",
            OverlappedBy => "overlapped by",
            Equal => "at the same time as",
            other => other.as_str(),
        }
    }

    pub fn tso_rule(self) -> Option<TsoRule> {
        use SignalWord::*;
        match self {
            Before | PriorTo => Some(TsoRule::UpToStart),
            After => Some(TsoRule::FromEnd),
            Since => Some(TsoRule::FromStart),
            Until => Some(TsoRule::UpToEnd),
            During | While | Between | When => Some(TsoRule::Within),
            _ => None,
        }
    }

    pub fn allen_kind(self) -> Option<AllenKind> {
        use SignalWord::*;
        match self {
            Meets => Some(AllenKind::Meets),
            MetBy => Some(AllenKind::MetBy),
            Starts => Some(AllenKind::Starts),
            StartedBy => Some(AllenKind::StartedBy),
            Finishes => Some(AllenKind::Finishes),
            FinishedBy => Some(AllenKind::FinishedBy),
            Overlaps => Some(AllenKind::Overlaps),
            OverlappedBy => Some(AllenKind::OverlappedBy),
            Equal => Some(AllenKind::Equal),
            _ => None,
        }
    }
}

impl fmt::Display for SignalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalWord {
    type Err = AlgebraError;

    /// Accepts the canonical spellings plus the run-together forms of the
    /// dictionary's semantic column (`metby`, `finishedby`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .collect();
        SignalWord::ALL
            .into_iter()
            .find(|w| w.as_str().replace(['-', ' '], "") == norm)
            .ok_or_else(|| AlgebraError::UnknownSignalWord(s.to_string()))
    }
}

impl Serialize for SignalWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for SignalWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `T' = op(w, t_start, t_end)`.
pub fn tso(word: SignalWord, t: &TimeInterval) -> Result<TimeInterval, AlgebraError> {
    let rule = word.tso_rule().ok_or(AlgebraError::NoTsoRule(word))?;
    let (start, end) = match rule {
        TsoRule::UpToStart => (Timestamp::NegInf, t.start()),
        TsoRule::FromEnd => (t.end(), Timestamp::PosInf),
        TsoRule::FromStart => (t.start(), Timestamp::PosInf),
        TsoRule::UpToEnd => (Timestamp::NegInf, t.end()),
        TsoRule::Within => (t.start(), t.end()),
    };
    TimeInterval::new(start, end).map_err(|_| AlgebraError::DegenerateConstraint(word))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let t = tso(SignalWord::Before, &TimeInterval::point(2008)).unwrap();
        assert_eq!(
            (t.start(), t.end()),
            (Timestamp::NegInf, Timestamp::At(2008))
        );
        let t = tso(SignalWord::During, &TimeInterval::range(1964, 1968)).unwrap();
        assert_eq!(t, TimeInterval::range(1964, 1968));
        let t = tso(SignalWord::After, &TimeInterval::point(1945)).unwrap();
        assert_eq!(
            (t.start(), t.end()),
            (Timestamp::At(1945), Timestamp::PosInf)
        );
    }

    #[test]
    fn remaining_rules() {
        let t = TimeInterval::range(10, 20);
        let at = |w| {
            let r = tso(w, &t).unwrap();
            (r.start(), r.end())
        };
        assert_eq!(
            at(SignalWord::PriorTo),
            (Timestamp::NegInf, Timestamp::At(10))
        );
        assert_eq!(
            at(SignalWord::Since),
            (Timestamp::At(10), Timestamp::PosInf)
        );
        assert_eq!(
            at(SignalWord::Until),
            (Timestamp::NegInf, Timestamp::At(20))
        );
        for w in [SignalWord::While, SignalWord::Between, SignalWord::When] {
            assert_eq!(at(w), (Timestamp::At(10), Timestamp::At(20)));
        }
    }

    #[test]
    fn each_word_has_exactly_one_meaning() {
        for w in SignalWord::ALL {
            assert!(w.tso_rule().is_some() ^ w.allen_kind().is_some(), "{w}");
            assert_eq!(w.as_str().parse::<SignalWord>().unwrap(), w);
        }
        assert_eq!("metby".parse::<SignalWord>().unwrap(), SignalWord::MetBy);
        assert_eq!(
            "finishedby".parse::<SignalWord>().unwrap(),
            SignalWord::FinishedBy
        );
        assert!(matches!(
            "eventually".parse::<SignalWord>(),
            Err(AlgebraError::UnknownSignalWord(_))
        ));
    }

    #[test]
    fn allen_words_have_no_rule() {
        assert_eq!(
            tso(SignalWord::Meets, &TimeInterval::point(1)),
            Err(AlgebraError::NoTsoRule(SignalWord::Meets))
        );
        let open = TimeInterval::new(Timestamp::NegInf, Timestamp::At(3)).unwrap();
        assert_eq!(
            tso(SignalWord::Before, &open),
            Err(AlgebraError::DegenerateConstraint(SignalWord::Before))
        );
    }

    #[test]
    fn dictionary_semantics_are_signal_words() {
        for r in &super::super::allen::ALLEN_DICTIONARY {
            assert!(r.semantic.parse::<SignalWord>().is_ok(), "{}", r.semantic);
        }
    }
}
