//! Allen relations keyed by endpoint sign signatures.
//!
//! For intervals `X = [s1, e1]` and `Y = [s2, e2]` the signature is the sign
//! of each of
//!
//! ```text
//! [s1 - e1, s2 - e2, s1 - s2, s1 - e2, e1 - s2, e1 - e2]
//! ```
//!
//! The first two components tell points (`0`) from ranges (`-1`); the other
//! four pin down the qualitative relation. The 26 reachable signatures are
//! the 13 range/range relations plus 5 point/range, 5 range/point and 3
//! point/point cases.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tkg::TimeInterval;

/// Six sign components in `{-1, 0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AllenSignature(pub [i8; 6]);

impl fmt::Display for AllenSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The 13 basic relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllenKind {
    Before,
    Meets,
    Overlaps,
    FinishedBy,
    Contains,
    Starts,
    Equal,
    StartedBy,
    During,
    Finishes,
    OverlappedBy,
    MetBy,
    After,
}

impl AllenKind {
    pub const ALL: [AllenKind; 13] = [
        AllenKind::Before,
        AllenKind::Meets,
        AllenKind::Overlaps,
        AllenKind::FinishedBy,
        AllenKind::Contains,
        AllenKind::Starts,
        AllenKind::Equal,
        AllenKind::StartedBy,
        AllenKind::During,
        AllenKind::Finishes,
        AllenKind::OverlappedBy,
        AllenKind::MetBy,
        AllenKind::After,
    ];

    pub fn converse(self) -> AllenKind {
        use AllenKind::*;
        match self {
            Before => After,
            Meets => MetBy,
            Overlaps => OverlappedBy,
            FinishedBy => Finishes,
            Contains => During,
            Starts => StartedBy,
            Equal => Equal,
            StartedBy => Starts,
            During => Contains,
            Finishes => FinishedBy,
            OverlappedBy => Overlaps,
            MetBy => Meets,
            After => Before,
        }
    }

    /// Allen's short symbol (`<`, `m`, `o`, ...).
    pub fn symbol(self) -> &'static str {
        use AllenKind::*;
        match self {
            Before => "<",
            Meets => "m",
            Overlaps => "o",
            FinishedBy => "fi",
            Contains => "di",
            Starts => "s",
            Equal => "=",
            StartedBy => "si",
            During => "d",
            Finishes => "f",
            OverlappedBy => "oi",
            MetBy => "mi",
            After => ">",
        }
    }

    /// Reading of `X <kind> Y` as an English phrase.
    pub fn phrase(self) -> &'static str {
        use AllenKind::*;
        match self {
            Before => "before",
            Meets => "meets",
            Overlaps => "overlaps",
            FinishedBy => "is finished by",
            Contains => "contains",
            Starts => "starts",
            Equal => "equals",
            StartedBy => "is started by",
            During => "during",
            Finishes => "finishes",
            OverlappedBy => "is overlapped by",
            MetBy => "is met by",
            After => "after",
        }
    }

    pub fn name(self) -> &'static str {
        use AllenKind::*;
        match self {
            Before => "before",
            Meets => "meets",
            Overlaps => "overlaps",
            FinishedBy => "finished-by",
            Contains => "contains",
            Starts => "starts",
            Equal => "equal",
            StartedBy => "started-by",
            During => "during",
            Finishes => "finishes",
            OverlappedBy => "overlapped-by",
            MetBy => "met-by",
            After => "after",
        }
    }
}

impl fmt::Display for AllenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether each operand is a time point (TP) or a time range (TR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairType {
    #[serde(rename = "TR-TR")]
    RangeRange,
    #[serde(rename = "TP-TR")]
    PointRange,
    #[serde(rename = "TR-TP")]
    RangePoint,
    #[serde(rename = "TP-TP")]
    PointPoint,
}

impl PairType {
    pub fn of(a: &TimeInterval, b: &TimeInterval) -> PairType {
        match (a.is_point(), b.is_point()) {
            (false, false) => PairType::RangeRange,
            (true, false) => PairType::PointRange,
            (false, true) => PairType::RangePoint,
            (true, true) => PairType::PointPoint,
        }
    }

    pub fn swapped(self) -> PairType {
        match self {
            PairType::PointRange => PairType::RangePoint,
            PairType::RangePoint => PairType::PointRange,
            other => other,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PairType::RangeRange => "TR-TR",
            PairType::PointRange => "TP-TR",
            PairType::RangePoint => "TR-TP",
            PairType::PointPoint => "TP-TP",
        }
    }
}

/// One row of the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AllenRelation {
    pub key: AllenSignature,
    pub kind: AllenKind,
    pub pair_type: PairType,
    /// Coarse signal word of the relation; several kinds share "during".
    pub semantic: &'static str,
}

const fn row(
    key: [i8; 6],
    kind: AllenKind,
    pair_type: PairType,
    semantic: &'static str,
) -> AllenRelation {
    AllenRelation {
        key: AllenSignature(key),
        kind,
        pair_type,
        semantic,
    }
}

use AllenKind as K;
use PairType as P;

/// The 26-entry signature dictionary.
pub const ALLEN_DICTIONARY: [AllenRelation; 26] = [
    row([-1, -1, -1, -1, -1, -1], K::Before, P::RangeRange, "before"),
    row([-1, -1, -1, -1, 0, -1], K::Meets, P::RangeRange, "meets"),
    row(
        [-1, -1, -1, -1, 1, -1],
        K::Overlaps,
        P::RangeRange,
        "during",
    ),
    row(
        [-1, -1, -1, -1, 1, 0],
        K::FinishedBy,
        P::RangeRange,
        "finishedby",
    ),
    row([-1, -1, -1, -1, 1, 1], K::Contains, P::RangeRange, "during"),
    row([-1, -1, 0, -1, 1, -1], K::Starts, P::RangeRange, "starts"),
    row([-1, -1, 0, -1, 1, 0], K::Equal, P::RangeRange, "equal"),
    row(
        [-1, -1, 0, -1, 1, 1],
        K::StartedBy,
        P::RangeRange,
        "startedby",
    ),
    row([-1, -1, 1, -1, 1, -1], K::During, P::RangeRange, "during"),
    row(
        [-1, -1, 1, -1, 1, 0],
        K::Finishes,
        P::RangeRange,
        "finishes",
    ),
    row(
        [-1, -1, 1, -1, 1, 1],
        K::OverlappedBy,
        P::RangeRange,
        "during",
    ),
    row([-1, -1, 1, 0, 1, 1], K::MetBy, P::RangeRange, "metby"),
    row([-1, -1, 1, 1, 1, 1], K::After, P::RangeRange, "after"),
    row([0, -1, -1, -1, -1, -1], K::Before, P::PointRange, "before"),
    row([0, -1, 0, -1, 0, -1], K::Starts, P::PointRange, "starts"),
    row([0, -1, 1, -1, 1, -1], K::During, P::PointRange, "during"),
    row([0, -1, 1, 0, 1, 0], K::Finishes, P::PointRange, "finishes"),
    row([0, -1, 1, 1, 1, 1], K::After, P::PointRange, "after"),
    row([-1, 0, -1, -1, -1, -1], K::Before, P::RangePoint, "before"),
    row(
        [-1, 0, -1, -1, 0, 0],
        K::FinishedBy,
        P::RangePoint,
        "finishes",
    ),
    row([-1, 0, -1, -1, 1, 1], K::Contains, P::RangePoint, "during"),
    row([-1, 0, 0, 0, 1, 1], K::StartedBy, P::RangePoint, "starts"),
    row([-1, 0, 1, 1, 1, 1], K::After, P::RangePoint, "after"),
    row([0, 0, -1, -1, -1, -1], K::Before, P::PointPoint, "before"),
    row([0, 0, 0, 0, 0, 0], K::Equal, P::PointPoint, "equal"),
    row([0, 0, 1, 1, 1, 1], K::After, P::PointPoint, "after"),
];

/// Sign signature of `a` against `b`.
pub fn signature(a: &TimeInterval, b: &TimeInterval) -> AllenSignature {
    let (s1, e1, s2, e2) = (a.start(), a.end(), b.start(), b.end());
    AllenSignature([
        s1.sign_diff(e1),
        s2.sign_diff(e2),
        s1.sign_diff(s2),
        s1.sign_diff(e2),
        e1.sign_diff(s2),
        e1.sign_diff(e2),
    ])
}

/// Dictionary entry for a signature, if it is one of the 26 keys.
pub fn lookup(key: AllenSignature) -> Option<&'static AllenRelation> {
    ALLEN_DICTIONARY.iter().find(|r| r.key == key)
}

/// The relation of `a` to `b`.
///
/// Every pair of valid intervals produces one of the 26 keys; a miss would
/// mean the dictionary is wrong, so it panics.
pub fn allen_relation(a: &TimeInterval, b: &TimeInterval) -> AllenRelation {
    let key = signature(a, b);
    *lookup(key).unwrap_or_else(|| panic!("signature {key} missing from the Allen dictionary"))
}

/// Tab-separated dump: `key, kind, pair_type, semantic, symbol`.
pub fn dictionary_tsv() -> String {
    let mut out = String::from("key\tkind\tpair_type\tsemantic\tsymbol\n");
    for r in &ALLEN_DICTIONARY {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.key,
            r.kind,
            r.pair_type.label(),
            r.semantic,
            r.kind.symbol()
        ));
    }
    out
}
