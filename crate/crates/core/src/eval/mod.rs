//! Retrieval scoring with multi-fact MRR and Hits@K, plus cosine-similarity
//! baselines over supplied embedding vectors.

mod metrics;
mod retrieval;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{Level, QAPair};
use crate::tkg::FactId;

pub use metrics::{hits_at_k, rank_q, reciprocal_rank};
pub use retrieval::{
    cosine, cosine_embedding_loss, cosine_rank, facts_touching, rag_runs, topic_entities,
    HttpEmbedder, LossParams, RagMode, VectorTable,
};

pub const DEFAULT_KS: [usize; 3] = [1, 3, 10];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("the relevant fact set is empty")]
    EmptyRelevant,
    #[error("K must be at least 1")]
    ZeroK,
    #[error("rankings reference {} unknown query ids: {}", .0.len(), preview(.0))]
    UnknownQueries(Vec<u64>),
    #[error("query {0} has more than one ranking")]
    DuplicateRun(u64),
    #[error("ranking for query {query} lists fact {fact} twice")]
    DuplicateFact { query: u64, fact: FactId },
    #[error("{context}: expected dimension {expected}, found {found}")]
    Dimension {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("{0} has zero norm")]
    ZeroNorm(String),
    #[error("prefilter is empty")]
    EmptyPrefilter,
    #[error("margin must lie in [0, 1), got {0}")]
    Margin(f64),
    #[error("label must be 1 or -1, got {0}")]
    Label(i8),
    #[error("semantic retrieval needs the fact graph")]
    NeedsGraph,
    #[error("embedding endpoint: {0}")]
    Embedding(String),
    #[error("{context}: {message}")]
    Io { context: String, message: String },
    #[error("{context}: {reason}")]
    Parse { context: String, reason: String },
}

impl EvalError {
    fn in_file(self, path: &Path) -> EvalError {
        match self {
            EvalError::Parse { context, reason } => EvalError::Parse {
                context: format!("{}: {context}", path.display()),
                reason,
            },
            other => other,
        }
    }
}

fn preview(ids: &[u64]) -> String {
    let shown: Vec<String> = ids.iter().take(10).map(u64::to_string).collect();
    let more = if ids.len() > 10 { ", ..." } else { "" };
    format!("{}{more}", shown.join(", "))
}

/// One line of a rankings file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRun {
    pub query_id: u64,
    pub ranked_fact_ids: Vec<FactId>,
}

pub fn read_rankings(path: &Path) -> Result<Vec<RankingRun>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
        context: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EvalError::Parse {
                context: format!("{} line {}", path.display(), i + 1),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// JSONL text of `runs`, one run per line.
pub fn render_rankings(runs: &[RankingRun]) -> String {
    runs.iter()
        .map(|r| serde_json::to_string(r).expect("run serializes") + "\n")
        .collect()
}

/// Metrics over one group of queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCell {
    pub queries: usize,
    pub mrr: f64,
    /// K -> Hits@K
    pub hits: BTreeMap<usize, f64>,
}

impl MetricCell {
    fn empty(ks: &[usize]) -> Self {
        MetricCell {
            queries: 0,
            mrr: 0.0,
            hits: ks.iter().map(|&k| (k, 0.0)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub overall: MetricCell,
    /// Keyed by level name; every level is present.
    pub levels: BTreeMap<String, MetricCell>,
    /// Dataset pairs no run was supplied for.
    pub unranked_queries: usize,
}

impl EvalReport {
    /// Rows overall, simple, medium, complex; columns queries, MRR, Hits@K.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<10}{:>9}{:>9}", "level", "queries", "MRR");
        for k in &self.ks {
            let _ = write!(out, "{:>9}", format!("Hits@{k}"));
        }
        out.push('\n');
        let mut row = |name: &str, c: &MetricCell| {
            let _ = write!(out, "{:<10}{:>9}{:>9.4}", name, c.queries, c.mrr);
            for k in &self.ks {
                let _ = write!(out, "{:>9.4}", c.hits.get(k).copied().unwrap_or(0.0));
            }
            out.push('\n');
        };
        row("overall", &self.overall);
        for level in Level::ALL {
            if let Some(c) = self.levels.get(level.name()) {
                row(level.name(), c);
            }
        }
        out
    }
}

/// Scores `runs` against the context facts of `pairs`, overall and per
/// level. Sums run in query-id order so the report does not depend on the
/// order of `runs`.
pub fn evaluate(
    runs: &[RankingRun],
    pairs: &[QAPair],
    ks: &[usize],
) -> Result<EvalReport, EvalError> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(EvalError::ZeroK);
    }
    let mut ks = ks.to_vec();
    ks.sort();
    ks.dedup();
    let by_id: BTreeMap<u64, &QAPair> = pairs.iter().map(|p| (p.id, p)).collect();

    let mut sorted: Vec<&RankingRun> = runs.iter().collect();
    sorted.sort_by_key(|r| r.query_id);
    let unknown: Vec<u64> = sorted
        .iter()
        .map(|r| r.query_id)
        .filter(|q| !by_id.contains_key(q))
        .collect();
    if !unknown.is_empty() {
        return Err(EvalError::UnknownQueries(unknown));
    }
    for w in sorted.windows(2) {
        if w[0].query_id == w[1].query_id {
            return Err(EvalError::DuplicateRun(w[0].query_id));
        }
    }
    for r in &sorted {
        let mut seen = BTreeSet::new();
        if let Some(f) = r.ranked_fact_ids.iter().find(|f| !seen.insert(**f)) {
            return Err(EvalError::DuplicateFact {
                query: r.query_id,
                fact: *f,
            });
        }
    }

    let scored: Vec<(Level, f64, Vec<u8>)> = sorted
        .par_iter()
        .map(|r| {
            let p = by_id[&r.query_id];
            let rr = reciprocal_rank(&r.ranked_fact_ids, &p.context_fact_ids)?;
            let hits = ks
                .iter()
                .map(|&k| hits_at_k(&r.ranked_fact_ids, &p.context_fact_ids, k))
                .collect::<Result<Vec<u8>, _>>()?;
            Ok((p.level, rr, hits))
        })
        .collect::<Result<_, EvalError>>()?;

    let aggregate = |filter: &dyn Fn(Level) -> bool| {
        let mut cell = MetricCell::empty(&ks);
        let mut rr_sum = 0.0;
        let mut hit_sums = vec![0u64; ks.len()];
        for (level, rr, hits) in &scored {
            if !filter(*level) {
                continue;
            }
            cell.queries += 1;
            rr_sum += rr;
            for (s, h) in hit_sums.iter_mut().zip(hits) {
                *s += u64::from(*h);
            }
        }
        if cell.queries > 0 {
            let n = cell.queries as f64;
            cell.mrr = rr_sum / n;
            for (k, s) in ks.iter().zip(hit_sums) {
                cell.hits.insert(*k, s as f64 / n);
            }
        }
        cell
    };
    let overall = aggregate(&|_| true);
    let levels = Level::ALL
        .iter()
        .map(|&l| (l.name().to_string(), aggregate(&|x| x == l)))
        .collect();
    Ok(EvalReport {
        ks,
        overall,
        levels,
        unranked_queries: pairs.len() - sorted.len(),
    })
}
