use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use crate::generator::QAPair;
use crate::net::{HttpRequest, Transport};
use crate::tkg::{EntityId, FactId, TemporalKG};

use super::{EvalError, RankingRun};

/// Vectors keyed by query or fact id, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dim: usize,
    rows: BTreeMap<u64, Vec<f64>>,
}

impl VectorTable {
    pub fn new(dim: usize, rows: BTreeMap<u64, Vec<f64>>) -> Result<Self, EvalError> {
        for (id, v) in &rows {
            if v.len() != dim {
                return Err(EvalError::Dimension {
                    context: format!("vector {id}"),
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EvalError::Parse {
                    context: format!("vector {id}"),
                    reason: "non-finite component".into(),
                });
            }
        }
        let zero = rows.values().filter(|v| norm(v) == 0.0).count();
        if zero > 0 {
            log::warn!("{zero} zero-norm vectors will be left out of rankings");
        }
        Ok(VectorTable { dim, rows })
    }

    /// `dim=<d>` header, then `<id> <v1> ... <vd>` per line.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| EvalError::Parse {
            context: "vector file".into(),
            reason: "missing dim=<d> header".into(),
        })?;
        let dim: usize = header
            .trim()
            .strip_prefix("dim=")
            .and_then(|d| d.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| EvalError::Parse {
                context: "vector file line 1".into(),
                reason: format!("expected dim=<d>, found `{header}`"),
            })?;
        let mut rows = BTreeMap::new();
        for (i, line) in lines {
            let bad = |reason: String| EvalError::Parse {
                context: format!("vector file line {}", i + 1),
                reason,
            };
            let mut parts = line.split_whitespace();
            let id: u64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad("row does not start with an integer id".into()))?;
            let values: Vec<f64> = parts
                .map(|p| p.parse::<f64>().map_err(|e| bad(format!("`{p}`: {e}"))))
                .collect::<Result<_, _>>()?;
            if values.len() != dim {
                return Err(EvalError::Dimension {
                    context: format!("vector file line {}", i + 1),
                    expected: dim,
                    found: values.len(),
                });
            }
            if rows.insert(id, values).is_some() {
                return Err(bad(format!("duplicate id {id}")));
            }
        }
        VectorTable::new(dim, rows)
    }

    pub fn read(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
            context: path.display().to_string(),
            message: e.to_string(),
        })?;
        VectorTable::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn render(&self) -> String {
        let mut out = format!("dim={}\n", self.dim);
        for (id, v) in &self.rows {
            out.push_str(&id.to_string());
            for x in v {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&[f64]> {
        self.rows.get(&id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &[f64])> {
        self.rows.iter().map(|(k, v)| (*k, v.as_slice()))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::Dimension {
            context: "cosine".into(),
            expected: a.len(),
            found: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(EvalError::ZeroNorm("cosine operand".into()));
    }
    Ok(dot(a, b) / (na * nb))
}

/// Facts by descending cosine similarity to `query`, ties by ascending id.
/// Zero-norm fact vectors are skipped; `prefilter` restricts the candidates.
pub fn cosine_rank(
    query: &[f64],
    facts: &VectorTable,
    prefilter: Option<&BTreeSet<FactId>>,
) -> Result<Vec<FactId>, EvalError> {
    if query.len() != facts.dim() {
        return Err(EvalError::Dimension {
            context: "query vector".into(),
            expected: facts.dim(),
            found: query.len(),
        });
    }
    let qn = norm(query);
    if qn == 0.0 {
        return Err(EvalError::ZeroNorm("query vector".into()));
    }
    if prefilter.is_some_and(BTreeSet::is_empty) {
        return Err(EvalError::EmptyPrefilter);
    }
    let mut scored: Vec<(f64, u64)> = facts
        .iter()
        .filter(|(id, _)| prefilter.is_none_or(|p| p.contains(&FactId(*id))))
        .filter_map(|(id, v)| {
            let n = norm(v);
            (n > 0.0).then(|| (dot(query, v) / (qn * n), id))
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().map(|(_, id)| FactId(id)).collect())
}

/// Label and margin of the cosine embedding loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub margin: f64,
    /// `1` for a matching pair, `-1` otherwise.
    pub label: i8,
}

/// `1 - cos` for `label = 1`, `max(0, cos - margin)` for `label = -1`.
pub fn cosine_embedding_loss(vq: &[f64], vf: &[f64], p: LossParams) -> Result<f64, EvalError> {
    if !(0.0..1.0).contains(&p.margin) {
        return Err(EvalError::Margin(p.margin));
    }
    let c = cosine(vq, vf)?;
    match p.label {
        1 => Ok((1.0 - c).max(0.0)),
        -1 => Ok((c - p.margin).max(0.0)),
        other => Err(EvalError::Label(other)),
    }
}

/// Entities whose full name occurs verbatim in `text`.
pub fn topic_entities(text: &str, kg: &TemporalKG) -> BTreeSet<EntityId> {
    kg.entities()
        .iter()
        .filter(|(_, name)| !name.is_empty() && text.contains(name))
        .map(|(id, _)| EntityId(id))
        .collect()
}

/// Facts with any of `entities` as subject or object.
pub fn facts_touching(kg: &TemporalKG, entities: &BTreeSet<EntityId>) -> BTreeSet<FactId> {
    entities
        .iter()
        .flat_map(|&e| kg.facts_of(e).iter().copied())
        .collect()
}

/// Candidate restriction of the retrieval baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RagMode {
    /// Rank every fact.
    Plain,
    /// Rank facts touching entities named in the question.
    Semantic,
    /// Rank facts touching the entities of the gold context facts.
    SemanticGold,
}

/// Rankings of the cosine baselines for every pair with a query vector.
/// When the semantic prefilter finds no entity, all facts are ranked.
pub fn rag_runs(
    pairs: &[QAPair],
    queries: &VectorTable,
    facts: &VectorTable,
    kg: Option<&TemporalKG>,
    mode: RagMode,
) -> Result<Vec<RankingRun>, EvalError> {
    if queries.dim() != facts.dim() {
        return Err(EvalError::Dimension {
            context: "query and fact vector files".into(),
            expected: facts.dim(),
            found: queries.dim(),
        });
    }
    let kg = match (mode, kg) {
        (RagMode::Plain, _) => None,
        (_, Some(kg)) => Some(kg),
        (_, None) => return Err(EvalError::NeedsGraph),
    };
    let mut missing: Vec<u64> = pairs
        .iter()
        .map(|p| p.id)
        .filter(|id| queries.get(*id).is_none())
        .collect();
    missing.sort();
    if !missing.is_empty() {
        log::warn!("{} queries have no vector and are skipped", missing.len());
    }
    let mut sorted: Vec<&QAPair> = pairs
        .iter()
        .filter(|p| queries.get(p.id).is_some())
        .collect();
    sorted.sort_by_key(|p| p.id);
    sorted
        .par_iter()
        .map(|p| {
            let prefilter = kg.map(|kg| {
                let entities = match mode {
                    RagMode::SemanticGold => p
                        .context_fact_ids
                        .iter()
                        .filter_map(|&f| kg.fact(f))
                        .flat_map(|f| [f.subject, f.object])
                        .collect(),
                    _ => topic_entities(&p.question, kg),
                };
                facts_touching(kg, &entities)
            });
            let prefilter = prefilter.filter(|s| !s.is_empty());
            let ranked = cosine_rank(
                queries.get(p.id).expect("filtered"),
                facts,
                prefilter.as_ref(),
            )?;
            Ok(RankingRun {
                query_id: p.id,
                ranked_fact_ids: ranked,
            })
        })
        .collect()
}

/// Client for an embeddings endpoint that accepts `{model, input: [..]}`
/// and answers `{data: [{embedding: [..]}, ..]}` in input order.
pub struct HttpEmbedder<'a> {
    pub endpoint_url: String,
    pub model_name: String,
    pub api_key: Option<String>,
    pub transport: &'a dyn Transport,
}

impl HttpEmbedder<'_> {
    pub fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EvalError> {
        let mut headers = Vec::new();
        if let Some(k) = &self.api_key {
            headers.push(("Authorization".to_string(), format!("Bearer {k}")));
        }
        let req = HttpRequest {
            url: self.endpoint_url.clone(),
            headers,
            body: json!({"model": self.model_name, "input": texts}).to_string(),
        };
        let resp = self
            .transport
            .post_json(&req)
            .map_err(|e| EvalError::Embedding(e.to_string()))?;
        if !resp.is_success() {
            return Err(EvalError::Embedding(format!("HTTP {}", resp.status)));
        }
        let v: serde_json::Value =
            serde_json::from_str(&resp.body).map_err(|e| EvalError::Embedding(e.to_string()))?;
        let data = v
            .get("data")
            .and_then(|d| d.as_array())
            .ok_or_else(|| EvalError::Embedding("response lacks data[]".into()))?;
        if data.len() != texts.len() {
            return Err(EvalError::Embedding(format!(
                "asked for {} embeddings, got {}",
                texts.len(),
                data.len()
            )));
        }
        data.iter()
            .map(|row| {
                row.get("embedding")
                    .and_then(|e| e.as_array())
                    .and_then(|xs| xs.iter().map(|x| x.as_f64()).collect::<Option<Vec<f64>>>())
                    .ok_or_else(|| EvalError::Embedding("malformed embedding row".into()))
            })
            .collect()
    }
}
