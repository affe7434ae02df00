use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use tkgqa::eval::{
    evaluate, rag_runs, read_rankings, render_rankings, EvalError, HttpEmbedder, RagMode,
    RankingRun, VectorTable, DEFAULT_KS,
};
use tkgqa::generator::{QAPair, Split};
use tkgqa::net::UreqTransport;
use tkgqa::paraphrase::API_KEY_ENV;
use tkgqa::tkg::TemporalKG;

use crate::{load_facts, load_pairs, CliError, CliResult, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Score a rankings file.
    Rankings,
    /// Cosine ranking over all facts.
    Rag,
    /// Cosine ranking over facts touching the question's entities.
    RagSemantic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    /// Dataset directory or a single JSONL file.
    #[arg(long)]
    qa: PathBuf,
    #[arg(long, value_enum, default_value = "rankings")]
    mode: Mode,
    /// JSONL of `{"query_id", "ranked_fact_ids"}` for `--mode rankings`.
    #[arg(long)]
    rankings: Option<PathBuf>,
    /// Question vectors keyed by pair id.
    #[arg(long)]
    query_vectors: Option<PathBuf>,
    /// Fact vectors keyed by fact id.
    #[arg(long)]
    fact_vectors: Option<PathBuf>,
    /// Embeddings endpoint used instead of vector files.
    #[arg(long)]
    embedding_endpoint: Option<String>,
    #[arg(long)]
    embedding_model: Option<String>,
    /// Fact file, needed by `rag-semantic` and by embedding endpoints.
    #[arg(long)]
    facts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "year")]
    granularity: Unit,
    /// Prefilter on the entities of the gold context facts.
    #[arg(long)]
    gold_entities: bool,
    /// Only score pairs of this split.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    /// Comma-separated cutoffs for Hits@K.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS.to_vec())]
    k: Vec<usize>,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the rankings produced by a cosine mode.
    #[arg(long)]
    save_rankings: Option<PathBuf>,
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::Embedding(_) => CliError::Internal(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

const EMBED_BATCH: usize = 64;

fn embed_all(embedder: &HttpEmbedder<'_>, items: Vec<(u64, String)>) -> CliResult<VectorTable> {
    let mut rows = BTreeMap::new();
    let mut dim = 0;
    for chunk in items.chunks(EMBED_BATCH) {
        let texts: Vec<String> = chunk.iter().map(|(_, t)| t.clone()).collect();
        let vectors = embedder.embed(&texts).map_err(eval_error)?;
        for ((id, _), v) in chunk.iter().zip(vectors) {
            dim = v.len();
            rows.insert(*id, v);
        }
    }
    VectorTable::new(dim.max(1), rows).map_err(eval_error)
}

fn vectors(
    args: &EvaluateArgs,
    pairs: &[QAPair],
    kg: Option<&TemporalKG>,
) -> CliResult<(VectorTable, VectorTable)> {
    if let Some(url) = &args.embedding_endpoint {
        let model = args.embedding_model.clone().ok_or_else(|| {
            CliError::Input("--embedding-endpoint needs --embedding-model".into())
        })?;
        let kg = kg.ok_or_else(|| CliError::Input("--embedding-endpoint needs --facts".into()))?;
        let transport = UreqTransport::new(std::time::Duration::from_secs(60));
        let embedder = HttpEmbedder {
            endpoint_url: url.clone(),
            model_name: model,
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            transport: &transport,
        };
        let queries = embed_all(
            &embedder,
            pairs.iter().map(|p| (p.id, p.question.clone())).collect(),
        )?;
        let facts = embed_all(
            &embedder,
            kg.facts()
                .iter()
                .map(|f| (f.id.0, kg.verbalize(f)))
                .collect(),
        )?;
        return Ok((queries, facts));
    }
    let (Some(q), Some(f)) = (&args.query_vectors, &args.fact_vectors) else {
        return Err(CliError::Input(
            "cosine modes need --query-vectors and --fact-vectors, or --embedding-endpoint".into(),
        ));
    };
    for p in [q, f] {
        if !p.is_file() {
            return Err(CliError::Input(format!(
                "vector file not found: {}",
                p.display()
            )));
        }
    }
    Ok((
        VectorTable::read(q).map_err(eval_error)?,
        VectorTable::read(f).map_err(eval_error)?,
    ))
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    let mut pairs = load_pairs(&args.qa)?;
    if let Some(s) = args.split {
        let keep = match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        };
        pairs.retain(|p| p.split == keep);
    }
    let kg = match &args.facts {
        Some(f) => Some(load_facts(f, args.granularity)?),
        None => None,
    };

    let runs: Vec<RankingRun> = match args.mode {
        Mode::Rankings => {
            let path = args
                .rankings
                .as_ref()
                .ok_or_else(|| CliError::Input("--mode rankings needs --rankings".into()))?;
            if !path.is_file() {
                return Err(CliError::Input(format!(
                    "rankings file not found: {}",
                    path.display()
                )));
            }
            let mut runs = read_rankings(path).map_err(eval_error)?;
            if args.split.is_some() {
                let ids: std::collections::BTreeSet<u64> = pairs.iter().map(|p| p.id).collect();
                runs.retain(|r| ids.contains(&r.query_id));
            }
            runs
        }
        Mode::Rag | Mode::RagSemantic => {
            let (queries, facts) = vectors(args, &pairs, kg.as_ref())?;
            let mode = match (args.mode, args.gold_entities) {
                (Mode::Rag, _) => RagMode::Plain,
                (_, false) => RagMode::Semantic,
                (_, true) => RagMode::SemanticGold,
            };
            let runs = rag_runs(&pairs, &queries, &facts, kg.as_ref(), mode).map_err(eval_error)?;
            if let Some(p) = &args.save_rankings {
                std::fs::write(p, render_rankings(&runs))
                    .map_err(|e| CliError::Internal(format!("writing {}: {e}", p.display())))?;
            }
            runs
        }
    };

    let report = evaluate(&runs, &pairs, &args.k).map_err(eval_error)?;
    if report.unranked_queries > 0 {
        eprintln!(
            "{} dataset pairs have no ranking and are not scored",
            report.unranked_queries
        );
    }
    if let Some(out) = &args.out {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(out, text + "\n")
            .map_err(|e| CliError::Internal(format!("writing {}: {e}", out.display())))?;
    }
    print!("{}", report.render_table());
    Ok(())
}
