use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::json;
use tkgqa::generator::{
    assign_splits, generate_pairs, write_dataset, DatasetStats, GeneratorConfig, GeneratorError,
};
use tkgqa::net::UreqTransport;
use tkgqa::paraphrase::{paraphrase_all, ParaphraseCache, ParaphraseProvider};

use crate::manifest::{self, RunManifest};
use crate::{load_facts, CliError, CliResult, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParaphraseMode {
    None,
    Http,
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    /// Fact file (`subject|predicate|object|start|end`).
    #[arg(long)]
    facts: PathBuf,
    /// Output directory for the split files, stats and manifest.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed of the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON generator configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "year")]
    granularity: Unit,
    /// Number of simple samples (overrides the configuration).
    #[arg(long)]
    simple: Option<u64>,
    /// Number of medium samples (overrides the configuration).
    #[arg(long)]
    medium: Option<u64>,
    /// Number of complex samples (overrides the configuration).
    #[arg(long)]
    complex: Option<u64>,
    #[arg(long, value_enum, default_value = "none")]
    paraphrase: ParaphraseMode,
    /// Chat-completion URL for `--paraphrase http`.
    #[arg(long)]
    paraphrase_endpoint: Option<String>,
    /// Model name for `--paraphrase http`.
    #[arg(long)]
    paraphrase_model: Option<String>,
    /// JSONL reply cache for `--paraphrase http`.
    #[arg(long)]
    paraphrase_cache: Option<PathBuf>,
}

fn input_error(e: GeneratorError) -> CliError {
    match e {
        GeneratorError::Audit { .. } | GeneratorError::Algebra(_) => {
            CliError::Internal(e.to_string())
        }
        other => CliError::Input(other.to_string()),
    }
}

fn effective_config(args: &GenerateArgs) -> CliResult<GeneratorConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            if !p.is_file() {
                return Err(CliError::Input(format!(
                    "config file not found: {}",
                    p.display()
                )));
            }
            GeneratorConfig::load(p).map_err(input_error)?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.simple {
        cfg.counts.simple = n;
    }
    if let Some(n) = args.medium {
        cfg.counts.medium = n;
    }
    if let Some(n) = args.complex {
        cfg.counts.complex = n;
    }
    cfg.validate().map_err(input_error)?;
    Ok(cfg)
}

fn provider(args: &GenerateArgs) -> CliResult<ParaphraseProvider> {
    let p = match args.paraphrase {
        ParaphraseMode::None => ParaphraseProvider::identity(),
        ParaphraseMode::Http => {
            let (Some(url), Some(model)) = (&args.paraphrase_endpoint, &args.paraphrase_model)
            else {
                return Err(CliError::Input(
                    "--paraphrase http needs --paraphrase-endpoint and --paraphrase-model".into(),
                ));
            };
            ParaphraseProvider::http(url.clone(), model.clone())
        }
    };
    p.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(p)
}

const OUTPUTS: [&str; 4] = ["train.jsonl", "val.jsonl", "test.jsonl", "stats.json"];

fn remove_outputs(dir: &Path) {
    for name in OUTPUTS.iter().chain(&[manifest::FILE_NAME]) {
        let _ = std::fs::remove_file(dir.join(name));
    }
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let started_at = manifest::now();
    let cfg = effective_config(args)?;
    let provider = provider(args)?;
    let kg = load_facts(&args.facts, args.granularity)?;
    let bank = cfg.template_bank().map_err(input_error)?;

    let mut inputs = BTreeMap::new();
    inputs.insert(
        args.facts.display().to_string(),
        manifest::file_digest(&args.facts)?,
    );
    if let Some(c) = &args.config {
        inputs.insert(c.display().to_string(), manifest::file_digest(c)?);
    }
    if let Some(t) = &cfg.templates {
        inputs.insert(t.display().to_string(), manifest::file_digest(t)?);
    }

    let mut pairs = generate_pairs(&kg, &cfg, &bank).map_err(input_error)?;

    let mut cache = match (&args.paraphrase_cache, args.paraphrase) {
        (Some(p), ParaphraseMode::Http) => {
            ParaphraseCache::open(p).map_err(|e| CliError::Input(e.to_string()))?
        }
        _ => ParaphraseCache::in_memory(),
    };
    let transport = UreqTransport::new(provider.timeout_duration());
    let report = paraphrase_all(&mut pairs, &provider, &mut cache, &transport)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    if args.paraphrase == ParaphraseMode::Http {
        log::info!("paraphrase: {report:?}");
        eprintln!(
            "paraphrased {} of {} questions ({} cache hits, {} failed requests, {} rejected)",
            report.accepted,
            report.pairs,
            report.cache_hits,
            report.failed,
            report.rejected_by_guard
        );
    }

    assign_splits(&mut pairs, cfg.split_ratios, cfg.seed).map_err(input_error)?;

    let existed = args.out.exists();
    let finish = || -> CliResult<()> {
        write_dataset(&pairs, &args.out).map_err(|e| CliError::Internal(e.to_string()))?;
        let mut outputs = BTreeMap::new();
        for name in OUTPUTS {
            outputs.insert(
                name.to_string(),
                manifest::file_digest(&args.out.join(name))?,
            );
        }
        let effective = json!({
            "generator": cfg,
            "granularity": tkgqa::tkg::Granularity::from(args.granularity).name(),
            "paraphrase": provider,
        });
        let m = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            config_digest: manifest::sha256_hex(effective.to_string().as_bytes()),
            inputs,
            outputs,
            started_at,
            finished_at: manifest::now(),
        };
        manifest::write(&args.out, &m)
    };
    if let Err(e) = finish() {
        remove_outputs(&args.out);
        if !existed {
            let _ = std::fs::remove_dir(&args.out);
        }
        return Err(e);
    }

    print!("{}", DatasetStats::from_pairs(&pairs).render_table());
    Ok(())
}
