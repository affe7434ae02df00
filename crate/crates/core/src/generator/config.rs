use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    audit, generate_complex, generate_medium, generate_simple, AnswerType, GeneratorError, Level,
    QAPair, TemplateBank,
};
use crate::rng;
use crate::sampler::{Sampler, SamplerConfig};
use crate::tkg::TemporalKG;

/// Context samples to draw per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Counts {
    pub simple: u64,
    pub medium: u64,
    pub complex: u64,
}

impl Default for Counts {
    fn default() -> Self {
        Counts {
            simple: 100,
            medium: 100,
            complex: 100,
        }
    }
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.simple + self.medium + self.complex
    }
}

/// Train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitRatios {
    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let r = self.as_array();
        if r.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(GeneratorError::Config(format!(
                "split ratios must be non-negative, got {r:?}"
            )));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GeneratorError::Config(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub counts: Counts,
    pub split_ratios: SplitRatios,
    /// Answer types asked of every simple sample; drop `timestamp_range`
    /// for the five-question variant.
    pub simple_answer_types: Vec<AnswerType>,
    pub enable_negation: bool,
    /// Template bank file; the bundled bank when absent.
    pub templates: Option<PathBuf>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            sampler: SamplerConfig::default(),
            counts: Counts::default(),
            split_ratios: SplitRatios::default(),
            simple_answer_types: AnswerType::SIMPLE_DEFAULT.to_vec(),
            enable_negation: false,
            templates: None,
        }
    }
}

impl GeneratorConfig {
    pub fn from_json(text: &str) -> Result<Self, GeneratorError> {
        serde_json::from_str(text).map_err(|source| GeneratorError::Json {
            context: "parsing generator configuration".into(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GeneratorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GeneratorError::Io {
            context: format!("reading configuration {}", path.display()),
            source,
        })?;
        GeneratorConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        self.sampler.validate()?;
        self.split_ratios.validate()?;
        if self.simple_answer_types.is_empty() {
            return Err(GeneratorError::Config(
                "simple_answer_types is empty".into(),
            ));
        }
        for at in &self.simple_answer_types {
            if !AnswerType::SIMPLE_DEFAULT.contains(at) {
                return Err(GeneratorError::Config(format!(
                    "{} is not a simple-question answer type",
                    at.name()
                )));
            }
        }
        let mut uniq = self.simple_answer_types.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != self.simple_answer_types.len() {
            return Err(GeneratorError::Config(
                "simple_answer_types repeats an entry".into(),
            ));
        }
        Ok(())
    }

    /// The bank named by `templates`, or the bundled one.
    pub fn template_bank(&self) -> Result<TemplateBank, GeneratorError> {
        match &self.templates {
            Some(p) => TemplateBank::load(p),
            None => Ok(TemplateBank::builtin()),
        }
    }

    /// The sampler settings with this configuration's seed.
    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            seed: self.seed,
            ..self.sampler.clone()
        }
    }
}

/// Samples contexts, generates and audits pairs, and numbers them in draw
/// order. Splits are left at their default; see [`super::assign_splits`].
///
/// Draw `i` (simple draws first, then medium, then complex) uses sampler
/// stream `i` and generator stream `i`, so output does not depend on the
/// number of worker threads.
pub fn generate_pairs(
    kg: &TemporalKG,
    cfg: &GeneratorConfig,
    bank: &TemplateBank,
) -> Result<Vec<QAPair>, GeneratorError> {
    cfg.validate()?;
    let sampler = Sampler::new(kg, &cfg.sampler_config())?;
    let c = cfg.counts;
    let draws: Vec<(u64, Level)> = (0..c.total())
        .map(|i| {
            let level = if i < c.simple {
                Level::Simple
            } else if i < c.simple + c.medium {
                Level::Medium
            } else {
                Level::Complex
            };
            (i, level)
        })
        .collect();
    let batches: Vec<Vec<QAPair>> = draws
        .par_iter()
        .map(|&(i, level)| -> Result<Vec<QAPair>, GeneratorError> {
            let sample = sampler.sample(level.arity(), i)?;
            let mut r = rng::stream(cfg.seed, rng::domain::GENERATOR, i);
            match level {
                Level::Simple => generate_simple(kg, sample.facts[0], bank, cfg, &mut r),
                Level::Medium => generate_medium(kg, &sample.facts, bank, cfg, &mut r),
                Level::Complex => generate_complex(kg, &sample.facts, bank, cfg, &mut r),
            }
        })
        .collect::<Result<_, _>>()?;
    let mut pairs: Vec<QAPair> = batches.into_iter().flatten().collect();
    for (id, p) in pairs.iter_mut().enumerate() {
        p.id = id as u64;
    }
    pairs.par_iter().try_for_each(|p| {
        audit(p, kg).map_err(|source| GeneratorError::Audit { id: p.id, source })
    })?;
    log::info!("generated {} pairs from {} draws", pairs.len(), c.total());
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_round_trip() {
        let cfg = GeneratorConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(GeneratorConfig::from_json(&text).unwrap(), cfg);
        let partial =
            GeneratorConfig::from_json(r#"{"seed": 7, "counts": {"simple": 3}}"#).unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(
            partial.counts,
            Counts {
                simple: 3,
                ..Counts::default()
            }
        );
        assert!(GeneratorConfig::from_json(r#"{"sede": 7}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = GeneratorConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.split_ratios = SplitRatios {
            train: 0.5,
            val: 0.2,
            test: 0.2,
        };
        assert!(cfg.validate().is_err());
        cfg.split_ratios = SplitRatios {
            train: 1.2,
            val: -0.1,
            test: -0.1,
        };
        assert!(cfg.validate().is_err());
        let mut cfg = GeneratorConfig {
            simple_answer_types: vec![AnswerType::RelationRanking],
            ..GeneratorConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.simple_answer_types = vec![AnswerType::Subject, AnswerType::Subject];
        assert!(cfg.validate().is_err());
    }
}
