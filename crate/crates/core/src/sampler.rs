//! Weighted context-fact sampling.
//!
//! The first fact of a sample is drawn with probability proportional to
//! `(freq(subject) + freq(object))^frequency_exponent`. Every further fact is
//! drawn, without replacement, proportionally to
//! `exp(-gap / temporal_tau) * (freq(subject) + freq(object))^frequency_exponent`
//! where `gap` is the smallest midpoint distance to an already chosen fact,
//! or 0 if the candidate overlaps one of them. Each draw owns the random
//! stream keyed by `(seed, draw_index)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::Level;
use crate::rng;
use crate::tkg::{Fact, FactId, TemporalKG};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Decay scale of the proximity weight, in granularity units.
    pub temporal_tau: f64,
    pub frequency_exponent: f64,
    pub allow_timeless: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            temporal_tau: 30.0,
            frequency_exponent: 1.0,
            allow_timeless: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.temporal_tau.is_nan() || self.temporal_tau <= 0.0 {
            return Err(SamplerError::Config(format!(
                "temporal_tau must be positive, got {}",
                self.temporal_tau
            )));
        }
        if !self.frequency_exponent.is_finite() || self.frequency_exponent < 0.0 {
            return Err(SamplerError::Config(format!(
                "frequency_exponent must be a finite non-negative number, got {}",
                self.frequency_exponent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("sample size must be 1, 2 or 3, got {0}")]
    Size(usize),
    #[error("need {needed} eligible facts, the graph has {available}")]
    TooFewEligible { needed: usize, available: usize },
}

/// 1-3 distinct context facts, in draw order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactSample {
    pub facts: Vec<FactId>,
}

impl FactSample {
    pub fn level(&self) -> Level {
        Level::from_arity(self.facts.len()).expect("sample holds 1-3 facts")
    }
}

/// Precomputed weights over the eligible facts of one graph.
#[derive(Debug)]
pub struct Sampler<'a> {
    kg: &'a TemporalKG,
    cfg: SamplerConfig,
    eligible: Vec<FactId>,
    frequency_weight: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(kg: &'a TemporalKG, cfg: &SamplerConfig) -> Result<Self, SamplerError> {
        cfg.validate()?;
        let freq = kg.entity_frequency();
        let eligible: Vec<FactId> = kg
            .facts()
            .iter()
            .filter(|f| cfg.allow_timeless || f.has_time)
            .map(|f| f.id)
            .collect();
        let frequency_weight = eligible
            .iter()
            .map(|&id| {
                let f = kg.fact(id).expect("eligible fact");
                let n = freq[&f.subject] + freq[&f.object];
                (n as f64).powf(cfg.frequency_exponent)
            })
            .collect();
        Ok(Sampler {
            kg,
            cfg: cfg.clone(),
            eligible,
            frequency_weight,
        })
    }

    pub fn eligible(&self) -> &[FactId] {
        &self.eligible
    }

    fn fact(&self, id: FactId) -> &Fact {
        self.kg.fact(id).expect("fact from this graph")
    }

    /// Distance used by the proximity weight.
    fn gap(&self, candidate: &Fact, chosen: &[FactId]) -> f64 {
        let mut best = f64::INFINITY;
        for &c in chosen {
            let other = self.fact(c);
            if candidate.interval.intersects(&other.interval) {
                return 0.0;
            }
            match (candidate.interval.midpoint(), other.interval.midpoint()) {
                (Some(a), Some(b)) => best = best.min((a - b).abs()),
                _ => return 0.0,
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }

    /// Unnormalized weight of every eligible fact given the facts already
    /// chosen; chosen facts get 0.
    pub fn weights(&self, chosen: &[FactId]) -> Vec<f64> {
        self.eligible
            .iter()
            .zip(&self.frequency_weight)
            .map(|(&id, &fw)| {
                if chosen.contains(&id) {
                    return 0.0;
                }
                if chosen.is_empty() {
                    return fw;
                }
                let gap = self.gap(self.fact(id), chosen);
                let proximity = if gap == 0.0 {
                    1.0
                } else {
                    (-gap / self.cfg.temporal_tau).exp()
                };
                proximity * fw
            })
            .collect()
    }

    pub fn sample(&self, size: usize, draw_index: u64) -> Result<FactSample, SamplerError> {
        if !(1..=3).contains(&size) {
            return Err(SamplerError::Size(size));
        }
        if self.eligible.len() < size {
            return Err(SamplerError::TooFewEligible {
                needed: size,
                available: self.eligible.len(),
            });
        }
        let mut rng = rng::stream(self.cfg.seed, rng::domain::SAMPLER, draw_index);
        let mut chosen: Vec<FactId> = Vec::with_capacity(size);
        while chosen.len() < size {
            let weights = self.weights(&chosen);
            let idx = pick(&weights, &mut rng, |i| !chosen.contains(&self.eligible[i]));
            chosen.push(self.eligible[idx]);
        }
        Ok(FactSample { facts: chosen })
    }
}

/// Roulette-wheel pick; falls back to uniform over `allowed` indices when the
/// weights carry no mass.
fn pick(weights: &[f64], rng: &mut impl Rng, allowed: impl Fn(usize) -> bool) -> usize {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last_positive = Some(i);
            if target < acc {
                return i;
            }
        }
        if let Some(i) = last_positive {
            return i;
        }
    }
    let candidates: Vec<usize> = (0..weights.len()).filter(|&i| allowed(i)).collect();
    candidates[rng.random_range(0..candidates.len())]
}

/// One-shot form of [`Sampler::sample`].
pub fn sample_context(
    kg: &TemporalKG,
    size: usize,
    cfg: &SamplerConfig,
    draw_index: u64,
) -> Result<FactSample, SamplerError> {
    Sampler::new(kg, cfg)?.sample(size, draw_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tkg::{Granularity, KgBuilder, Timestamp};
    use std::collections::HashSet;

    fn toy() -> TemporalKG {
        let mut b = KgBuilder::new(Granularity::Year);
        for i in 0..12 {
            b.add_range(
                &format!("e{}", i % 5),
                "r",
                &format!("o{i}"),
                1900 + 7 * i,
                1903 + 7 * i,
            )
            .unwrap();
        }
        b.add("x", "r", "y", Timestamp::NegInf, Timestamp::PosInf)
            .unwrap();
        b.build()
    }

    #[test]
    fn deterministic_per_draw() {
        let kg = toy();
        let cfg = SamplerConfig {
            seed: 99,
            ..Default::default()
        };
        for size in 1..=3 {
            assert_eq!(
                sample_context(&kg, size, &cfg, 17).unwrap(),
                sample_context(&kg, size, &cfg, 17).unwrap()
            );
        }
    }

    #[test]
    fn distinct_and_eligible() {
        let kg = toy();
        let cfg = SamplerConfig {
            seed: 5,
            ..Default::default()
        };
        let s = Sampler::new(&kg, &cfg).unwrap();
        for draw in 0..10_000 {
            let sample = s.sample(3, draw).unwrap();
            let set: HashSet<_> = sample.facts.iter().collect();
            assert_eq!(set.len(), 3);
            assert!(sample.facts.iter().all(|&f| kg.fact(f).unwrap().has_time));
        }
    }

    #[test]
    fn timeless_facts_only_when_allowed() {
        let kg = toy();
        let cfg = SamplerConfig {
            allow_timeless: true,
            ..Default::default()
        };
        let s = Sampler::new(&kg, &cfg).unwrap();
        assert_eq!(s.eligible().len(), 13);
        let seen = (0..5_000).any(|d| s.sample(1, d).unwrap().facts[0] == FactId(12));
        assert!(seen);
    }

    #[test]
    fn errors() {
        let kg = toy();
        let cfg = SamplerConfig::default();
        assert_eq!(sample_context(&kg, 4, &cfg, 0), Err(SamplerError::Size(4)));
        let mut b = KgBuilder::new(Granularity::Year);
        b.add_range("a", "r", "b", 1, 2).unwrap();
        let small = b.build();
        assert_eq!(
            sample_context(&small, 2, &cfg, 0),
            Err(SamplerError::TooFewEligible {
                needed: 2,
                available: 1
            })
        );
        let bad = SamplerConfig {
            temporal_tau: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            sample_context(&kg, 1, &bad, 0),
            Err(SamplerError::Config(_))
        ));
        let bad = SamplerConfig {
            frequency_exponent: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            sample_context(&kg, 1, &bad, 0),
            Err(SamplerError::Config(_))
        ));
    }

    #[test]
    fn zero_mass_falls_back_to_uniform() {
        let mut rng = rng::stream(1, 0, 0);
        let w = [0.0, 0.0, 0.0];
        let picked: HashSet<usize> = (0..200).map(|_| pick(&w, &mut rng, |i| i != 1)).collect();
        assert_eq!(picked, HashSet::from([0, 2]));
    }
}
