#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use tkgqa::generator::{
    assign_splits, generate_pairs, AnswerType, Counts, GeneratorConfig, QAPair, QuestionCategory,
    Split, SplitRatios, TemplateBank,
};
use tkgqa::tkg::{parse_facts, Granularity, TemporalKG};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn toy_kg() -> TemporalKG {
    parse_facts(fixture("toy_facts.txt"), Granularity::Year).expect("toy facts parse")
}

pub fn toy_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        seed,
        counts: Counts {
            simple: 40,
            medium: 60,
            complex: 60,
        },
        ..GeneratorConfig::default()
    }
}

pub fn toy_dataset(seed: u64) -> Vec<QAPair> {
    let kg = toy_kg();
    let cfg = toy_config(seed);
    let mut pairs = generate_pairs(&kg, &cfg, &TemplateBank::builtin()).expect("generation");
    assign_splits(&mut pairs, cfg.split_ratios, cfg.seed).expect("splits");
    pairs
}

pub type Stratum = (QuestionCategory, AnswerType);

/// For every stratum: pairs per split, and the largest number of pairs one
/// context group contributes to it.
pub fn stratum_counts(pairs: &[QAPair]) -> BTreeMap<Stratum, ([usize; 3], usize)> {
    let mut out: BTreeMap<Stratum, ([usize; 3], usize)> = BTreeMap::new();
    let mut per_group: BTreeMap<(Stratum, Vec<tkgqa::tkg::FactId>), usize> = BTreeMap::new();
    for p in pairs {
        let s = (p.category(), p.answer_type);
        let k = Split::ALL.iter().position(|x| *x == p.split).unwrap();
        out.entry(s).or_default().0[k] += 1;
        *per_group.entry((s, p.context_key())).or_default() += 1;
    }
    for ((s, _), m) in per_group {
        let e = out.get_mut(&s).unwrap();
        e.1 = e.1.max(m);
    }
    out
}

/// Largest `|count - ratio * size|` over strata and splits, and the largest
/// multiplicity seen.
pub fn worst_stratum_error(pairs: &[QAPair], ratios: SplitRatios) -> (f64, usize) {
    let r = ratios.as_array();
    let mut worst = 0.0f64;
    let mut mult = 0;
    for (counts, m) in stratum_counts(pairs).values() {
        let n: usize = counts.iter().sum();
        for k in 0..3 {
            worst = worst.max((counts[k] as f64 - r[k] * n as f64).abs());
        }
        mult = mult.max(*m);
    }
    (worst, mult)
}
