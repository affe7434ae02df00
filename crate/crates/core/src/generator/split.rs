use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{AnswerType, GeneratorError, QAPair, QuestionCategory, Split, SplitRatios};
use crate::rng;
use crate::tkg::FactId;

type Stratum = (QuestionCategory, AnswerType);

/// Assigns every pair a split.
///
/// Pairs sharing a context-fact set form one group and always land in the
/// same split. Groups are visited in a seeded random order; each goes to the
/// split whose per-stratum counts it pushes least past the stratum targets
/// (`ratio * stratum size`), ties going to the split with the most unmet
/// demand and then to the earlier split.
pub fn assign_splits(
    pairs: &mut [QAPair],
    ratios: SplitRatios,
    seed: u64,
) -> Result<(), GeneratorError> {
    ratios.validate()?;
    let ratios = ratios.as_array();

    let mut groups: BTreeMap<Vec<FactId>, Vec<usize>> = BTreeMap::new();
    let mut stratum_size: BTreeMap<Stratum, f64> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        groups.entry(p.context_key()).or_default().push(i);
        *stratum_size
            .entry((p.category(), p.answer_type))
            .or_default() += 1.0;
    }
    let mut order: Vec<Vec<usize>> = groups.into_values().collect();
    let mut r = rng::stream(seed, rng::domain::SPLITS, 0);
    order.shuffle(&mut r);

    let strata: Vec<Stratum> = stratum_size.keys().copied().collect();
    let index: BTreeMap<Stratum, usize> = strata.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let target: Vec<[f64; 3]> = strata
        .iter()
        .map(|s| {
            let n = stratum_size[s];
            [ratios[0] * n, ratios[1] * n, ratios[2] * n]
        })
        .collect();
    let mut filled: Vec<[f64; 3]> = vec![[0.0; 3]; strata.len()];

    for members in order {
        let mut demand: BTreeMap<usize, f64> = BTreeMap::new();
        for &i in &members {
            let p = &pairs[i];
            *demand
                .entry(index[&(p.category(), p.answer_type)])
                .or_default() += 1.0;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for k in 0..3 {
            if ratios[k] <= 0.0 {
                continue;
            }
            let overshoot = demand
                .iter()
                .map(|(&s, &m)| filled[s][k] + m - target[s][k])
                .fold(f64::NEG_INFINITY, f64::max);
            let unmet: f64 = demand
                .iter()
                .map(|(&s, &m)| m * (target[s][k] - filled[s][k]))
                .sum();
            let better = match best {
                None => true,
                Some((_, o, u)) => {
                    overshoot < o - 1e-9 || ((overshoot - o).abs() <= 1e-9 && unmet > u + 1e-9)
                }
            };
            if better {
                best = Some((k, overshoot, unmet));
            }
        }
        let (k, _, _) = best.expect("some ratio is positive");
        for (&s, &m) in &demand {
            filled[s][k] += m;
        }
        for &i in &members {
            pairs[i].split = Split::ALL[k];
        }
    }
    Ok(())
}
