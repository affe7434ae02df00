use std::collections::BTreeSet;

use crate::tkg::FactId;

use super::EvalError;

fn relevant_set(relevant: &[FactId]) -> Result<BTreeSet<FactId>, EvalError> {
    let set: BTreeSet<FactId> = relevant.iter().copied().collect();
    if set.is_empty() {
        return Err(EvalError::EmptyRelevant);
    }
    Ok(set)
}

/// 0-based positions of the first occurrence of each relevant fact.
fn positions(run: &[FactId], relevant: &BTreeSet<FactId>) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    run.iter()
        .enumerate()
        .filter(|(_, f)| relevant.contains(f) && seen.insert(**f))
        .map(|(i, _)| i)
        .collect()
}

/// 1 when all `|C|` relevant facts sit in the first `|C| * k` positions.
pub fn hits_at_k(run: &[FactId], relevant: &[FactId], k: usize) -> Result<u8, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let rel = relevant_set(relevant)?;
    let window = rel.len().saturating_mul(k);
    let inside = positions(run, &rel).iter().filter(|&&i| i < window).count();
    Ok(u8::from(inside == rel.len()))
}

/// `rank_q = sum floor(i / |C|)` over the positions `i` of relevant facts.
/// A relevant fact missing from the run is charged `floor(max(L, |C|) / |C|)`
/// for a run of length `L`, which is `floor(L / |C|)` for any run at least
/// `|C|` long.
pub fn rank_q(run: &[FactId], relevant: &[FactId]) -> Result<u64, EvalError> {
    let rel = relevant_set(relevant)?;
    let c = rel.len();
    let found = positions(run, &rel);
    let present: u64 = found.iter().map(|&i| (i / c) as u64).sum();
    let missing = (c - found.len()) as u64;
    Ok(present + missing * (run.len().max(c) / c) as u64)
}

/// `1 / (rank_q + 1)`.
pub fn reciprocal_rank(run: &[FactId], relevant: &[FactId]) -> Result<f64, EvalError> {
    Ok(1.0 / (rank_q(run, relevant)? as f64 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(xs: &[u64]) -> Vec<FactId> {
        xs.iter().map(|&x| FactId(x)).collect()
    }

    #[test]
    fn spot_values() {
        // relevant facts 100, 101
        let run = ids(&[100, 7, 8, 101, 9]);
        let rel = ids(&[100, 101]);
        assert_eq!(hits_at_k(&run, &rel, 1).unwrap(), 0);
        assert_eq!(hits_at_k(&run, &rel, 2).unwrap(), 1);
        let run = ids(&[7, 100, 101]);
        assert_eq!(reciprocal_rank(&run, &rel).unwrap(), 0.5);
        let run = ids(&[1, 2, 3]);
        assert_eq!(hits_at_k(&run, &ids(&[1, 2, 3]), 1).unwrap(), 1);
        assert_eq!(reciprocal_rank(&run, &ids(&[1, 2, 3])).unwrap(), 1.0);
        assert_eq!(reciprocal_rank(&run, &ids(&[1])).unwrap(), 1.0);
    }

    #[test]
    fn missing_facts_are_charged() {
        let run = ids(&[1, 2, 3, 4]);
        assert_eq!(rank_q(&run, &ids(&[9])).unwrap(), 4);
        assert_eq!(rank_q(&run, &ids(&[1, 9])).unwrap(), 2);
        assert_eq!(rank_q(&[], &ids(&[9])).unwrap(), 1);
        assert_eq!(hits_at_k(&[], &ids(&[9]), 10).unwrap(), 0);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(hits_at_k(&ids(&[1]), &[], 1), Err(EvalError::EmptyRelevant));
        assert_eq!(hits_at_k(&ids(&[1]), &ids(&[1]), 0), Err(EvalError::ZeroK));
        assert_eq!(
            reciprocal_rank(&ids(&[1]), &[]),
            Err(EvalError::EmptyRelevant)
        );
    }

    #[test]
    fn duplicate_run_entries_count_once() {
        let run = ids(&[1, 1, 5]);
        assert_eq!(hits_at_k(&run, &ids(&[1, 2]), 1).unwrap(), 0);
    }
}
