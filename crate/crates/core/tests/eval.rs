use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tkgqa::eval::{
    cosine, cosine_embedding_loss, cosine_rank, evaluate, hits_at_k, rank_q, reciprocal_rank,
    LossParams, RankingRun, VectorTable, DEFAULT_KS,
};
use tkgqa::generator::{AnswerFormat, AnswerType, Focus, Level, QAPair, Split};
use tkgqa::tkg::FactId;

/// Position-by-position reference implementation.
fn oracle(run: &[u64], relevant: &[u64], k: usize) -> (u8, f64) {
    let c = relevant.len();
    let mut r = vec![0u8; run.len()];
    for (i, f) in run.iter().enumerate() {
        if relevant.contains(f) && !run[..i].contains(f) {
            r[i] = 1;
        }
    }
    let mut in_window = 0;
    for (i, &ri) in r.iter().enumerate() {
        if i < c * k {
            in_window += ri as usize;
        }
    }
    let hits = u8::from(in_window == c);
    let mut rank = 0u64;
    for (i, &ri) in r.iter().enumerate() {
        rank += (i / c) as u64 * ri as u64;
    }
    let found: usize = r.iter().map(|&x| x as usize).sum();
    let charge = if run.len() >= c { run.len() / c } else { 1 };
    rank += ((c - found) * charge) as u64;
    (hits, 1.0 / (rank as f64 + 1.0))
}

fn ids(xs: &[u64]) -> Vec<FactId> {
    xs.iter().map(|&x| FactId(x)).collect()
}

#[test]
fn metrics_match_reference_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let c = rng.random_range(1..=3usize);
        let k = [1usize, 3, 10][rng.random_range(0..3)];
        let len = rng.random_range(0..=50usize);
        let mut pool: Vec<u64> = (0..80).collect();
        pool.shuffle(&mut rng);
        let relevant: Vec<u64> = pool[..c].to_vec();
        let mut run: Vec<u64> = pool[..len.min(pool.len())].to_vec();
        run.shuffle(&mut rng);
        let (h, rr) = oracle(&run, &relevant, k);
        let got_h = hits_at_k(&ids(&run), &ids(&relevant), k).unwrap();
        let got_rr = reciprocal_rank(&ids(&run), &ids(&relevant)).unwrap();
        if got_h != h || got_rr != rr {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn spot_values() {
    let run = ids(&[100, 1, 2, 101, 3]);
    let rel = ids(&[100, 101]);
    assert_eq!(hits_at_k(&run, &rel, 1).unwrap(), 0);
    assert_eq!(hits_at_k(&run, &rel, 2).unwrap(), 1);
    let run = ids(&[1, 100, 101, 2]);
    assert_eq!(reciprocal_rank(&run, &rel).unwrap(), 0.5);
}

#[test]
fn cosine_loss_spot_values() {
    let v = [0.3, -1.2, 4.0];
    let same = cosine_embedding_loss(
        &v,
        &v,
        LossParams {
            margin: 0.0,
            label: 1,
        },
    )
    .unwrap();
    assert!(same.abs() < 1e-12);
    // cos = 0.9 exactly for these two unit vectors
    let a = [1.0, 0.0];
    let b = [0.9, (1.0f64 - 0.81).sqrt()];
    let l = cosine_embedding_loss(
        &a,
        &b,
        LossParams {
            margin: 0.5,
            label: -1,
        },
    )
    .unwrap();
    assert!((l - 0.4).abs() < 1e-12, "{l}");
}

fn arb_case() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    (1usize..=3, 0usize..=30).prop_flat_map(|(c, len)| {
        Just((0u64..60).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(move |pool| (pool[..len].to_vec(), pool[len..len + c].to_vec()))
    })
}

proptest! {
    #[test]
    fn hits_is_monotone_in_k((run, rel) in arb_case(), extra in prop::collection::vec(0usize..40, 0..3)) {
        let mut relevant = rel.clone();
        for e in extra {
            if e < run.len() && !relevant.contains(&run[e]) && relevant.len() < 3 {
                relevant.push(run[e]);
            }
        }
        let mut prev = 0;
        for k in 1..=12 {
            let h = hits_at_k(&ids(&run), &ids(&relevant), k).unwrap();
            prop_assert!(h >= prev);
            prev = h;
        }
    }

    #[test]
    fn relevant_prefix_is_perfect((run, rel) in arb_case()) {
        let mut front = rel.clone();
        front.extend(run.iter().copied());
        prop_assert_eq!(reciprocal_rank(&ids(&front), &ids(&rel)).unwrap(), 1.0);
        prop_assert_eq!(hits_at_k(&ids(&front), &ids(&rel), 1).unwrap(), 1);
    }

    #[test]
    fn reordering_relevant_set_changes_nothing((run, rel) in arb_case()) {
        let mut rev = rel.clone();
        rev.reverse();
        prop_assert_eq!(rank_q(&ids(&run), &ids(&rel)).unwrap(), rank_q(&ids(&run), &ids(&rev)).unwrap());
    }

    #[test]
    fn single_fact_reduces_to_classic_rank(len in 1usize..40, pos in 0usize..40) {
        let pos = pos % len;
        let run: Vec<u64> = (0..len as u64).collect();
        let rr = reciprocal_rank(&ids(&run), &ids(&[pos as u64])).unwrap();
        prop_assert_eq!(rr, 1.0 / (pos as f64 + 1.0));
    }

    #[test]
    fn cosine_ignores_vector_scale(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 2..8),
        q in prop::collection::vec(-5.0f64..5.0, 3),
        scale in 0.1f64..10.0,
    ) {
        prop_assume!(q.iter().any(|x| x.abs() > 1e-3));
        prop_assume!(rows.iter().all(|r| r.iter().any(|x| x.abs() > 1e-3)));
        let qs: Vec<f64> = q.iter().map(|x| x * scale).collect();
        let mut scores: Vec<(f64, u64)> = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            let rs: Vec<f64> = r.iter().map(|x| x * scale).collect();
            let c = cosine(&q, r).unwrap();
            prop_assert!((c - cosine(&qs, &rs).unwrap()).abs() < 1e-12);
            scores.push((c, i as u64));
        }
        let table = VectorTable::new(3, rows.iter().enumerate().map(|(i, r)| (i as u64, r.clone())).collect()).unwrap();
        let ranked = cosine_rank(&q, &table, None).unwrap();
        for w in ranked.windows(2) {
            let a = scores[w[0].0 as usize].0;
            let b = scores[w[1].0 as usize].0;
            prop_assert!(a >= b);
        }
    }
}

fn pair(id: u64, level: Level, facts: &[u64]) -> QAPair {
    QAPair {
        id,
        question: format!("q{id}"),
        answer: "a".into(),
        level,
        focus: Focus::Factual,
        answer_type: AnswerType::Subject,
        answer_format: AnswerFormat::Open,
        capabilities: vec![],
        context_fact_ids: ids(facts),
        signal_words: vec![],
        split: Split::Test,
        paraphrased: false,
        derivation: None,
        surface_forms: vec![],
    }
}

#[test]
fn report_does_not_depend_on_run_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs: Vec<QAPair> = (0..200u64)
        .map(|i| {
            let level = Level::ALL[(i % 3) as usize];
            let facts: Vec<u64> = (0..level.arity() as u64).map(|j| i * 3 + j).collect();
            pair(i, level, &facts)
        })
        .collect();
    let mut runs: Vec<RankingRun> = pairs
        .iter()
        .map(|p| {
            let mut r: Vec<u64> = (0..600).collect();
            r.shuffle(&mut rng);
            r.truncate(rng.random_range(0..40));
            RankingRun {
                query_id: p.id,
                ranked_fact_ids: ids(&r),
            }
        })
        .collect();
    let a = evaluate(&runs, &pairs, &DEFAULT_KS).unwrap();
    runs.shuffle(&mut rng);
    let b = evaluate(&runs, &pairs, &DEFAULT_KS).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a.overall.queries, 200);
}
