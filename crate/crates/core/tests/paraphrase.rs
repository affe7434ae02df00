mod common;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use tkgqa::generator::{AnswerFormat, AnswerType, Focus, Level, QAPair, Split};
use tkgqa::net::{HttpRequest, HttpResponse, Transport, TransportError};
use tkgqa::paraphrase::{
    cache_key, guard, paraphrase, paraphrase_all, ParaphraseCache, ParaphraseProvider,
};
use tkgqa::tkg::FactId;

/// Serves recorded replies keyed by the user message of the request.
struct Recorded {
    replies: BTreeMap<String, (u16, String)>,
    calls: AtomicUsize,
}

impl Recorded {
    fn load() -> Self {
        let text = std::fs::read_to_string(common::fixture("recorded_paraphrases.jsonl")).unwrap();
        let replies = text
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                (
                    v["question"].as_str().unwrap().to_string(),
                    (
                        v["status"].as_u64().unwrap() as u16,
                        v["body"].as_str().unwrap().to_string(),
                    ),
                )
            })
            .collect();
        Recorded {
            replies,
            calls: AtomicUsize::new(0),
        }
    }

    fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for Recorded {
    fn post_json(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let body: serde_json::Value = serde_json::from_str(&request.body).unwrap();
        let question = body["messages"][1]["content"].as_str().unwrap();
        match self.replies.get(question) {
            Some((status, body)) => Ok(HttpResponse {
                status: *status,
                body: body.clone(),
            }),
            None => Ok(HttpResponse {
                status: 404,
                body: String::new(),
            }),
        }
    }
}

struct Unreachable;

impl Transport for Unreachable {
    fn post_json(&self, _: &HttpRequest) -> Result<HttpResponse, TransportError> {
        panic!("no request expected");
    }
}

fn pair(id: u64, question: &str, forms: &[&str]) -> QAPair {
    QAPair {
        id,
        question: question.into(),
        answer: "x".into(),
        level: Level::Simple,
        focus: Focus::Factual,
        answer_type: AnswerType::Subject,
        answer_format: AnswerFormat::Open,
        capabilities: vec![],
        context_fact_ids: vec![FactId(id)],
        signal_words: vec![],
        split: Split::Train,
        paraphrased: false,
        derivation: None,
        surface_forms: forms.iter().map(|s| s.to_string()).collect(),
    }
}

fn recorded_pairs() -> Vec<QAPair> {
    vec![
        pair(
            0,
            "Who educated at Yale University from 1964 to 1968?",
            &["Yale University", "1964", "1968"],
        ),
        pair(
            1,
            "Which entity did Barack Obama president of between 2009 and 2017?",
            &["Barack Obama", "2009", "2017"],
        ),
        pair(
            2,
            "How many years did Joko Widodo president of Indonesia last?",
            &["Joko Widodo", "Indonesia"],
        ),
        pair(
            3,
            "Who president of United States after George W. Bush president of United States?",
            &["United States", "George W. Bush"],
        ),
        pair(4, "A question nobody recorded?", &[]),
    ]
}

fn provider() -> ParaphraseProvider {
    ParaphraseProvider {
        max_retries: 0,
        ..ParaphraseProvider::http(
            "http://recorded.invalid/v1/chat/completions",
            "recorded-model",
        )
    }
}

#[test]
fn identity_leaves_questions_alone_and_stays_offline() {
    let mut pairs = common::toy_dataset(6);
    let before = pairs.clone();
    let mut cache = ParaphraseCache::in_memory();
    let report = paraphrase_all(
        &mut pairs,
        &ParaphraseProvider::identity(),
        &mut cache,
        &Unreachable,
    )
    .unwrap();
    assert_eq!(pairs, before);
    assert_eq!(report.fetched, 0);
    assert!(cache.is_empty());
}

#[test]
fn recorded_replies_are_applied_deterministically() {
    let run = || {
        let t = Recorded::load();
        let mut pairs = recorded_pairs();
        let mut cache = ParaphraseCache::in_memory();
        let report = paraphrase_all(&mut pairs, &provider(), &mut cache, &t).unwrap();
        (pairs, report, t.calls())
    };
    let (a, report, calls) = run();
    let (b, _, _) = run();
    assert_eq!(a, b);
    assert_eq!(calls, 5);
    assert_eq!(report.accepted, 3);
    assert_eq!(report.rejected_by_guard, 1);
    assert_eq!(report.failed, 1);
    assert_eq!(
        a[0].question,
        "Who studied at Yale University from 1964 to 1968?"
    );
    assert!(a[0].paraphrased);
    // the rewrite of pair 3 lost an entity name
    assert_eq!(a[3].question, recorded_pairs()[3].question);
    assert!(!a[3].paraphrased);
    assert!(!a[4].paraphrased);
    for (p, q) in a.iter().zip(recorded_pairs()) {
        assert_eq!(p.answer, q.answer);
        assert_eq!(p.context_fact_ids, q.context_fact_ids);
    }
}

#[test]
fn cache_hits_make_no_requests() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    {
        let t = Recorded::load();
        let mut cache = ParaphraseCache::open(&path).unwrap();
        paraphrase_all(
            &mut recorded_pairs()[..3].to_vec(),
            &provider(),
            &mut cache,
            &t,
        )
        .unwrap();
        assert_eq!(t.calls(), 3);
    }
    let mut cache = ParaphraseCache::open(&path).unwrap();
    assert_eq!(cache.len(), 3);
    let mut pairs = recorded_pairs()[..3].to_vec();
    let report = paraphrase_all(&mut pairs, &provider(), &mut cache, &Unreachable).unwrap();
    assert_eq!(report.cache_hits, 3);
    assert!(pairs.iter().all(|p| p.paraphrased));
}

#[test]
fn cache_is_keyed_by_model_and_prompt_version() {
    let q = "Who educated at Yale University from 1964 to 1968?";
    assert_ne!(cache_key(q, "m1", "v1"), cache_key(q, "m2", "v1"));
    assert_ne!(cache_key(q, "m1", "v1"), cache_key(q, "m1", "v2"));
    assert_eq!(cache_key(q, "m1", "v1"), cache_key(q, "m1", "v1"));
}

#[test]
fn guard_requires_every_surface_form() {
    let p = pair(
        0,
        "Who educated at Yale University from 1964 to 1968?",
        &["Yale University", "1964", "1968"],
    );
    assert!(guard(
        &p,
        "Who attended Yale University between 1964 and 1968?"
    ));
    assert!(!guard(&p, "Who attended Yale between 1964 and 1968?"));
    assert!(!guard(
        &p,
        "Who attended Yale University\nbetween 1964 and 1968?"
    ));
    assert!(!guard(&p, "   "));
}

#[test]
fn single_pair_form_matches_batch_form() {
    let t = Recorded::load();
    let mut cache = ParaphraseCache::in_memory();
    let one = paraphrase(&recorded_pairs()[1], &provider(), &mut cache, &t).unwrap();
    assert_eq!(
        one.question,
        "Between 2009 and 2017, Barack Obama was president of which entity?"
    );
}
