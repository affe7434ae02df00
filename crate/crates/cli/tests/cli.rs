use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tkgqa::eval::{hits_at_k, reciprocal_rank, EvalReport, RankingRun};
use tkgqa::generator::{capabilities_for, read_dataset, DatasetStats, Level};
use tkgqa::tkg::FactId;

const TEN_FACTS: &str = "subject|predicate|object|start|end
George W. Bush|educated at|Yale University|1964|1968
Joko Widodo|educated at|Gadjah Mada University|1980|1985
George W. Bush|president of|United States|2001|2009
Barack Obama|president of|United States|2009|2017
Barack Obama|educated at|Harvard Law School|1988|1991
Barack Obama|received|Nobel Peace Prize|2009|2009
Joko Widodo|president of|Indonesia|2014|2024
Angela Merkel|chancellor of|Germany|2005|2021
Tony Blair|prime minister of|United Kingdom|1997|2007
Bill Clinton|president of|United States|1993|2001
";

fn tkgqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tkgqa"))
        .args(args)
        .env("TKGQA_OFFLINE", "1")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn toy_facts() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy_facts.txt")
}

fn generate(dir: &Path, facts: &Path, counts: [u64; 3], seed: u64) -> PathBuf {
    let out = dir.join("ds");
    let o = tkgqa(&[
        "generate",
        "--facts",
        s(facts),
        "--out",
        s(&out),
        "--seed",
        &seed.to_string(),
        "--simple",
        &counts[0].to_string(),
        "--medium",
        &counts[1].to_string(),
        "--complex",
        &counts[2].to_string(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn ten_fact_graph_gives_expected_counts() {
    let dir = tempfile::tempdir().unwrap();
    let facts = dir.path().join("facts.txt");
    std::fs::write(&facts, TEN_FACTS).unwrap();
    let out = generate(dir.path(), &facts, [5, 5, 5], 42);
    let pairs = read_dataset(&out).unwrap();
    let simple = pairs.iter().filter(|p| p.level == Level::Simple).count();
    assert_eq!(simple, 30);
    for level in [Level::Medium, Level::Complex] {
        let n = pairs.iter().filter(|p| p.level == level).count();
        assert!(n >= 5 * 4, "{level:?}: {n}");
    }
    for name in [
        "train.jsonl",
        "val.jsonl",
        "test.jsonl",
        "stats.json",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
}

#[test]
fn missing_facts_file_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no-such-facts.txt");
    let o = tkgqa(&[
        "generate",
        "--facts",
        s(&missing),
        "--out",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-facts.txt"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let facts = dir.path().join("facts.txt");
    std::fs::write(&facts, "a|r|b|2010|2001\n").unwrap();
    let o = tkgqa(&[
        "generate",
        "--facts",
        s(&facts),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"split_ratios": {"train": 0.9, "val": 0.2, "test": 0.2}}"#,
    )
    .unwrap();
    let o = tkgqa(&[
        "generate",
        "--facts",
        s(&toy_facts()),
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = tkgqa(&["generate", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_write_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not-a-dir");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("ds");
    let o = tkgqa(&[
        "generate",
        "--facts",
        s(&toy_facts()),
        "--out",
        s(&out),
        "--simple",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&blocker).unwrap(), "x");

    let ro = dir.path().join("ro");
    std::fs::create_dir(&ro).unwrap();
    std::fs::create_dir(ro.join("val.jsonl.partial")).unwrap();
    let o = tkgqa(&[
        "generate",
        "--facts",
        s(&toy_facts()),
        "--out",
        s(&ro),
        "--simple",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let left: Vec<String> = std::fs::read_dir(&ro)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(left, ["val.jsonl.partial"]);
}

#[test]
fn config_file_and_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let facts = toy_facts();
    std::fs::write(
        &cfg,
        r#"{"seed": 5, "counts": {"simple": 3, "medium": 0, "complex": 0}}"#,
    )
    .unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "generate",
            "--facts",
            s(&facts),
            "--config",
            s(&cfg),
            "--out",
            s(&out),
        ];
        args.extend_from_slice(extra);
        let o = tkgqa(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out.join("manifest.json")).unwrap()
    };
    let from_file = run("a", &[]);
    let overridden = run("b", &["--seed", "6"]);
    assert!(from_file.contains("\"seed\": 5"));
    assert!(overridden.contains("\"seed\": 6"));
    assert_eq!(read_dataset(&dir.path().join("a")).unwrap().len(), 18);
}

#[test]
fn stats_of_empty_dataset_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["train.jsonl", "val.jsonl", "test.jsonl"] {
        std::fs::write(dir.path().join(name), "").unwrap();
    }
    let o = tkgqa(&["stats", "--qa", s(dir.path()), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stats: DatasetStats = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(stats.total, 0);
    assert!(stats.splits.values().all(|&v| v == 0));
    assert!(stats.capabilities.values().all(|&v| v == 0));
    let table = stdout(&tkgqa(&["stats", "--qa", s(dir.path())]));
    assert!(table.contains("simple"));
}

#[test]
fn capability_counts_follow_categories() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(dir.path(), &toy_facts(), [10, 10, 10], 1);
    let pairs = read_dataset(&out).unwrap();
    let o = tkgqa(&["stats", "--qa", s(&out), "--json"]);
    let stats: DatasetStats = serde_json::from_str(&stdout(&o)).unwrap();
    for (code, count) in &stats.capabilities {
        let expected = pairs
            .iter()
            .filter(|p| {
                capabilities_for(p.category())
                    .iter()
                    .any(|c| c.code() == code)
            })
            .count() as u64;
        assert_eq!(*count, expected, "{code}");
    }
}

fn write_runs(path: &Path, runs: &[RankingRun]) {
    std::fs::write(path, tkgqa::eval::render_rankings(runs)).unwrap();
}

fn report(path: &Path) -> EvalReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gold_rankings_score_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(dir.path(), &toy_facts(), [5, 5, 5], 3);
    let pairs = read_dataset(&out).unwrap();
    let runs: Vec<RankingRun> = pairs
        .iter()
        .map(|p| RankingRun {
            query_id: p.id,
            ranked_fact_ids: p.context_fact_ids.clone(),
        })
        .collect();
    let rankings = dir.path().join("runs.jsonl");
    write_runs(&rankings, &runs);
    let rep = dir.path().join("report.json");
    let o = tkgqa(&[
        "evaluate",
        "--qa",
        s(&out),
        "--rankings",
        s(&rankings),
        "--k",
        "1,3,10",
        "--out",
        s(&rep),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&rep);
    assert_eq!(r.ks, [1, 3, 10]);
    assert_eq!(r.overall.mrr, 1.0);
    assert!(r.overall.hits.values().all(|&h| h == 1.0));
    assert_eq!(
        r.overall.hits.keys().copied().collect::<Vec<_>>(),
        [1, 3, 10]
    );
    assert!(stdout(&o).contains("Hits@10"));
}

#[test]
fn reversed_rankings_match_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(dir.path(), &toy_facts(), [5, 5, 5], 4);
    let pairs = read_dataset(&out).unwrap();
    let all: Vec<FactId> = (0..20).map(FactId).collect();
    let mut runs = Vec::new();
    let (mut rr_sum, mut hits_sum) = (0.0, 0.0);
    for p in &pairs {
        let mut run: Vec<FactId> = all
            .iter()
            .copied()
            .filter(|f| !p.context_fact_ids.contains(f))
            .collect();
        run.extend(p.context_fact_ids.iter().rev());
        rr_sum += reciprocal_rank(&run, &p.context_fact_ids).unwrap();
        hits_sum += f64::from(hits_at_k(&run, &p.context_fact_ids, 3).unwrap());
        runs.push(RankingRun {
            query_id: p.id,
            ranked_fact_ids: run,
        });
    }
    let rankings = dir.path().join("runs.jsonl");
    write_runs(&rankings, &runs);
    let rep = dir.path().join("report.json");
    let o = tkgqa(&[
        "evaluate",
        "--qa",
        s(&out),
        "--rankings",
        s(&rankings),
        "--k",
        "3",
        "--out",
        s(&rep),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&rep);
    let n = pairs.len() as f64;
    assert!((r.overall.mrr - rr_sum / n).abs() < 1e-12);
    assert!((r.overall.hits[&3] - hits_sum / n).abs() < 1e-12);
    assert!(r.overall.mrr < 1.0);
}

#[test]
fn unknown_query_ids_are_reported_with_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(dir.path(), &toy_facts(), [1, 0, 0], 0);
    let rankings = dir.path().join("runs.jsonl");
    write_runs(
        &rankings,
        &[
            RankingRun {
                query_id: 900,
                ranked_fact_ids: vec![],
            },
            RankingRun {
                query_id: 901,
                ranked_fact_ids: vec![],
            },
        ],
    );
    let o = tkgqa(&["evaluate", "--qa", s(&out), "--rankings", s(&rankings)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2 unknown query ids"), "{}", stderr(&o));
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(dir.path(), &toy_facts(), [2, 2, 2], 0);
    assert!(tkgqa(&["verify", "--out", s(&out)]).status.success());
    let train = out.join("train.jsonl");
    let mut text = std::fs::read_to_string(&train).unwrap();
    text.push('\n');
    std::fs::write(&train, text).unwrap();
    let o = tkgqa(&["verify", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("train.jsonl"));
}

#[test]
fn allen_table_and_verbalize() {
    let o = tkgqa(&["allen-table"]);
    assert!(o.status.success());
    let shipped = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/allen_dictionary.tsv"),
    )
    .unwrap();
    assert_eq!(stdout(&o), shipped);

    let o = tkgqa(&["verbalize", "--facts", s(&toy_facts())]);
    let text = stdout(&o);
    assert!(text.starts_with("0\tGeorge W. Bush educated at Yale University from 1964 to 1968\n"));
    let ids: BTreeSet<&str> = text
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(ids.len(), text.lines().count());
}
