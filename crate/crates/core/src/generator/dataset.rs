use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Capability, GeneratorError, Level, QAPair, Split};

/// Files written by [`write_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFiles {
    pub splits: Vec<PathBuf>,
    pub stats: PathBuf,
}

/// Counts over a dataset, keyed by the record's string values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: u64,
    pub splits: BTreeMap<String, u64>,
    /// level -> split -> count
    pub levels: BTreeMap<String, BTreeMap<String, u64>>,
    pub categories: BTreeMap<String, u64>,
    pub answer_types: BTreeMap<String, u64>,
    pub answer_formats: BTreeMap<String, u64>,
    pub capabilities: BTreeMap<String, u64>,
    pub paraphrased: u64,
}

impl DatasetStats {
    pub fn from_pairs(pairs: &[QAPair]) -> DatasetStats {
        let mut s = DatasetStats::default();
        for split in Split::ALL {
            s.splits.insert(split.name().into(), 0);
        }
        for level in Level::ALL {
            let row = s.levels.entry(level.name().into()).or_default();
            for split in Split::ALL {
                row.insert(split.name().into(), 0);
            }
        }
        for c in Capability::ALL {
            s.capabilities.insert(c.code().into(), 0);
        }
        for p in pairs {
            s.total += 1;
            *s.splits.entry(p.split.name().into()).or_default() += 1;
            *s.levels
                .entry(p.level.name().into())
                .or_default()
                .entry(p.split.name().into())
                .or_default() += 1;
            *s.categories.entry(p.category().to_string()).or_default() += 1;
            *s.answer_types
                .entry(p.answer_type.name().into())
                .or_default() += 1;
            *s.answer_formats
                .entry(p.answer_format.name().into())
                .or_default() += 1;
            for c in &p.capabilities {
                *s.capabilities.entry(c.code().into()).or_default() += 1;
            }
            s.paraphrased += u64::from(p.paraphrased);
        }
        s
    }

    /// Plain-text tables: levels by split, then the single-key counts.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10}{:>10}{:>10}{:>10}{:>10}",
            "level", "train", "val", "test", "total"
        );
        for level in Level::ALL {
            let row = self.levels.get(level.name()).cloned().unwrap_or_default();
            let get = |k: &str| row.get(k).copied().unwrap_or(0);
            let total: u64 = row.values().sum();
            let _ = writeln!(
                out,
                "{:<10}{:>10}{:>10}{:>10}{:>10}",
                level.name(),
                get("train"),
                get("val"),
                get("test"),
                total
            );
        }
        let get = |k: &str| self.splits.get(k).copied().unwrap_or(0);
        let _ = writeln!(
            out,
            "{:<10}{:>10}{:>10}{:>10}{:>10}",
            "all",
            get("train"),
            get("val"),
            get("test"),
            self.total
        );
        for (title, map) in [
            ("category", &self.categories),
            ("answer type", &self.answer_types),
            ("format", &self.answer_formats),
            ("capability", &self.capabilities),
        ] {
            let _ = writeln!(out);
            let width = map
                .keys()
                .map(String::len)
                .max()
                .unwrap_or(0)
                .max(title.len())
                + 2;
            let _ = writeln!(out, "{:<width$}{:>10}", title, "count");
            for (k, v) in map {
                let _ = writeln!(out, "{:<width$}{:>10}", k, v);
            }
        }
        let _ = writeln!(out, "\nparaphrased: {}", self.paraphrased);
        out
    }
}

fn io_err(context: String) -> impl FnOnce(std::io::Error) -> GeneratorError {
    move |source| GeneratorError::Io { context, source }
}

fn split_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("{}.jsonl", split.name()))
}

/// Writes `train.jsonl`, `val.jsonl`, `test.jsonl` (one record per line, by
/// id) and `stats.json` into `dir`. Files are staged and renamed into place
/// only once all of them are written.
pub fn write_dataset(pairs: &[QAPair], dir: &Path) -> Result<DatasetFiles, GeneratorError> {
    fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    let mut sorted: Vec<&QAPair> = pairs.iter().collect();
    sorted.sort_by_key(|p| p.id);

    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = (|| {
        for split in Split::ALL {
            let path = split_path(dir, split);
            let tmp = path.with_extension("jsonl.partial");
            let mut buf = Vec::new();
            for p in sorted.iter().filter(|p| p.split == split) {
                let line = serde_json::to_string(p).map_err(|source| GeneratorError::Json {
                    context: format!("encoding pair {}", p.id),
                    source,
                })?;
                buf.extend_from_slice(line.as_bytes());
                buf.push(b'\n');
            }
            staged.push((tmp.clone(), path));
            let mut f =
                fs::File::create(&tmp).map_err(io_err(format!("creating {}", tmp.display())))?;
            f.write_all(&buf)
                .map_err(io_err(format!("writing {}", tmp.display())))?;
        }
        let stats = DatasetStats::from_pairs(pairs);
        let path = dir.join("stats.json");
        let tmp = path.with_extension("json.partial");
        let text = serde_json::to_string_pretty(&stats).map_err(|source| GeneratorError::Json {
            context: "encoding stats".into(),
            source,
        })?;
        staged.push((tmp.clone(), path));
        fs::write(&tmp, text + "\n").map_err(io_err(format!("writing {}", tmp.display())))?;
        for (tmp, path) in &staged {
            fs::rename(tmp, path).map_err(io_err(format!("renaming {}", tmp.display())))?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    Ok(DatasetFiles {
        splits: Split::ALL.iter().map(|&s| split_path(dir, s)).collect(),
        stats: dir.join("stats.json"),
    })
}

/// Reads one JSONL file of records.
pub fn read_jsonl(path: &Path) -> Result<Vec<QAPair>, GeneratorError> {
    let text = fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| GeneratorError::Json {
                context: format!("{} line {}", path.display(), i + 1),
                source,
            })
        })
        .collect()
}

/// Reads the three split files of a dataset directory, ordered by id.
pub fn read_dataset(dir: &Path) -> Result<Vec<QAPair>, GeneratorError> {
    let mut out = Vec::new();
    for split in Split::ALL {
        out.extend(read_jsonl(&split_path(dir, split))?);
    }
    out.sort_by_key(|p| p.id);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{AnswerFormat, AnswerType, Focus};
    use crate::tkg::FactId;

    fn pair(id: u64, split: Split) -> QAPair {
        QAPair {
            id,
            question: format!("q{id}"),
            answer: "a".into(),
            level: Level::Simple,
            focus: Focus::Factual,
            answer_type: AnswerType::Subject,
            answer_format: AnswerFormat::Open,
            capabilities: vec![Capability::Tcr],
            context_fact_ids: vec![FactId(id)],
            signal_words: vec![],
            split,
            paraphrased: id.is_multiple_of(2),
            derivation: None,
            surface_forms: vec![],
        }
    }

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pairs = vec![
            pair(2, Split::Test),
            pair(0, Split::Train),
            pair(1, Split::Val),
        ];
        let files = write_dataset(&pairs, dir.path()).unwrap();
        assert_eq!(files.splits.len(), 3);
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back.iter().map(|p| p.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        let stats: DatasetStats =
            serde_json::from_str(&fs::read_to_string(files.stats).unwrap()).unwrap();
        assert_eq!(stats, DatasetStats::from_pairs(&back));
        assert_eq!(stats.total, 3);
        assert_eq!(stats.paraphrased, 2);
        assert_eq!(stats.levels["simple"]["val"], 1);
        assert!(!fs::read_dir(dir.path()).unwrap().any(|e| e
            .unwrap()
            .file_name()
            .to_string_lossy()
            .ends_with(".partial")));
    }

    #[test]
    fn table_lists_levels() {
        let t = DatasetStats::from_pairs(&[pair(0, Split::Train)]).render_table();
        assert!(t.contains("simple"));
        assert!(t.contains("TCR"));
    }
}
