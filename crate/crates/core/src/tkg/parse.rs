use std::path::Path;

use super::{Endpoint, Granularity, KgBuilder, TemporalKG, Timestamp, TkgError};

/// Optional first line of a fact file.
pub const FACT_HEADER: &str = "subject|predicate|object|start|end";

/// Reads a delimiter-separated fact file. See [`parse_facts_str`].
pub fn parse_facts(
    path: impl AsRef<Path>,
    granularity: Granularity,
) -> Result<TemporalKG, TkgError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TkgError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_facts_str(&text, granularity)
}

/// Parses `subject, predicate, object, start, end` rows. The delimiter (`|`
/// or tab) is detected from the first non-blank line, which is skipped when it
/// is the column header. Row order fixes fact ids.
pub fn parse_facts_str(text: &str, granularity: Granularity) -> Result<TemporalKG, TkgError> {
    let mut builder = KgBuilder::new(granularity);
    let mut delimiter: Option<char> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| {
            if line.contains('|') || !line.contains('\t') {
                '|'
            } else {
                '\t'
            }
        });
        let fields: Vec<&str> = line.split(delim).collect();
        if fields.len() != 5 {
            return Err(TkgError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        if builder_is_empty(&builder) && is_header(&fields) {
            continue;
        }

        let start =
            Timestamp::parse(fields[3], Endpoint::Start, granularity).map_err(|source| {
                TkgError::Date {
                    line: line_no,
                    source,
                }
            })?;
        let end = Timestamp::parse(fields[4], Endpoint::End, granularity).map_err(|source| {
            TkgError::Date {
                line: line_no,
                source,
            }
        })?;
        builder
            .add(
                fields[0].trim(),
                fields[1].trim(),
                fields[2].trim(),
                start,
                end,
            )
            .map_err(|e| match e {
                TkgError::Interval { fact, source, .. } => TkgError::Interval {
                    fact,
                    line: Some(line_no),
                    source,
                },
                other => other,
            })?;
    }
    Ok(builder.build())
}

fn builder_is_empty(builder: &KgBuilder) -> bool {
    builder.kg.facts.is_empty()
}

fn is_header(fields: &[&str]) -> bool {
    const NAMES: [&str; 5] = ["subject", "predicate", "object", "start", "end"];
    fields
        .iter()
        .zip(NAMES)
        .all(|(f, n)| f.trim().eq_ignore_ascii_case(n))
}
