//! JSONL dataset ingestion.
//!
//! One record per line:
//! `{"id": .., "text": .., "triples": [{"predicate", "subject", "subject_type",
//! "object", "object_type", "subject_span": [s, e], "object_span": [s, e]}]}`.
//! Unlabeled splits omit `"triples"`. An optional first line
//! `{"schema": {"entity_types": [..], "relation_types": [..]}}` declares labels
//! up front.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GoldAnnotation, Sample, Schema, Span, Triple, TripleSet};

/// Gold annotations keyed by sample id.
pub type GoldStore = BTreeMap<String, GoldAnnotation>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "dev" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub split: Split,
    pub samples: Vec<Sample>,
    pub gold: GoldStore,
    /// `None` when the file declares no schema and carries no labels.
    pub schema: Option<Schema>,
}

impl Dataset {
    pub fn sample(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }
}

#[derive(Deserialize)]
struct RawTriple {
    predicate: String,
    subject: String,
    subject_type: String,
    object: String,
    object_type: String,
    subject_span: Span,
    object_span: Span,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    #[serde(default)]
    triples: Option<Vec<RawTriple>>,
}

#[derive(Deserialize)]
struct SchemaHeader {
    schema: RawSchema,
}

#[derive(Deserialize)]
struct RawSchema {
    entity_types: Vec<String>,
    relation_types: Vec<String>,
}

fn push_unique(list: &mut Vec<String>, label: &str) {
    if !list.iter().any(|l| l == label) {
        list.push(label.to_string());
    }
}

/// Loads one split from a JSONL file.
pub fn load_dataset(path: &Path, split: Split) -> Result<Dataset> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&content, path, split)
}

/// Parses JSONL content; `origin` is used only in error messages.
pub fn parse_dataset(content: &str, origin: &Path, split: Split) -> Result<Dataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };

    let mut samples = Vec::new();
    let mut gold = GoldStore::new();
    let mut seen = HashSet::new();
    let mut entity_types: Vec<String> = Vec::new();
    let mut relation_types: Vec<String> = Vec::new();

    for (idx, line) in content.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if samples.is_empty() && line.contains("\"schema\"") {
            if let Ok(header) = serde_json::from_str::<SchemaHeader>(line) {
                for l in &header.schema.entity_types {
                    push_unique(&mut entity_types, l);
                }
                for l in &header.schema.relation_types {
                    push_unique(&mut relation_types, l);
                }
                continue;
            }
        }
        let record: RawRecord = serde_json::from_str(line).map_err(|e| parse_err(lineno, e.to_string()))?;
        let sample = Sample::new(record.id, record.text).map_err(|e| parse_err(lineno, e.to_string()))?;
        if !seen.insert(sample.id.clone()) {
            return Err(Error::DuplicateId(sample.id));
        }
        if let Some(raw) = record.triples {
            let mut set = TripleSet::new();
            for rt in raw {
                let t = Triple::new(
                    &rt.predicate,
                    &rt.subject_type,
                    &rt.subject,
                    &rt.object_type,
                    &rt.object,
                )
                .map_err(|e| Error::SpanMismatch {
                    sample_id: sample.id.clone(),
                    message: e.to_string(),
                })?;
                // spans must select the untrimmed surface strings as written
                if t.subject != rt.subject || t.object != rt.object {
                    return Err(Error::SpanMismatch {
                        sample_id: sample.id.clone(),
                        message: "entity surface has surrounding whitespace".into(),
                    });
                }
                push_unique(&mut entity_types, &t.subject_type);
                push_unique(&mut entity_types, &t.object_type);
                push_unique(&mut relation_types, &t.predicate);
                set.insert(t.with_spans(Some(rt.subject_span), Some(rt.object_span)));
            }
            gold.insert(sample.id.clone(), GoldAnnotation::new(&sample, set)?);
        }
        samples.push(sample);
    }

    if samples.is_empty() {
        return Err(Error::NoSamples(PathBuf::from(origin)));
    }
    let schema = if entity_types.is_empty() || relation_types.is_empty() {
        None
    } else {
        Some(Schema::new(entity_types, relation_types)?)
    };
    Ok(Dataset {
        split,
        samples,
        gold,
        schema,
    })
}

#[derive(Serialize)]
struct OutTriple<'a> {
    predicate: &'a str,
    subject: &'a str,
    subject_type: &'a str,
    object: &'a str,
    object_type: &'a str,
    subject_span: Option<Span>,
    object_span: Option<Span>,
}

/// Serializes one record in the ingestion format.
pub fn record_line(sample: &Sample, triples: Option<&TripleSet>) -> String {
    let triples: Option<Vec<OutTriple<'_>>> = triples.map(|set| {
        set.iter()
            .map(|t| OutTriple {
                predicate: &t.predicate,
                subject: &t.subject,
                subject_type: &t.subject_type,
                object: &t.object,
                object_type: &t.object_type,
                subject_span: t.subject_span,
                object_span: t.object_span,
            })
            .collect()
    });
    let mut v = serde_json::json!({"id": sample.id, "text": sample.text});
    if let Some(ts) = triples {
        v["triples"] = serde_json::to_value(ts).expect("triples serialize");
    }
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"id":"s1","text":"Booth shot Lincoln.","triples":[{"predicate":"Kill","subject":"Booth","subject_type":"Peop","object":"Lincoln","object_type":"Peop","subject_span":[0,5],"object_span":[11,18]}]}
{"id":"s2","text":"Nothing here."}
"#;

    fn parse(s: &str) -> Result<Dataset> {
        parse_dataset(s, Path::new("mem.jsonl"), Split::Train)
    }

    #[test]
    fn loads_records_in_order() {
        let ds = parse(GOOD).unwrap();
        assert_eq!(ds.samples.len(), 2);
        assert_eq!(ds.samples[0].id, "s1");
        assert_eq!(ds.gold.len(), 1);
        let schema = ds.schema.unwrap();
        assert_eq!(schema.relation_types, vec!["Kill"]);
        assert_eq!(schema.entity_types, vec!["Peop"]);
    }

    #[test]
    fn empty_file_is_an_error() {
        let err = parse("").unwrap_err();
        assert!(err.to_string().contains("no samples"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse("{\"id\":\"a\",\"text\":\"x\"}\n{not json\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn span_mismatch_names_sample() {
        let bad = GOOD.replace("[11,18]", "[11,17]");
        let err = parse(&bad).unwrap_err();
        assert!(
            matches!(&err, Error::SpanMismatch { sample_id, .. } if sample_id == "s1"),
            "{err}"
        );
    }

    #[test]
    fn duplicate_gold_collapses() {
        let line = GOOD.lines().next().unwrap();
        let dup = line.replace("}]}", "},{\"predicate\":\"Kill\",\"subject\":\"Booth\",\"subject_type\":\"Peop\",\"object\":\"Lincoln\",\"object_type\":\"Peop\",\"subject_span\":[0,5],\"object_span\":[11,18]}]}");
        let ds = parse(&dup).unwrap();
        assert_eq!(ds.gold["s1"].triples.len(), 1);
    }

    #[test]
    fn schema_header_is_merged() {
        let content = format!("{{\"schema\":{{\"entity_types\":[\"Loc\"],\"relation_types\":[\"Live_In\"]}}}}\n{GOOD}");
        let schema = parse(&content).unwrap().schema.unwrap();
        assert_eq!(schema.relation_types, vec!["Live_In", "Kill"]);
        assert_eq!(schema.entity_types, vec!["Loc", "Peop"]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let content = "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n";
        assert!(matches!(parse(content), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn record_line_round_trips() {
        let ds = parse(GOOD).unwrap();
        let s = &ds.samples[0];
        let line = record_line(s, Some(&ds.gold["s1"].triples));
        let again = parse(&line).unwrap();
        assert_eq!(again.gold["s1"], ds.gold["s1"]);
    }
}
