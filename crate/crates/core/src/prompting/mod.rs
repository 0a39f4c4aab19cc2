//! Prompt rendering and output parsing for the three extraction formats.
//!
//! TableIE is the primary format: the model is handed a table header and
//! fills in one pipe-delimited row per triple. TextIE and CodeIE exist as
//! baselines. Parsing is lenient: malformed rows are recorded as diagnostics
//! and never abort a run.

mod code;
mod table;
mod text;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::CostReport;
use crate::model::{Sample, TripleSet};

pub use code::CODE_HEADER;

/// Header row of the TableIE format.
pub const TABLE_HEADER: &str = "|step|predicate|subject type|subject|object type|object|";

pub const ZERO_SHOT_INSTRUCTION: &str = "Extract the relational triples from the sentence below.";
pub const FEW_SHOT_INSTRUCTION: &str = "Extract the relational triples from the sentences below.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptFormat {
    TableIE,
    TextIE,
    CodeIE,
}

impl PromptFormat {
    pub const ALL: [PromptFormat; 3] = [PromptFormat::TableIE, PromptFormat::TextIE, PromptFormat::CodeIE];
}

impl fmt::Display for PromptFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptFormat::TableIE => "tableie",
            PromptFormat::TextIE => "textie",
            PromptFormat::CodeIE => "codeie",
        })
    }
}

impl FromStr for PromptFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tableie" | "table" => Ok(PromptFormat::TableIE),
            "textie" | "text" => Ok(PromptFormat::TextIE),
            "codeie" | "code" => Ok(PromptFormat::CodeIE),
            other => Err(Error::InvalidArgument(format!("unknown prompt format {other:?}"))),
        }
    }
}

/// An annotated sample placed before the query in a few-shot prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub sample: Sample,
    pub gold: TripleSet,
    /// Higher means more similar to the test set.
    pub similarity_score: f64,
}

impl Demonstration {
    /// Demos without gold triples are allowed but worth flagging in reports.
    pub fn is_empty_gold(&self) -> bool {
        self.gold.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub row: String,
    pub reason: String,
}

impl Diagnostic {
    pub(crate) fn new(row: &str, reason: &str) -> Self {
        Diagnostic {
            row: row.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Result of parsing one raw model output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParsedExtraction {
    pub triples: TripleSet,
    pub skipped_rows: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParsedExtraction {
    fn skip(&mut self, d: Diagnostic) {
        self.diagnostics.push(d);
        self.skipped_rows = self.diagnostics.len();
    }

    /// Predicted triples whose subject or object could not be located in the
    /// sentence.
    pub fn unaligned(&self) -> usize {
        self.triples
            .iter()
            .filter(|t| t.subject_span.is_none() || t.object_span.is_none())
            .count()
    }
}

pub fn render_zero_shot(sample: &Sample) -> String {
    format!("{ZERO_SHOT_INSTRUCTION}\n{}\n{TABLE_HEADER}", sample.text)
}

/// Serializes triples in the given format. TableIE output carries no header
/// row; CodeIE output always starts with the `def extract():` line.
pub fn serialize_triples(format: PromptFormat, ts: &TripleSet) -> String {
    match format {
        PromptFormat::TableIE => table::serialize(ts),
        PromptFormat::TextIE => text::serialize(ts),
        PromptFormat::CodeIE => code::serialize(ts),
    }
}

/// Parses raw model output; spans are recovered against `sentence`.
pub fn parse_output(format: PromptFormat, raw: &str, sentence: &str) -> ParsedExtraction {
    match format {
        PromptFormat::TableIE => table::parse(raw, sentence),
        PromptFormat::TextIE => text::parse(raw, sentence),
        PromptFormat::CodeIE => code::parse(raw, sentence),
    }
}

fn demo_block(format: PromptFormat, gold: &TripleSet) -> String {
    match format {
        PromptFormat::TableIE if gold.is_empty() => TABLE_HEADER.to_string(),
        PromptFormat::TableIE => format!("{TABLE_HEADER}\n{}", table::serialize(gold)),
        other => serialize_triples(other, gold),
    }
}

/// Renders the few-shot prompt for one query.
///
/// `demos` must be sorted by ascending `similarity_score`, so the most similar
/// demonstration sits directly above the query.
pub fn render_few_shot(format: PromptFormat, demos: &[Demonstration], query: &Sample) -> Result<String> {
    if let Some(i) = demos
        .windows(2)
        .position(|w| w[1].similarity_score < w[0].similarity_score)
    {
        return Err(Error::DemoOrder(i + 1));
    }
    let mut out = String::from(FEW_SHOT_INSTRUCTION);
    out.push('\n');
    for d in demos {
        out.push_str(&d.sample.text);
        out.push('\n');
        out.push_str(&demo_block(format, &d.gold));
        out.push_str("\n\n");
    }
    out.push_str(&query.text);
    if format == PromptFormat::TableIE {
        out.push('\n');
        out.push_str(TABLE_HEADER);
    }
    Ok(out)
}

/// Recovers the query sentence from a prompt produced by [`render_zero_shot`]
/// or [`render_few_shot`], along with the format when it can be told from the
/// prompt alone (TableIE ends with the header row).
pub fn query_sentence(prompt: &str) -> Option<(&str, Option<PromptFormat>)> {
    let (body, format) = match prompt.strip_suffix(TABLE_HEADER) {
        Some(b) => (b.strip_suffix('\n')?, Some(PromptFormat::TableIE)),
        None => (prompt, None),
    };
    let query = match body.rfind("\n\n") {
        Some(i) => &body[i + 2..],
        None => body.split_once('\n')?.1,
    };
    let format = format.or_else(|| body.contains(CODE_HEADER).then_some(PromptFormat::CodeIE));
    Some((query, format))
}

/// Character statistics (by code point) over model outputs.
pub fn count_characters<S: AsRef<str>>(outputs: &[S]) -> Result<CostReport> {
    if outputs.is_empty() {
        return Err(Error::EmptyOutputs);
    }
    let lengths: Vec<usize> = outputs.iter().map(|s| s.as_ref().chars().count()).collect();
    let total: usize = lengths.iter().sum();
    Ok(CostReport {
        outputs: lengths.len(),
        total_chars: total,
        avg_chars: total as f64 / lengths.len() as f64,
        min_chars: *lengths.iter().min().unwrap(),
        max_chars: *lengths.iter().max().unwrap(),
    })
}
