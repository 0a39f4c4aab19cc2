//! CodeIE blocks:
//!
//! ```text
//! def extract():
//!     triple(predicate="..", subject_type="..", subject="..", object_type="..", object="..")
//! ```

use super::{Diagnostic, ParsedExtraction};
use crate::model::{align_entity_offsets, Triple, TripleSet};

pub const CODE_HEADER: &str = "def extract():";
const KEYS: [&str; 5] = ["predicate", "subject_type", "subject", "object_type", "object"];

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn serialize(ts: &TripleSet) -> String {
    let mut out = String::from(CODE_HEADER);
    for t in ts {
        out.push_str(&format!(
            "\n    triple(predicate={}, subject_type={}, subject={}, object_type={}, object={})",
            quote(&t.predicate),
            quote(&t.subject_type),
            quote(&t.subject),
            quote(&t.object_type),
            quote(&t.object)
        ));
    }
    out
}

/// Parses `key="value", key="value"` into pairs.
fn parse_args(args: &str) -> Result<Vec<(String, String)>, &'static str> {
    let mut out = Vec::new();
    let mut chars = args.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            break;
        }
        let mut key = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_alphanumeric() || c == '_' {
                key.push(c);
                chars.next();
            } else {
                break;
            }
        }
        if key.is_empty() {
            return Err("expected keyword");
        }
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.next() != Some('=') {
            return Err("expected '='");
        }
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let delim = match chars.next() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err("expected string literal"),
        };
        let mut value = String::new();
        loop {
            match chars.next() {
                None => return Err("unterminated string"),
                Some('\\') => match chars.next() {
                    Some('n') => value.push('\n'),
                    Some('r') => value.push('\r'),
                    Some('t') => value.push('\t'),
                    Some(c) => value.push(c),
                    None => return Err("unterminated string"),
                },
                Some(c) if c == delim => break,
                Some(c) => value.push(c),
            }
        }
        out.push((key, value));
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            None => break,
            Some(',') => {}
            Some(_) => return Err("expected ','"),
        }
    }
    Ok(out)
}

pub(crate) fn parse(raw: &str, sentence: &str) -> ParsedExtraction {
    let mut out = ParsedExtraction::default();
    for line in raw.lines() {
        let row = line.trim();
        if row.is_empty() || row == CODE_HEADER || row.starts_with('#') {
            continue;
        }
        let Some(args) = row.strip_prefix("triple(").and_then(|r| r.strip_suffix(')')) else {
            out.skip(Diagnostic::new(row, "not a triple call"));
            continue;
        };
        let pairs = match parse_args(args) {
            Ok(p) => p,
            Err(reason) => {
                out.skip(Diagnostic::new(row, reason));
                continue;
            }
        };
        let mut fields: [Option<&str>; 5] = [None; 5];
        let mut bad = None;
        for (k, v) in &pairs {
            match KEYS.iter().position(|key| key == k) {
                Some(i) if fields[i].is_none() => fields[i] = Some(v),
                Some(_) => bad = Some("duplicate keyword"),
                None => bad = Some("unknown keyword"),
            }
        }
        if let Some(reason) = bad {
            out.skip(Diagnostic::new(row, reason));
            continue;
        }
        let [Some(p), Some(st), Some(s), Some(ot), Some(o)] = fields else {
            out.skip(Diagnostic::new(row, "missing keyword"));
            continue;
        };
        match Triple::new(p, st, s, ot, o) {
            Ok(t) => {
                let subject_span = align_entity_offsets(sentence, &t.subject);
                let object_span = align_entity_offsets(sentence, &t.object);
                out.triples.insert(t.with_spans(subject_span, object_span));
            }
            Err(_) => out.skip(Diagnostic::new(row, "empty field")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_grammar() {
        let ts: TripleSet = vec![Triple::new("Kill", "Per", "Booth", "Per", "Lincoln").unwrap()].into();
        assert_eq!(
            serialize(&ts),
            "def extract():\n    triple(predicate=\"Kill\", subject_type=\"Per\", subject=\"Booth\", object_type=\"Per\", object=\"Lincoln\")"
        );
    }

    #[test]
    fn keyword_order_is_free() {
        let raw = "triple(object='Lincoln', object_type='Per', subject='Booth', subject_type='Per', predicate='Kill')";
        let p = parse(raw, "Booth shot Lincoln");
        assert_eq!(p.triples.len(), 1);
        assert!(p.triples.as_slice()[0].subject_span.is_some());
    }

    #[test]
    fn malformed_calls() {
        let raw = "print(1)\ntriple(predicate=\"Kill\")\ntriple(predicate=\"K\", bogus=\"x\")\ntriple(predicate=\"unterminated)";
        let p = parse(raw, "");
        let reasons: Vec<_> = p.diagnostics.iter().map(|d| d.reason.as_str()).collect();
        assert_eq!(
            reasons,
            [
                "not a triple call",
                "missing keyword",
                "unknown keyword",
                "unterminated string"
            ]
        );
    }
}
