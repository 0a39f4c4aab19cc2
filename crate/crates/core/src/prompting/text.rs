//! TextIE lines: `(subject_type: subject, predicate, object_type: object)`.
//!
//! `\`, `,` and `:` inside a field are backslash-escaped.

use super::{Diagnostic, ParsedExtraction};
use crate::model::{align_entity_offsets, Triple, TripleSet};

fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' | ',' | ':' => {
                out.push('\\');
                out.push(c);
            }
            '\n' | '\r' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn serialize(ts: &TripleSet) -> String {
    ts.iter()
        .map(|t| {
            format!(
                "({}: {}, {}, {}: {})",
                escape(&t.subject_type),
                escape(&t.subject),
                escape(&t.predicate),
                escape(&t.object_type),
                escape(&t.object)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Splits `type: value` where both halves keep their escapes.
fn split_typed(raw: &str) -> Option<(String, String)> {
    let mut escaped = false;
    for (i, c) in raw.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == ':' {
            return Some((raw[..i].to_string(), raw[i + 1..].to_string()));
        }
    }
    None
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(n @ ('\\' | ',' | ':')) => out.push(n),
                Some(n) => {
                    out.push('\\');
                    out.push(n);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Splits on unescaped commas, leaving escapes in place.
fn split_commas(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == ',' {
            parts.push(&s[start..i]);
            start = i + 1;
        }
    }
    parts.push(&s[start..]);
    parts
}

pub(crate) fn parse(raw: &str, sentence: &str) -> ParsedExtraction {
    let mut out = ParsedExtraction::default();
    for line in raw.lines() {
        let row = line.trim();
        if row.is_empty() {
            continue;
        }
        let Some(inner) = row.strip_prefix('(').and_then(|r| r.strip_suffix(')')) else {
            out.skip(Diagnostic::new(row, "not a tuple"));
            continue;
        };
        let fields = split_commas(inner);
        if fields.len() != 3 {
            out.skip(Diagnostic::new(row, "wrong field count"));
            continue;
        }
        let (Some((st, s)), Some((ot, o))) = (split_typed(fields[0]), split_typed(fields[2])) else {
            out.skip(Diagnostic::new(row, "missing entity type"));
            continue;
        };
        match Triple::new(
            &unescape(fields[1]),
            &unescape(&st),
            &unescape(&s),
            &unescape(&ot),
            &unescape(&o),
        ) {
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
    fn line_grammar() {
        let ts: TripleSet = vec![Triple::new("Kill", "Per", "Booth", "Per", "Lincoln").unwrap()].into();
        assert_eq!(serialize(&ts), "(Per: Booth, Kill, Per: Lincoln)");
    }

    #[test]
    fn escaped_delimiters_survive() {
        let ts: TripleSet = vec![Triple::new("Located_In", "Loc", "Washington, D.C.", "Loc", "a:b\\c").unwrap()].into();
        let p = parse(&serialize(&ts), "");
        assert_eq!(p.triples, ts);
    }

    #[test]
    fn malformed_lines() {
        let p = parse("(Per: Booth, Kill)\nnope\n(Per Booth, Kill, Per: Lincoln)", "");
        let reasons: Vec<_> = p.diagnostics.iter().map(|d| d.reason.as_str()).collect();
        assert_eq!(reasons, ["wrong field count", "not a tuple", "missing entity type"]);
    }
}
