//! Pipe-table (TableIE) rows.
//!
//! A row is `|step|predicate|subject type|subject|object type|object|`. Inside
//! a cell `|` is written `\|` and a backslash is written `\\`.

use super::{Diagnostic, ParsedExtraction, TABLE_HEADER};
use crate::model::{align_entity_offsets, Triple, TripleSet};

const HEADER_CELLS: [&str; 6] = ["step", "predicate", "subject type", "subject", "object type", "object"];

pub(crate) fn escape_cell(cell: &str) -> String {
    let mut out = String::with_capacity(cell.len());
    for c in cell.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '|' => out.push_str("\\|"),
            '\n' | '\r' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

/// Splits on unescaped pipes and unescapes each piece.
pub(crate) fn split_cells(line: &str) -> Vec<String> {
    let mut cells = vec![String::new()];
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if matches!(chars.peek(), Some('|') | Some('\\')) => {
                let next = chars.next().unwrap_or('\\');
                cells.last_mut().unwrap().push(next);
            }
            '|' => cells.push(String::new()),
            c => cells.last_mut().unwrap().push(c),
        }
    }
    cells
}

pub(crate) fn serialize(ts: &TripleSet) -> String {
    ts.iter()
        .enumerate()
        .map(|(i, t)| {
            format!(
                "|{}|{}|{}|{}|{}|{}|",
                i + 1,
                escape_cell(&t.predicate),
                escape_cell(&t.subject_type),
                escape_cell(&t.subject),
                escape_cell(&t.object_type),
                escape_cell(&t.object)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn is_header(cells: &[String]) -> bool {
    let norm: Vec<String> = cells.iter().map(|c| c.trim().to_lowercase()).collect();
    if norm.len() == HEADER_CELLS.len() && norm.iter().zip(HEADER_CELLS).all(|(a, b)| a == b) {
        return true;
    }
    // markdown alignment row, e.g. |---|:--:|
    !norm.is_empty()
        && norm
            .iter()
            .all(|c| !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':' | ' ')))
}

pub(crate) fn parse(raw: &str, sentence: &str) -> ParsedExtraction {
    let mut out = ParsedExtraction::default();
    for line in raw.lines() {
        let row = line.trim();
        if row.is_empty() || row == TABLE_HEADER {
            continue;
        }
        if !row.starts_with('|') {
            out.skip(Diagnostic::new(row, "not a table row"));
            continue;
        }
        let pieces = split_cells(row);
        // a closing pipe leaves an empty trailing piece; an escaped final pipe does not
        if pieces.len() < 2 || !pieces.last().is_some_and(|p| p.trim().is_empty()) {
            out.skip(Diagnostic::new(row, "unterminated row"));
            continue;
        }
        let interior = &pieces[1..pieces.len() - 1];
        if is_header(interior) {
            continue;
        }
        if interior.len() != 6 {
            out.skip(Diagnostic::new(row, "wrong cell count"));
            continue;
        }
        match Triple::new(&interior[1], &interior[2], &interior[3], &interior[4], &interior[5]) {
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
    fn split_handles_escapes() {
        assert_eq!(split_cells("|a\\|b|c|"), vec!["", "a|b", "c", ""]);
        assert_eq!(split_cells("|a\\\\|b|"), vec!["", "a\\", "b", ""]);
        assert_eq!(split_cells("|a\\b|"), vec!["", "a\\b", ""]);
    }

    #[test]
    fn escape_then_split_is_identity() {
        for cell in ["A|B", "x\\", "\\|", "plain", "a\\|b"] {
            let row = format!("|{}|", escape_cell(cell));
            assert_eq!(
                split_cells(&row),
                vec!["".to_string(), cell.to_string(), "".to_string()]
            );
        }
    }

    #[test]
    fn header_and_separator_rows_ignored() {
        let raw = "| Step | Predicate | Subject Type | Subject | Object Type | Object |\n|---|---|---|---|---|---|\n|1|Kill|Per|Booth|Per|Lincoln|";
        let p = parse(raw, "Booth shot Lincoln");
        assert_eq!(p.triples.len(), 1);
        assert_eq!(p.skipped_rows, 0);
    }

    #[test]
    fn padded_cells_are_trimmed() {
        let p = parse("| 1 | Kill | Per | Booth | Per | Lincoln |", "Booth shot Lincoln");
        let t = &p.triples.as_slice()[0];
        assert_eq!(t.subject, "Booth");
        assert_eq!(t.object_span.map(|s| (s.start, s.end)), Some((11, 18)));
    }

    #[test]
    fn prose_and_unterminated_rows_diagnosed() {
        let p = parse("Here you go:\n|1|Kill|Per|Booth|Per|Lincoln", "x");
        assert_eq!(p.skipped_rows, 2);
        assert_eq!(p.diagnostics[0].reason, "not a table row");
        assert_eq!(p.diagnostics[1].reason, "unterminated row");
    }

    #[test]
    fn empty_cell_diagnosed() {
        let p = parse("|1|Kill|Per| |Per|Lincoln|", "x");
        assert_eq!(p.triples.len(), 0);
        assert_eq!(p.diagnostics[0].reason, "empty field");
    }
}
