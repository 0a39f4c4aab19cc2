//! Domain types shared by every stage: triples, samples, gold annotations and
//! the label schema.
//!
//! Offsets are character (code point) indices into the owning sentence,
//! end-exclusive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open `[start, end)` character range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

impl From<[usize; 2]> for Span {
    fn from([start, end]: [usize; 2]) -> Self {
        Span { start, end }
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

/// Characters `start..end` of `text`, by code point.
pub fn char_slice(text: &str, span: Span) -> Option<&str> {
    if span.is_empty() {
        return None;
    }
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let begin = indices.nth(span.start)?;
    let finish = indices.nth(span.end - span.start - 1)?;
    Some(&text[begin..finish])
}

/// One relational triple: a predicate linking a typed subject to a typed object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub predicate: String,
    pub subject_type: String,
    pub subject: String,
    pub object_type: String,
    pub object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_span: Option<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_span: Option<Span>,
}

impl Triple {
    /// Builds a span-less triple. Fields are trimmed and must be non-empty.
    pub fn new(predicate: &str, subject_type: &str, subject: &str, object_type: &str, object: &str) -> Result<Self> {
        let t = Triple {
            predicate: predicate.trim().to_string(),
            subject_type: subject_type.trim().to_string(),
            subject: subject.trim().to_string(),
            object_type: object_type.trim().to_string(),
            object: object.trim().to_string(),
            subject_span: None,
            object_span: None,
        };
        t.check_fields()?;
        Ok(t)
    }

    pub fn with_spans(mut self, subject_span: Option<Span>, object_span: Option<Span>) -> Self {
        self.subject_span = subject_span;
        self.object_span = object_span;
        self
    }

    /// Same triple with both spans cleared.
    pub fn without_spans(&self) -> Self {
        self.clone().with_spans(None, None)
    }

    fn check_fields(&self) -> Result<()> {
        for (name, value) in [
            ("predicate", &self.predicate),
            ("subject_type", &self.subject_type),
            ("subject", &self.subject),
            ("object_type", &self.object_type),
            ("object", &self.object),
        ] {
            if value.trim().is_empty() {
                return Err(Error::InvalidTriple(format!("empty {name}")));
            }
        }
        Ok(())
    }

    /// Checks field non-emptiness and, for every present span, that it
    /// selects exactly the surface string inside `sentence`.
    pub fn validate(&self, sentence: &str) -> Result<()> {
        self.check_fields()?;
        for (role, span, surface) in [
            ("subject", self.subject_span, &self.subject),
            ("object", self.object_span, &self.object),
        ] {
            if let Some(span) = span {
                match char_slice(sentence, span) {
                    Some(found) if found == surface => {}
                    Some(found) => {
                        return Err(Error::InvalidTriple(format!(
                            "{role} span [{}, {}) selects {found:?}, expected {surface:?}",
                            span.start, span.end
                        )))
                    }
                    None => {
                        return Err(Error::InvalidTriple(format!(
                            "{role} span [{}, {}) out of range",
                            span.start, span.end
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// Natural-language form used for embedding: subject type, subject,
    /// predicate, object type, object joined by single spaces.
    pub fn verbalize(&self) -> String {
        [
            self.subject_type.as_str(),
            self.subject.as_str(),
            self.predicate.as_str(),
            self.object_type.as_str(),
            self.object.as_str(),
        ]
        .join(" ")
    }
}

/// Free-function alias of [`Triple::verbalize`].
pub fn verbalize_triple(t: &Triple) -> String {
    t.verbalize()
}

/// Ordered, duplicate-free collection of triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Triple>", into = "Vec<Triple>")]
pub struct TripleSet {
    triples: Vec<Triple>,
}

impl TripleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends unless an identical triple is already present. Returns whether
    /// the triple was inserted.
    pub fn insert(&mut self, t: Triple) -> bool {
        if self.triples.contains(&t) {
            false
        } else {
            self.triples.push(t);
            true
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Triple> {
        self.triples.iter()
    }

    pub fn as_slice(&self) -> &[Triple] {
        &self.triples
    }

    /// Relation labels in first-seen order, without repeats.
    pub fn predicates(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in &self.triples {
            if !out.contains(&t.predicate.as_str()) {
                out.push(&t.predicate);
            }
        }
        out
    }

    pub fn verbalized(&self) -> Vec<String> {
        self.triples.iter().map(Triple::verbalize).collect()
    }

    pub fn without_spans(&self) -> TripleSet {
        self.triples.iter().map(Triple::without_spans).collect()
    }
}

impl From<Vec<Triple>> for TripleSet {
    fn from(v: Vec<Triple>) -> Self {
        v.into_iter().collect()
    }
}

impl From<TripleSet> for Vec<Triple> {
    fn from(s: TripleSet) -> Self {
        s.triples
    }
}

impl FromIterator<Triple> for TripleSet {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut set = TripleSet::new();
        for t in iter {
            set.insert(t);
        }
        set
    }
}

impl<'a> IntoIterator for &'a TripleSet {
    type Item = &'a Triple;
    type IntoIter = std::slice::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

/// A raw sentence with a stable identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub text: String,
}

impl Sample {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let s = Sample {
            id: id.into(),
            text: text.into(),
        };
        if s.id.is_empty() {
            return Err(Error::InvalidSample("empty id".into()));
        }
        if s.text.trim().is_empty() {
            return Err(Error::InvalidSample(format!("{}: empty text", s.id)));
        }
        Ok(s)
    }
}

/// Gold triples for one sample; every triple carries both spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub sample_id: String,
    pub triples: TripleSet,
}

impl GoldAnnotation {
    pub fn new(sample: &Sample, triples: TripleSet) -> Result<Self> {
        for t in &triples {
            if t.subject_span.is_none() || t.object_span.is_none() {
                return Err(Error::SpanMismatch {
                    sample_id: sample.id.clone(),
                    message: format!("gold triple {:?} lacks a span", t.verbalize()),
                });
            }
            t.validate(&sample.text).map_err(|e| Error::SpanMismatch {
                sample_id: sample.id.clone(),
                message: e.to_string(),
            })?;
        }
        Ok(GoldAnnotation {
            sample_id: sample.id.clone(),
            triples,
        })
    }
}

/// Entity and relation label inventories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub entity_types: Vec<String>,
    pub relation_types: Vec<String>,
}

impl Schema {
    pub fn new(entity_types: Vec<String>, relation_types: Vec<String>) -> Result<Self> {
        for (name, list) in [("entity_types", &entity_types), ("relation_types", &relation_types)] {
            if list.is_empty() {
                return Err(Error::InvalidSchema(format!("{name} is empty")));
            }
            for (i, label) in list.iter().enumerate() {
                if list[..i].contains(label) {
                    return Err(Error::InvalidSchema(format!("duplicate label {label:?} in {name}")));
                }
            }
        }
        Ok(Schema {
            entity_types,
            relation_types,
        })
    }

    /// Number of relation types.
    pub fn relation_count(&self) -> usize {
        self.relation_types.len()
    }
}

/// Locates `surface` in `sentence`: the first case-sensitive occurrence, else
/// the first case-insensitive one. Offsets are character indices.
pub fn align_entity_offsets(sentence: &str, surface: &str) -> Option<Span> {
    if surface.is_empty() || sentence.is_empty() {
        return None;
    }
    let width = surface.chars().count();
    if let Some(byte) = sentence.find(surface) {
        let start = sentence[..byte].chars().count();
        return Some(Span::new(start, start + width));
    }
    let hay: Vec<char> = sentence.chars().collect();
    let needle: Vec<char> = surface.chars().collect();
    if needle.len() > hay.len() {
        return None;
    }
    let same = |a: char, b: char| a == b || a.to_lowercase().eq(b.to_lowercase());
    (0..=hay.len() - needle.len())
        .find(|&i| hay[i..i + needle.len()].iter().zip(&needle).all(|(&a, &b)| same(a, b)))
        .map(|i| Span::new(i, i + width))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kill() -> Triple {
        Triple::new("Kill", "Per", "Booth", "Per", "Lincoln").unwrap()
    }

    #[test]
    fn verbalize_follows_field_order() {
        assert_eq!(kill().verbalize(), "Per Booth Kill Per Lincoln");
        let t = Triple::new("OrgBased_In", "Loc", "New York", "Org", "ACME").unwrap();
        assert_eq!(verbalize_triple(&t), "Loc New York OrgBased_In Org ACME");
    }

    #[test]
    fn verbalize_distinguishes_object_type() {
        let a = Triple::new("Work_For", "Peop", "Ann", "Org", "X").unwrap();
        let b = Triple::new("Work_For", "Peop", "Ann", "Loc", "X").unwrap();
        assert_ne!(a.verbalize(), b.verbalize());
    }

    #[test]
    fn empty_field_rejected() {
        assert!(Triple::new("Kill", " ", "Booth", "Per", "Lincoln").is_err());
    }

    #[test]
    fn align_examples() {
        assert_eq!(
            align_entity_offsets("Booth shot Lincoln", "Lincoln"),
            Some(Span::new(11, 18))
        );
        assert_eq!(align_entity_offsets("abc", "zzz"), None);
        assert_eq!(align_entity_offsets("Abc abc", "abc"), Some(Span::new(4, 7)));
        assert_eq!(align_entity_offsets("Abc xyz", "abc"), Some(Span::new(0, 3)));
    }

    #[test]
    fn align_counts_code_points() {
        // "é" is two bytes but one character
        assert_eq!(align_entity_offsets("café Paris", "Paris"), Some(Span::new(5, 10)));
        assert_eq!(char_slice("café Paris", Span::new(5, 10)), Some("Paris"));
        assert_eq!(char_slice("café", Span::new(3, 4)), Some("é"));
        assert_eq!(char_slice("café", Span::new(3, 5)), None);
    }

    #[test]
    fn span_validation() {
        let sentence = "Booth shot Lincoln";
        let good = kill().with_spans(Some(Span::new(0, 5)), Some(Span::new(11, 18)));
        assert!(good.validate(sentence).is_ok());
        let bad = kill().with_spans(Some(Span::new(0, 4)), None);
        assert!(bad.validate(sentence).is_err());
        let out = kill().with_spans(None, Some(Span::new(11, 40)));
        assert!(out.validate(sentence).is_err());
    }

    #[test]
    fn triple_set_deduplicates() {
        let set: TripleSet = vec![kill(), kill()].into();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn schema_rejects_duplicates() {
        assert!(Schema::new(vec!["Per".into()], vec!["Kill".into(), "Kill".into()]).is_err());
        assert!(Schema::new(vec![], vec!["Kill".into()]).is_err());
    }
}
