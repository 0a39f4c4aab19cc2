//! Strict relation F1 and output-length cost reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Triple, TripleSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }

    fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub totals: Counts,
    pub per_relation: BTreeMap<String, Counts>,
    pub samples: usize,
    /// Predicted triples with at least one entity not found in the sentence.
    pub unaligned_entities: usize,
    /// Output rows the parser could not read.
    pub skipped_rows: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:>6} {:>6} {:>6} {:>8} {:>8} {:>8}",
            "relation", "TP", "FP", "FN", "P", "R", "F1"
        );
        for (rel, c) in &self.per_relation {
            let _ = writeln!(
                out,
                "{:<20} {:>6} {:>6} {:>6} {:>8.4} {:>8.4} {:>8.4}",
                rel,
                c.tp,
                c.fp,
                c.fn_,
                c.precision(),
                c.recall(),
                c.f1()
            );
        }
        let _ = writeln!(
            out,
            "{:<20} {:>6} {:>6} {:>6} {:>8.4} {:>8.4} {:>8.4}",
            "micro", self.totals.tp, self.totals.fp, self.totals.fn_, self.precision, self.recall, self.f1
        );
        let _ = writeln!(
            out,
            "samples: {}  unaligned: {}  skipped rows: {}",
            self.samples, self.unaligned_entities, self.skipped_rows
        );
        out
    }
}

/// True when relation, both entity types and both entity offsets agree.
pub fn strict_match(pred: &Triple, gold: &Triple) -> bool {
    pred.predicate == gold.predicate
        && pred.subject_type == gold.subject_type
        && pred.object_type == gold.object_type
        && pred.subject_span.is_some()
        && pred.object_span.is_some()
        && pred.subject_span == gold.subject_span
        && pred.object_span == gold.object_span
}

fn score_sample(pred: &TripleSet, gold: &TripleSet, per_relation: &mut BTreeMap<String, Counts>) -> Counts {
    let mut used = vec![false; gold.len()];
    let mut counts = Counts::default();
    for p in pred {
        let hit = gold
            .iter()
            .enumerate()
            .position(|(i, g)| !used[i] && strict_match(p, g));
        let entry = per_relation.entry(p.predicate.clone()).or_default();
        match hit {
            Some(i) => {
                used[i] = true;
                counts.tp += 1;
                entry.tp += 1;
            }
            None => {
                counts.fp += 1;
                entry.fp += 1;
            }
        }
    }
    for (g, _) in gold.iter().zip(&used).filter(|(_, u)| !**u) {
        counts.fn_ += 1;
        per_relation.entry(g.predicate.clone()).or_default().fn_ += 1;
    }
    counts
}

/// Micro-averaged strict F1 over all samples in `gold`. Samples without a
/// prediction contribute only false negatives.
pub fn micro_f1(predictions: &BTreeMap<String, TripleSet>, gold: &BTreeMap<String, TripleSet>) -> Result<EvalReport> {
    if let Some(id) = predictions.keys().find(|id| !gold.contains_key(*id)) {
        return Err(Error::UnknownSample(id.clone()));
    }
    let empty = TripleSet::new();
    let mut totals = Counts::default();
    let mut per_relation = BTreeMap::new();
    let mut unaligned = 0;
    for (id, g) in gold {
        let p = predictions.get(id).unwrap_or(&empty);
        unaligned += p
            .iter()
            .filter(|t| t.subject_span.is_none() || t.object_span.is_none())
            .count();
        totals.add(score_sample(p, g, &mut per_relation));
    }
    let precision = totals.precision();
    let recall = totals.recall();
    Ok(EvalReport {
        precision,
        recall,
        f1: f1(precision, recall),
        totals,
        per_relation,
        samples: gold.len(),
        unaligned_entities: unaligned,
        skipped_rows: 0,
    })
}

/// Character statistics over generated outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub outputs: usize,
    pub total_chars: usize,
    pub avg_chars: f64,
    pub min_chars: usize,
    pub max_chars: usize,
}

impl CostReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table with one row per labelled report.
    pub fn table(rows: &[(&str, &CostReport)]) -> String {
        let mut out = format!(
            "{:<10} {:>10} {:>10} {:>8} {:>8}\n",
            "format", "# Total", "# Avg.", "# Min.", "# Max."
        );
        for (label, r) in rows {
            let _ = writeln!(
                out,
                "{:<10} {:>10} {:>10.2} {:>8} {:>8}",
                label, r.total_chars, r.avg_chars, r.min_chars, r.max_chars
            );
        }
        out
    }
}

/// Cost report over one raw output per test sample.
pub fn cost_report<S: AsRef<str>>(outputs: &[S]) -> Result<CostReport> {
    crate::prompting::count_characters(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Span;

    fn t(pred: &str, s: (usize, usize), o: (usize, usize)) -> Triple {
        Triple::new(pred, "Peop", "x", "Loc", "y")
            .unwrap()
            .with_spans(Some(Span::new(s.0, s.1)), Some(Span::new(o.0, o.1)))
    }

    fn one(id: &str, triples: Vec<Triple>) -> BTreeMap<String, TripleSet> {
        BTreeMap::from([(id.to_string(), triples.into())])
    }

    #[test]
    fn strict_match_cases() {
        let g = t("Live_In", (0, 1), (2, 3));
        assert!(strict_match(&g.clone(), &g));
        assert!(!strict_match(&g.clone().with_spans(None, g.object_span), &g));
        assert!(!strict_match(&t("Work_For", (0, 1), (2, 3)), &g));
    }

    #[test]
    fn worked_example() {
        let (a, b, c) = (t("R", (0, 1), (2, 3)), t("R", (4, 5), (6, 7)), t("R", (8, 9), (10, 11)));
        let r = micro_f1(&one("s", vec![a.clone(), c]), &one("s", vec![a, b])).unwrap();
        assert_eq!((r.totals.tp, r.totals.fp, r.totals.fn_), (1, 1, 1));
        assert_eq!((r.precision, r.recall, r.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn empty_predictions() {
        let g = one("s", vec![t("R", (0, 1), (2, 3))]);
        let r = micro_f1(&BTreeMap::new(), &g).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert_eq!(micro_f1(&g, &g).unwrap().f1, 1.0);
    }

    #[test]
    fn unknown_prediction_id() {
        let g = one("s", vec![t("R", (0, 1), (2, 3))]);
        assert!(matches!(
            micro_f1(&one("other", vec![]), &g),
            Err(Error::UnknownSample(_))
        ));
    }

    #[test]
    fn unaligned_counts_as_fp() {
        let g = t("R", (0, 1), (2, 3));
        let p = g.clone().with_spans(None, None);
        let r = micro_f1(&one("s", vec![p]), &one("s", vec![g])).unwrap();
        assert_eq!((r.totals.tp, r.totals.fp, r.unaligned_entities), (0, 1, 1));
    }

    #[test]
    fn cost_examples() {
        let a = "a".repeat(30);
        let b = "b".repeat(460);
        let r = cost_report(&[a.as_str(), b.as_str()]).unwrap();
        assert_eq!((r.min_chars, r.max_chars), (30, 460));
        assert_eq!(cost_report(&["", ""]).unwrap().total_chars, 0);
        let r = cost_report(&["x".repeat(10), "x".repeat(20), "x".repeat(30)]).unwrap();
        assert_eq!(r.avg_chars, 20.0);
        assert!(cost_report::<&str>(&[]).is_err());
    }

    #[test]
    fn cost_table_columns() {
        let r = cost_report(&["abc"]).unwrap();
        let table = CostReport::table(&[("tableie", &r)]);
        for col in ["# Total", "# Avg.", "# Min.", "# Max."] {
            assert!(table.contains(col));
        }
    }
}
