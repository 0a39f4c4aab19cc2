//! Simulated human annotation over a gold store.
//!
//! Checking a sample (looking at it to learn which relations it expresses) and
//! annotating it (producing its full gold label) are counted separately, so a
//! selection strategy that inspects more samples than it keeps shows up in
//! the audit.

use std::collections::BTreeSet;

use crate::dataset::GoldStore;
use crate::error::{Error, Result};
use crate::model::GoldAnnotation;

#[derive(Debug, Clone)]
pub struct AnnotationOracle {
    gold: GoldStore,
    checked: BTreeSet<String>,
    annotated: BTreeSet<String>,
    check_log: Vec<String>,
}

impl AnnotationOracle {
    pub fn new(gold: GoldStore) -> Self {
        AnnotationOracle {
            gold,
            checked: BTreeSet::new(),
            annotated: BTreeSet::new(),
            check_log: Vec::new(),
        }
    }

    fn lookup(&self, sample_id: &str) -> Result<&GoldAnnotation> {
        self.gold
            .get(sample_id)
            .ok_or_else(|| Error::UnknownSample(sample_id.to_string()))
    }

    fn mark_checked(&mut self, sample_id: &str) {
        if self.checked.insert(sample_id.to_string()) {
            self.check_log.push(sample_id.to_string());
        }
    }

    /// Reveals the relation labels present in the sample's gold triples.
    pub fn check(&mut self, sample_id: &str) -> Result<Vec<String>> {
        let labels = self
            .lookup(sample_id)?
            .triples
            .predicates()
            .into_iter()
            .map(str::to_string)
            .collect();
        self.mark_checked(sample_id);
        Ok(labels)
    }

    /// Reveals the full gold annotation. Annotating implies checking.
    pub fn annotate(&mut self, sample_id: &str) -> Result<GoldAnnotation> {
        let gold = self.lookup(sample_id)?.clone();
        self.mark_checked(sample_id);
        self.annotated.insert(sample_id.to_string());
        Ok(gold)
    }

    pub fn checked_count(&self) -> usize {
        self.checked.len()
    }

    pub fn annotated_count(&self) -> usize {
        self.annotated.len()
    }

    pub fn checked_ids(&self) -> &BTreeSet<String> {
        &self.checked
    }

    pub fn annotated_ids(&self) -> &BTreeSet<String> {
        &self.annotated
    }

    /// Checked ids in the order they were first checked.
    pub fn check_order(&self) -> &[String] {
        &self.check_log
    }

    pub fn contains(&self, sample_id: &str) -> bool {
        self.gold.contains_key(sample_id)
    }
}
