//! Relational triple extraction with few-shot LLM prompting: tabular prompt
//! formats, triple-level set distances, a trained sample retriever and
//! budgeted demonstration selection.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod io;
pub mod llm;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod prompting;
pub mod retriever;
pub mod selection;
pub mod similarity;

pub use dataset::{load_dataset, parse_dataset, Dataset, GoldStore, Split};
pub use error::{Error, Result};
pub use eval::{cost_report, micro_f1, strict_match, CostReport, Counts, EvalReport};
pub use model::{align_entity_offsets, verbalize_triple, GoldAnnotation, Sample, Schema, Span, Triple, TripleSet};
pub use oracle::AnnotationOracle;
pub use prompting::{parse_output, render_few_shot, render_zero_shot, serialize_triples, PromptFormat};
pub use selection::{select_balance, select_coverage, select_random, select_top_k, SelectionResult, Strategy};
pub use similarity::{set_distance, triple_distance};
