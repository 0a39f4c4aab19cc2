use std::collections::HashMap;

use super::{CompletionProvider, LlmRequest, ProviderFailure};
use crate::dataset::Dataset;
use crate::model::TripleSet;
use crate::prompting::{query_sentence, serialize_triples, PromptFormat};

/// Offline provider that answers every extraction prompt with the gold
/// triples of the query sentence, serialized in the prompt's format. Unknown
/// sentences get an empty answer.
#[derive(Debug, Clone, Default)]
pub struct MockProvider {
    gold_by_text: HashMap<String, TripleSet>,
    default_format: Option<PromptFormat>,
}

impl MockProvider {
    pub fn echo_gold<'a>(datasets: impl IntoIterator<Item = &'a Dataset>) -> Self {
        let mut gold_by_text = HashMap::new();
        for ds in datasets {
            for s in &ds.samples {
                if let Some(g) = ds.gold.get(&s.id) {
                    gold_by_text
                        .entry(s.text.clone())
                        .or_insert_with(|| g.triples.without_spans());
                }
            }
        }
        MockProvider {
            gold_by_text,
            default_format: None,
        }
    }

    /// Format used when the prompt itself does not reveal one (TextIE
    /// prompts, which carry no trailing header).
    pub fn with_default_format(mut self, format: PromptFormat) -> Self {
        self.default_format = Some(format);
        self
    }

    pub fn respond(&self, prompt: &str) -> String {
        let Some((sentence, detected)) = query_sentence(prompt) else {
            return String::new();
        };
        let format = detected.or(self.default_format).unwrap_or(PromptFormat::TextIE);
        match self.gold_by_text.get(sentence) {
            Some(gold) if !gold.is_empty() => serialize_triples(format, gold),
            _ => String::new(),
        }
    }
}

impl CompletionProvider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, ProviderFailure> {
        Ok(self.respond(&request.prompt))
    }
}
