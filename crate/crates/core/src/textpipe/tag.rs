// SPDX-License-Identifier: Apache-2.0

use super::lexicon::LexiconBundle;
use super::{PipelineConfig, PosTag, TaggedToken};

impl LexiconBundle {
    /// Maps an inflected form to its lemma: explicit lemma table first, then
    /// possessive stripping, then the regular `-s`/`-es` plural rule for
    /// words the part-of-speech table does not already know.
    pub fn lemmatize(&self, word: &str) -> String {
        if let Some(lemma) = self.lemma_entry(word) {
            return lemma.to_string();
        }
        if let Some(stem) = word.strip_suffix("'s").filter(|s| !s.is_empty()) {
            return self.lemmatize(stem);
        }
        if self.pos_tag(word).is_some() {
            return word.to_string();
        }
        if !word.ends_with("ss") {
            if let Some(stem) = word.strip_suffix('s') {
                if self.pos_tag(stem).is_some() {
                    return stem.to_string();
                }
                if let Some(stem) = stem.strip_suffix('e') {
                    if self.pos_tag(stem).is_some() {
                        return stem.to_string();
                    }
                }
            }
        }
        word.to_string()
    }
}

/// Lexicon-lookup tagger. Tokens containing a digit are numerals and tagged
/// [`PosTag::Other`]; unknown words get `config.unknown_word_tag`.
pub fn tag(tokens: &[String], lexicon: &LexiconBundle, config: &PipelineConfig) -> Vec<TaggedToken> {
    tokens
        .iter()
        .map(|token| {
            let surface = lexicon.lemmatize(token);
            let tag = if surface.chars().any(|c| c.is_ascii_digit()) {
                PosTag::Other
            } else {
                lexicon.pos_tag(&surface).unwrap_or(config.unknown_word_tag)
            };
            TaggedToken { surface, tag }
        })
        .collect()
}
