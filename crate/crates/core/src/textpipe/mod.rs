// SPDX-License-Identifier: Apache-2.0

//! Description text to canonical noun tokens.
//!
//! `tokenize → strip_hedges → tag → extract_nouns → drop disallowed →
//! canonicalize → dedupe`, each step a pure function over an immutable
//! [`LexiconBundle`].

mod extract;
pub mod lexicon;
mod tag;
mod tokenize;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use extract::{canonicalize, extract_nouns, strip_hedges};
pub use lexicon::{LexiconBundle, LexiconError, LexiconOptions, LexiconSources};
pub use tag::tag;
pub use tokenize::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Det,
    Prep,
    Pron,
    Conj,
    Other,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Det => "DET",
            PosTag::Prep => "PREP",
            PosTag::Pron => "PRON",
            PosTag::Conj => "CONJ",
            PosTag::Other => "OTHER",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "NOUN" => PosTag::Noun,
            "VERB" => PosTag::Verb,
            "ADJ" => PosTag::Adj,
            "DET" => PosTag::Det,
            "PREP" => PosTag::Prep,
            "PRON" => PosTag::Pron,
            "CONJ" => PosTag::Conj,
            "OTHER" => PosTag::Other,
            _ => return Err(format!("unknown part-of-speech tag {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: PosTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub dedupe_within_description: bool,
    pub strip_hedges: bool,
    pub count_hedges: bool,
    pub unknown_word_tag: PosTag,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dedupe_within_description: true,
            strip_hedges: true,
            count_hedges: true,
            unknown_word_tag: PosTag::Noun,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcessedDescription {
    pub tokens: Vec<String>,
    pub hedge_count: usize,
}

pub fn process_description(raw_text: &str, lexicon: &LexiconBundle, config: &PipelineConfig) -> ProcessedDescription {
    let words = tokenize(raw_text);
    let (words, hedges) = if config.strip_hedges {
        strip_hedges(&words, lexicon)
    } else if config.count_hedges {
        (words.clone(), strip_hedges(&words, lexicon).1)
    } else {
        (words, 0)
    };
    let tagged = tag(&words, lexicon, config);

    let mut seen = HashSet::new();
    let tokens = extract_nouns(&tagged, lexicon)
        .into_iter()
        .filter(|noun| !lexicon.is_disallowed(noun))
        .map(|noun| canonicalize(&noun, lexicon))
        .filter(|token| !config.dedupe_within_description || seen.insert(token.clone()))
        .collect();

    ProcessedDescription {
        tokens,
        hedge_count: if config.count_hedges { hedges } else { 0 },
    }
}

/// A lexicon and configuration bundled for repeated use.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    pub lexicon: LexiconBundle,
    pub config: PipelineConfig,
}

impl TextPipeline {
    pub fn new(lexicon: LexiconBundle, config: PipelineConfig) -> Self {
        Self { lexicon, config }
    }

    pub fn bundled() -> Self {
        Self::new(LexiconBundle::bundled(), PipelineConfig::default())
    }

    pub fn process(&self, raw_text: &str) -> ProcessedDescription {
        process_description(raw_text, &self.lexicon, &self.config)
    }

    pub fn tokens(&self, raw_text: &str) -> Vec<String> {
        self.process(raw_text).tokens
    }
}
