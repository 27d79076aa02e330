// SPDX-License-Identifier: Apache-2.0

//! Word lists driving the description pipeline.
//!
//! A lexicon directory holds six plain-text files:
//!
//! | file             | format                                        |
//! |------------------|-----------------------------------------------|
//! | `pos.tsv`        | `word<TAB>TAG`                                |
//! | `lemmas.tsv`     | `inflected<TAB>lemma`                         |
//! | `compounds.txt`  | one multiword phrase per line                 |
//! | `synonyms.txt`   | one group per line, head first, space-separated |
//! | `disallowed.txt` | one word per line                             |
//! | `hedges.txt`     | one phrase per line                           |
//!
//! Lines starting with `#` and blank lines are skipped everywhere.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::tokenize::tokenize;
use super::PosTag;

pub const POS_FILE: &str = "pos.tsv";
pub const LEMMA_FILE: &str = "lemmas.tsv";
pub const COMPOUND_FILE: &str = "compounds.txt";
pub const SYNONYM_FILE: &str = "synonyms.txt";
pub const DISALLOWED_FILE: &str = "disallowed.txt";
pub const HEDGE_FILE: &str = "hedges.txt";

pub const DEFAULT_DISALLOWED_SIZE: usize = 12;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file}:{line}: {reason}")]
    Malformed {
        file: &'static str,
        line: usize,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexiconOptions {
    /// Required number of disallowed words, or `None` to accept any size.
    pub disallowed_size: Option<usize>,
}

impl Default for LexiconOptions {
    fn default() -> Self {
        Self {
            disallowed_size: Some(DEFAULT_DISALLOWED_SIZE),
        }
    }
}

/// Raw file contents, before parsing.
#[derive(Debug, Clone, Copy)]
pub struct LexiconSources<'a> {
    pub pos: &'a str,
    pub lemmas: &'a str,
    pub compounds: &'a str,
    pub synonyms: &'a str,
    pub disallowed: &'a str,
    pub hedges: &'a str,
}

impl LexiconSources<'static> {
    pub const BUNDLED: LexiconSources<'static> = LexiconSources {
        pos: include_str!("../../data/lexicons/pos.tsv"),
        lemmas: include_str!("../../data/lexicons/lemmas.tsv"),
        compounds: include_str!("../../data/lexicons/compounds.txt"),
        synonyms: include_str!("../../data/lexicons/synonyms.txt"),
        disallowed: include_str!("../../data/lexicons/disallowed.txt"),
        hedges: include_str!("../../data/lexicons/hedges.txt"),
    };
}

#[derive(Debug, Clone)]
pub struct LexiconBundle {
    pos: HashMap<String, PosTag>,
    lemmas: HashMap<String, String>,
    /// Compound phrases split into words, longest first.
    compounds: Vec<Vec<String>>,
    compound_set: HashSet<String>,
    synonym_groups: Vec<Vec<String>>,
    heads: HashMap<String, String>,
    disallowed: BTreeSet<String>,
    /// Hedge phrases as token sequences, longest first.
    hedges: Vec<Vec<String>>,
}

fn entries(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn check_lowercase(file: &'static str, line: usize, s: &str) -> Result<(), LexiconError> {
    if s.chars().any(char::is_uppercase) {
        return Err(LexiconError::Malformed {
            file,
            line,
            reason: format!("entry {s:?} is not lowercase"),
        });
    }
    Ok(())
}

fn parse_pairs(file: &'static str, text: &str) -> Result<Vec<(usize, String, String)>, LexiconError> {
    entries(text)
        .map(|(line, l)| {
            check_lowercase(file, line, l.split('\t').next().unwrap_or(""))?;
            let mut parts = l.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) if !a.is_empty() && !b.trim().is_empty() => {
                    Ok((line, a.to_string(), b.trim().to_string()))
                }
                _ => Err(LexiconError::Malformed {
                    file,
                    line,
                    reason: "expected two tab-separated fields".into(),
                }),
            }
        })
        .collect()
}

impl LexiconBundle {
    /// The default lexicons shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(LexiconSources::BUNDLED, LexiconOptions::default()).expect("bundled lexicons are valid")
    }

    pub fn from_dir(dir: impl AsRef<Path>, options: LexiconOptions) -> Result<Self, LexiconError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| LexiconError::Io { path, source })
        };
        let (pos, lemmas, compounds) = (read(POS_FILE)?, read(LEMMA_FILE)?, read(COMPOUND_FILE)?);
        let (synonyms, disallowed, hedges) = (read(SYNONYM_FILE)?, read(DISALLOWED_FILE)?, read(HEDGE_FILE)?);
        Self::parse(
            LexiconSources {
                pos: &pos,
                lemmas: &lemmas,
                compounds: &compounds,
                synonyms: &synonyms,
                disallowed: &disallowed,
                hedges: &hedges,
            },
            options,
        )
    }

    /// Writes the bundled lexicon files into `dir`, creating it if needed.
    pub fn write_bundled(dir: impl AsRef<Path>) -> io::Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let src = LexiconSources::BUNDLED;
        for (name, text) in [
            (POS_FILE, src.pos),
            (LEMMA_FILE, src.lemmas),
            (COMPOUND_FILE, src.compounds),
            (SYNONYM_FILE, src.synonyms),
            (DISALLOWED_FILE, src.disallowed),
            (HEDGE_FILE, src.hedges),
        ] {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }

    pub fn parse(src: LexiconSources<'_>, options: LexiconOptions) -> Result<Self, LexiconError> {
        let mut pos = HashMap::new();
        for (line, word, tag) in parse_pairs(POS_FILE, src.pos)? {
            let tag = tag.parse::<PosTag>().map_err(|reason| LexiconError::Malformed {
                file: POS_FILE,
                line,
                reason,
            })?;
            pos.insert(word, tag);
        }

        let mut lemmas = HashMap::new();
        for (line, form, lemma) in parse_pairs(LEMMA_FILE, src.lemmas)? {
            check_lowercase(LEMMA_FILE, line, &lemma)?;
            lemmas.insert(form, lemma);
        }

        let mut compounds = Vec::new();
        let mut compound_set = HashSet::new();
        for (line, l) in entries(src.compounds) {
            check_lowercase(COMPOUND_FILE, line, l)?;
            let words: Vec<String> = l.split_whitespace().map(str::to_string).collect();
            if words.len() < 2 {
                return Err(LexiconError::Malformed {
                    file: COMPOUND_FILE,
                    line,
                    reason: format!("compound {l:?} has fewer than two words"),
                });
            }
            if compound_set.insert(words.join(" ")) {
                compounds.push(words);
            }
        }
        compounds.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

        let mut synonym_groups = Vec::new();
        let mut heads = HashMap::new();
        for (line, l) in entries(src.synonyms) {
            check_lowercase(SYNONYM_FILE, line, l)?;
            let group: Vec<String> = l.split_whitespace().map(str::to_string).collect();
            let head = group[0].clone();
            for word in &group {
                if heads.insert(word.clone(), head.clone()).is_some() {
                    return Err(LexiconError::Malformed {
                        file: SYNONYM_FILE,
                        line,
                        reason: format!("{word:?} appears in more than one synonym group"),
                    });
                }
            }
            synonym_groups.push(group);
        }

        let mut disallowed = BTreeSet::new();
        for (line, l) in entries(src.disallowed) {
            check_lowercase(DISALLOWED_FILE, line, l)?;
            disallowed.insert(l.to_string());
        }
        if let Some(expected) = options.disallowed_size {
            if disallowed.len() != expected {
                return Err(LexiconError::Invalid(format!(
                    "expected {expected} disallowed words, found {}",
                    disallowed.len()
                )));
            }
        }
        if let Some(group) = synonym_groups.iter().find(|g| disallowed.contains(&g[0])) {
            return Err(LexiconError::Invalid(format!(
                "synonym head {:?} is a disallowed word",
                group[0]
            )));
        }

        let mut hedges = Vec::new();
        for (line, l) in entries(src.hedges) {
            check_lowercase(HEDGE_FILE, line, l)?;
            let tokens = tokenize(l);
            if tokens.is_empty() {
                return Err(LexiconError::Malformed {
                    file: HEDGE_FILE,
                    line,
                    reason: "hedge phrase has no words".into(),
                });
            }
            hedges.push(tokens);
        }
        hedges.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        hedges.dedup();

        Ok(Self {
            pos,
            lemmas,
            compounds,
            compound_set,
            synonym_groups,
            heads,
            disallowed,
            hedges,
        })
    }

    pub fn pos_tag(&self, word: &str) -> Option<PosTag> {
        self.pos.get(word).copied()
    }

    pub fn lemma_entry(&self, word: &str) -> Option<&str> {
        self.lemmas.get(word).map(String::as_str)
    }

    pub fn compounds(&self) -> &[Vec<String>] {
        &self.compounds
    }

    pub fn is_compound(&self, phrase: &str) -> bool {
        self.compound_set.contains(phrase)
    }

    pub fn max_compound_len(&self) -> usize {
        self.compounds.first().map_or(0, Vec::len)
    }

    pub fn synonym_groups(&self) -> &[Vec<String>] {
        &self.synonym_groups
    }

    pub fn synonym_head(&self, word: &str) -> Option<&str> {
        self.heads.get(word).map(String::as_str)
    }

    pub fn disallowed(&self) -> &BTreeSet<String> {
        &self.disallowed
    }

    pub fn is_disallowed(&self, word: &str) -> bool {
        self.disallowed.contains(word)
    }

    pub fn hedges(&self) -> &[Vec<String>] {
        &self.hedges
    }
}
