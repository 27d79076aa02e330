// SPDX-License-Identifier: Apache-2.0

use super::lexicon::LexiconBundle;
use super::{PosTag, TaggedToken};

/// Removes leading hedge phrases ("i'm not sure but", "no idea", ...).
///
/// Matching repeats until no hedge prefixes the remaining tokens; at each
/// step the longest matching phrase wins. Returns the remaining tokens and
/// the number of phrases removed.
pub fn strip_hedges(tokens: &[String], lexicon: &LexiconBundle) -> (Vec<String>, usize) {
    let mut rest = tokens;
    let mut count = 0;
    while let Some(hedge) = lexicon.hedges().iter().find(|h| rest.starts_with(h)) {
        rest = &rest[hedge.len()..];
        count += 1;
    }
    (rest.to_vec(), count)
}

fn compound_eligible(tag: PosTag) -> bool {
    matches!(tag, PosTag::Noun | PosTag::Adj)
}

/// Keeps nouns, merging runs listed as compounds into single tokens.
///
/// Compounds are matched greedily left to right, longest first, over runs
/// of noun and adjective tokens.
pub fn extract_nouns(tagged: &[TaggedToken], lexicon: &LexiconBundle) -> Vec<String> {
    let max_len = lexicon.max_compound_len();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < tagged.len() {
        let run = tagged[i..]
            .iter()
            .take(max_len)
            .take_while(|t| compound_eligible(t.tag))
            .count();
        for len in (2..=run).rev() {
            let phrase = tagged[i..i + len]
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            if lexicon.is_compound(&phrase) {
                out.push(phrase);
                i += len;
                continue 'outer;
            }
        }
        if tagged[i].tag == PosTag::Noun {
            out.push(tagged[i].surface.clone());
        }
        i += 1;
    }
    out
}

/// Head of the noun's synonym group, or the noun itself.
pub fn canonicalize(noun: &str, lexicon: &LexiconBundle) -> String {
    lexicon.synonym_head(noun).unwrap_or(noun).to_string()
}
