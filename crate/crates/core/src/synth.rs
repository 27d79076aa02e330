// SPDX-License-Identifier: Apache-2.0

//! Synthetic corpora with known token distributions.
//!
//! Every generated description mentions exactly one target token, dressed
//! up with determiners, adjectives, synonyms, plurals, hedges and
//! disallowed filler, so a correct pipeline recovers the target histogram
//! exactly. Participants who fail vigilance contribute extra noise
//! descriptions that the vigilance filter must remove.

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Category, CellKey, ResponseRecord, ResponseSet, StimulusImage, StimulusSet};
use crate::textpipe::{LexiconBundle, PosTag};

#[derive(Debug, Clone, PartialEq)]
pub struct CellTarget {
    pub duration_ms: u32,
    /// Token and the number of descriptions naming it.
    pub counts: Vec<(String, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageTarget {
    pub id: String,
    pub category: Category,
    pub cells: Vec<CellTarget>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthOptions {
    pub seed: u64,
    /// Noise descriptions per cell from participants who failed vigilance.
    pub failing_per_cell: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            failing_per_cell: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub stimuli: StimulusSet,
    pub responses: ResponseSet,
    pub targets: BTreeMap<CellKey, BTreeMap<String, u64>>,
}

const ADJECTIVES: &[&str] = &[
    "white", "small", "weird", "blue", "dark", "fuzzy", "giant", "strange", "old", "shiny",
];

/// Single-word nouns whose surface form passes through the pipeline
/// unchanged: known nouns, lemma forms, outside every synonym group and
/// compound, not disallowed. Sorted, at most `n`.
pub fn vocabulary(lexicon: &LexiconBundle, n: usize) -> Vec<String> {
    let in_compound: std::collections::HashSet<&str> = lexicon
        .compounds()
        .iter()
        .flat_map(|c| c.iter().map(String::as_str))
        .collect();
    let mut words: Vec<String> = crate::textpipe::LexiconSources::BUNDLED
        .pos
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(w, _)| w.to_string())
        .filter(|w| {
            lexicon.pos_tag(w) == Some(PosTag::Noun)
                && w.chars().all(|c| c.is_ascii_lowercase())
                && !lexicon.is_disallowed(w)
                && lexicon.synonym_head(w).is_none()
                && !in_compound.contains(w.as_str())
                && lexicon.lemmatize(w) == *w
                && lexicon.lemmatize(&format!("{w}s")) == *w
        })
        .collect();
    words.sort();
    words.dedup();
    words.truncate(n);
    words
}

fn surface(token: &str, lexicon: &LexiconBundle, rng: &mut ChaCha8Rng) -> String {
    let synonyms: Vec<&String> = lexicon
        .synonym_groups()
        .iter()
        .find(|g| g[0] == token)
        .map(|g| g.iter().collect())
        .unwrap_or_default();
    let word = match synonyms.choose(rng) {
        Some(w) => (*w).clone(),
        None => token.to_string(),
    };
    let plural = format!("{word}s");
    if !token.contains(' ') && rng.gen_bool(0.2) && lexicon.lemmatize(&plural) == word {
        plural
    } else {
        word
    }
}

fn describe(token: &str, lexicon: &LexiconBundle, rng: &mut ChaCha8Rng) -> String {
    let noun = surface(token, lexicon, rng);
    let adj = ADJECTIVES.choose(rng).expect("non-empty");
    match rng.gen_range(0..7) {
        0 => noun,
        1 => format!("a {adj} {noun}"),
        2 => format!("A {adj}, {adj} {noun}!"),
        3 => format!("an abstract picture of a {noun}"),
        4 => format!("I'm not sure but maybe a {noun}"),
        5 => format!("the {noun} sitting in a dark background"),
        _ => format!("{noun}, {noun}. {adj} {noun}"),
    }
}

/// Builds stimuli and responses realizing `images` exactly.
pub fn generate(images: &[ImageTarget], lexicon: &LexiconBundle, options: SynthOptions) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let start = Utc.with_ymd_and_hms(2021, 2, 1, 12, 0, 0).unwrap();
    let noise = vocabulary(lexicon, 400);

    let stimuli = StimulusSet::new(
        images
            .iter()
            .map(|img| StimulusImage {
                id: img.id.clone(),
                path: format!("stimuli/{}.jpg", img.id),
                category: img.category,
                source_note: Some("synthetic".into()),
            })
            .collect(),
    )
    .expect("image ids are unique");

    let mut records = Vec::new();
    let mut targets = BTreeMap::new();
    let mut next_participant = 0usize;
    let mut push = |records: &mut Vec<ResponseRecord>, image_id: &str, duration_ms: u32, text: String, passed: bool| {
        next_participant += 1;
        records.push(ResponseRecord {
            participant_id: format!("p{next_participant:06}"),
            session_id: format!("synth-{next_participant:06}"),
            image_id: image_id.to_string(),
            duration_ms,
            raw_text: text,
            vigilance_passed: passed,
            timestamp: start + Duration::seconds(next_participant as i64),
        });
    };

    for img in images {
        for cell in &img.cells {
            let mut texts: Vec<(String, bool)> = Vec::new();
            let mut hist = BTreeMap::new();
            for (token, count) in &cell.counts {
                if *count == 0 {
                    continue;
                }
                hist.insert(token.clone(), *count);
                for _ in 0..*count {
                    texts.push((describe(token, lexicon, &mut rng), true));
                }
            }
            for _ in 0..options.failing_per_cell {
                let token = noise.choose(&mut rng).expect("vocabulary is non-empty");
                texts.push((describe(token, lexicon, &mut rng), false));
            }
            texts.shuffle(&mut rng);
            for (text, passed) in texts {
                push(&mut records, &img.id, cell.duration_ms, text, passed);
            }
            targets.insert(CellKey::new(img.id.clone(), cell.duration_ms), hist);
        }
    }

    SyntheticCorpus {
        stimuli,
        responses: ResponseSet::new(records),
        targets,
    }
}

/// Counts for `descriptions` responses spread over the first `support`
/// words of `vocab` with Zipf exponent `skew` (0 = uniform).
pub fn zipf_counts(vocab: &[String], support: usize, skew: f64, descriptions: u64) -> Vec<(String, u64)> {
    let support = support.clamp(1, vocab.len());
    let weights: Vec<f64> = (1..=support).map(|r| (r as f64).powf(-skew)).collect();
    let total: f64 = weights.iter().sum();
    let mut counts: Vec<u64> = weights
        .iter()
        .map(|w| (w / total * descriptions as f64).floor() as u64)
        .collect();
    let mut remaining = descriptions - counts.iter().sum::<u64>();
    for c in counts.iter_mut() {
        if remaining == 0 {
            break;
        }
        *c += 1;
        remaining -= 1;
    }
    vocab[..support]
        .iter()
        .cloned()
        .zip(counts)
        .filter(|&(_, c)| c > 0)
        .collect()
}

/// A 150-image, two-duration demo study: 30 images per category, with
/// distributions that get flatter from recognizable to indeterminate.
pub fn demo_targets(lexicon: &LexiconBundle, seed: u64) -> Vec<ImageTarget> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(lexicon, 400);
    Category::ALL
        .iter()
        .flat_map(|&category| (0..30).map(move |i| (category, i)))
        .map(|(category, i)| {
            let mut words = vocab.clone();
            words.shuffle(&mut rng);
            let (support, skew_short, skew_long) = match category {
                Category::Recognizable => (rng.gen_range(3..8), 2.5, 2.2),
                Category::Dichotomous => (rng.gen_range(15..30), 2.2, 0.6),
                Category::Indeterminate => (rng.gen_range(35..60), 0.6, 0.3),
                Category::Abstract => (rng.gen_range(20..45), 0.9, 0.7),
                Category::AbstractFlat => (rng.gen_range(10..40), 1.4, 1.0),
            };
            let cells = [(500, skew_short), (3000, skew_long)]
                .into_iter()
                .map(|(duration_ms, skew)| CellTarget {
                    duration_ms,
                    counts: zipf_counts(&words, support, skew + rng.gen_range(-0.2..0.2), rng.gen_range(18..24)),
                })
                .collect();
            ImageTarget {
                id: format!("{}-{i:02}", category.as_str().to_lowercase()),
                category,
                cells,
            }
        })
        .collect()
}
