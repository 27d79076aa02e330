// SPDX-License-Identifier: Apache-2.0

//! Token histograms, Shannon entropy in bits, per-image scores and the
//! entropy-plane regions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CellKey;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmbiguityError {
    #[error("histogram for {0} has no tokens")]
    EmptyHistogram(CellKey),
    #[error("image {image_id} has no entropy for {duration_ms} ms")]
    MissingEntropy { image_id: String, duration_ms: u32 },
    #[error("no histograms supplied for image {0}")]
    NoCells(String),
}

/// Token counts for one (image, duration) cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenHistogram {
    pub cell: CellKey,
    counts: BTreeMap<String, u64>,
    total: u64,
    n_descriptions: usize,
}

impl TokenHistogram {
    pub fn empty(cell: CellKey) -> Self {
        Self {
            cell,
            counts: BTreeMap::new(),
            total: 0,
            n_descriptions: 0,
        }
    }

    /// Histogram directly from counts. Zero counts are dropped.
    pub fn from_counts<I, S>(cell: CellKey, counts: I, n_descriptions: usize) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut hist = Self::empty(cell);
        for (token, count) in counts {
            hist.add(token.into(), count);
        }
        hist.n_descriptions = n_descriptions;
        hist
    }

    fn add(&mut self, token: String, count: u64) {
        if count > 0 {
            *self.counts.entry(token).or_insert(0) += count;
            self.total += count;
        }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn n_descriptions(&self) -> usize {
        self.n_descriptions
    }

    pub fn probability<F: Scalar>(&self, token: &str) -> F {
        if self.total == 0 {
            return F::zero();
        }
        F::from_count(self.count(token)) / F::from_count(self.total)
    }
}

/// Multiset union of per-description token lists. Empty lists still count
/// as descriptions.
pub fn build_histogram<I, L, S>(cell: CellKey, token_lists: I) -> TokenHistogram
where
    I: IntoIterator<Item = L>,
    L: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut hist = TokenHistogram::empty(cell);
    for list in token_lists {
        hist.n_descriptions += 1;
        for token in list {
            hist.add(token.into(), 1);
        }
    }
    hist
}

/// Shannon entropy of the full histogram, in bits.
///
/// Evaluated as `log2(N) - (1/N) * Σ c·log2(c)`, which is exact for
/// histograms of singletons.
pub fn entropy<F: Scalar>(hist: &TokenHistogram) -> Result<F, AmbiguityError> {
    if hist.total == 0 {
        return Err(AmbiguityError::EmptyHistogram(hist.cell.clone()));
    }
    let total = F::from_count(hist.total);
    let weighted = hist
        .counts
        .values()
        .filter(|&&c| c > 1)
        .map(|&c| {
            let c = F::from_count(c);
            c * c.log2()
        })
        .fold(F::zero(), |acc, x| acc + x);
    let h = total.log2() - weighted / total;
    // rounding can leave a single-outcome histogram at -0.0 or -1e-16
    Ok(h.max(F::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    /// Short reference duration (the early-glance condition).
    pub short_ms: u32,
    /// Long reference duration.
    pub long_ms: u32,
    pub min_responses: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            short_ms: 500,
            long_ms: 3000,
            min_responses: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityScore<F> {
    pub image_id: String,
    pub short_ms: u32,
    pub long_ms: u32,
    pub h_by_duration: BTreeMap<u32, F>,
    /// Long-duration entropy minus short-duration entropy.
    pub delta_h: Option<F>,
    pub n_by_duration: BTreeMap<u32, usize>,
    pub low_confidence: bool,
}

impl<F: Scalar> AmbiguityScore<F> {
    /// Score from known reference entropies; handy for tests and reports
    /// built from exported tables.
    pub fn from_reference(
        image_id: impl Into<String>,
        config: &ScoreConfig,
        h_short: Option<F>,
        h_long: Option<F>,
    ) -> Self {
        let mut h_by_duration = BTreeMap::new();
        if let Some(h) = h_short {
            h_by_duration.insert(config.short_ms, h);
        }
        if let Some(h) = h_long {
            h_by_duration.insert(config.long_ms, h);
        }
        Self {
            image_id: image_id.into(),
            short_ms: config.short_ms,
            long_ms: config.long_ms,
            delta_h: h_short.zip(h_long).map(|(s, l)| l - s),
            h_by_duration,
            n_by_duration: BTreeMap::new(),
            low_confidence: false,
        }
    }

    pub fn h_short(&self) -> Option<F> {
        self.h_by_duration.get(&self.short_ms).copied()
    }

    pub fn h_long(&self) -> Option<F> {
        self.h_by_duration.get(&self.long_ms).copied()
    }

    pub fn n_short(&self) -> usize {
        self.n_by_duration.get(&self.short_ms).copied().unwrap_or(0)
    }

    pub fn n_long(&self) -> usize {
        self.n_by_duration.get(&self.long_ms).copied().unwrap_or(0)
    }
}

/// Entropy per duration for one image. Empty histograms are left out of
/// `h_by_duration` rather than failing the whole image.
pub fn score_image<F: Scalar>(
    image_id: &str,
    cells: &BTreeMap<u32, TokenHistogram>,
    config: &ScoreConfig,
) -> Result<AmbiguityScore<F>, AmbiguityError> {
    if cells.is_empty() {
        return Err(AmbiguityError::NoCells(image_id.to_string()));
    }
    let mut h_by_duration = BTreeMap::new();
    let mut n_by_duration = BTreeMap::new();
    for (&duration, hist) in cells {
        n_by_duration.insert(duration, hist.n_descriptions());
        match entropy::<F>(hist) {
            Ok(h) => {
                h_by_duration.insert(duration, h);
            }
            Err(err) => log::debug!("{err}; leaving entropy unset"),
        }
    }
    let h_short = h_by_duration.get(&config.short_ms).copied();
    let h_long = h_by_duration.get(&config.long_ms).copied();
    let low_confidence = [config.short_ms, config.long_ms]
        .iter()
        .any(|d| n_by_duration.get(d).copied().unwrap_or(0) < config.min_responses);
    Ok(AmbiguityScore {
        image_id: image_id.to_string(),
        short_ms: config.short_ms,
        long_ms: config.long_ms,
        delta_h: h_short.zip(h_long).map(|(s, l)| l - s),
        h_by_duration,
        n_by_duration,
        low_confidence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Recognizable,
    DichotomousRegion,
    IndeterminateRegion,
    Unclassified,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::Recognizable,
        Region::DichotomousRegion,
        Region::IndeterminateRegion,
        Region::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Recognizable => "Recognizable",
            Region::DichotomousRegion => "DichotomousRegion",
            Region::IndeterminateRegion => "IndeterminateRegion",
            Region::Unclassified => "Unclassified",
        }
    }

    /// Whether the pair `(h_short, h_long)` lies in this region.
    pub fn contains<F: Scalar>(self, h_short: F, h_long: F, t: &Thresholds<F>) -> bool {
        let early_low = h_short < t.h_short;
        let early_high = h_short >= t.h_short;
        let late_low = h_long < t.h_long;
        let late_high = h_long >= t.h_long;
        match self {
            Region::Recognizable => early_low && late_low,
            Region::DichotomousRegion => early_low && late_high,
            Region::IndeterminateRegion => early_high && late_high,
            Region::Unclassified => early_high && late_low,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown region {s:?}"))
    }
}

/// Split points of the entropy plane: one bound on the short-duration axis
/// and one on the long-duration axis. Values at a bound count as high.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds<F> {
    pub h_short: F,
    pub h_long: F,
}

impl<F: Scalar> Default for Thresholds<F> {
    fn default() -> Self {
        Self {
            h_short: F::lit(4.0),
            h_long: F::lit(4.0),
        }
    }
}

impl<F: Scalar> FromStr for Thresholds<F> {
    type Err = String;

    /// Parses `h05=4,h3=4`; either key may be omitted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut t = Self::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| format!("bad threshold {value:?}: {e}"))?;
            match key.trim() {
                "h05" | "short" => t.h_short = F::lit(value),
                "h3" | "long" => t.h_long = F::lit(value),
                other => return Err(format!("unknown threshold {other:?}")),
            }
        }
        Ok(t)
    }
}

pub fn classify_pair<F: Scalar>(h_short: F, h_long: F, thresholds: &Thresholds<F>) -> Region {
    Region::ALL
        .into_iter()
        .find(|r| r.contains(h_short, h_long, thresholds))
        .unwrap_or(Region::Unclassified)
}

pub fn classify<F: Scalar>(score: &AmbiguityScore<F>, thresholds: &Thresholds<F>) -> Result<Region, AmbiguityError> {
    let missing = |duration_ms| AmbiguityError::MissingEntropy {
        image_id: score.image_id.clone(),
        duration_ms,
    };
    let h_short = score.h_short().ok_or_else(|| missing(score.short_ms))?;
    let h_long = score.h_long().ok_or_else(|| missing(score.long_ms))?;
    Ok(classify_pair(h_short, h_long, thresholds))
}

/// Histogram as drawn: repeated tokens get their own bar, tokens seen once
/// are pooled into `other_count`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayHistogram {
    pub bins: Vec<(String, u64)>,
    pub other_count: u64,
}

impl DisplayHistogram {
    pub const OTHER_LABEL: &'static str = "[other]";

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|(_, c)| c).sum::<u64>() + self.other_count
    }
}

pub fn display_histogram(hist: &TokenHistogram) -> DisplayHistogram {
    let mut bins: Vec<(String, u64)> = hist
        .counts
        .iter()
        .filter(|(_, &c)| c >= 2)
        .map(|(t, &c)| (t.clone(), c))
        .collect();
    bins.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let other_count = hist.counts.values().filter(|&&c| c == 1).count() as u64;
    DisplayHistogram { bins, other_count }
}
