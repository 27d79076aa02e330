// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::ambiguity::AmbiguityScore;
use crate::scalar::Scalar;

pub const MIN_CORRELATION_IMAGES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingDimension {
    Interestingness,
    Powerfulness,
    Engagement,
}

impl FromStr for RatingDimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interestingness" => Ok(Self::Interestingness),
            "powerfulness" => Ok(Self::Powerfulness),
            "engagement" => Ok(Self::Engagement),
            _ => Err(format!("unknown rating dimension {s:?}")),
        }
    }
}

impl fmt::Display for RatingDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Interestingness => "interestingness",
            Self::Powerfulness => "powerfulness",
            Self::Engagement => "engagement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub participant_id: String,
    pub image_id: String,
    pub dimension: RatingDimension,
    pub score: i32,
}

/// Inclusive bounds of the rating scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: i32,
    pub max: i32,
}

impl Default for RatingScale {
    fn default() -> Self {
        Self { min: 1, max: 7 }
    }
}

impl RatingScale {
    pub fn contains(&self, score: i32) -> bool {
        (self.min..=self.max).contains(&score)
    }
}

pub fn parse_ratings<R: Read>(reader: R, scale: RatingScale) -> Result<Vec<RatingRecord>, ReportError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| ReportError::Io {
            path: "<ratings>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| ReportError::MalformedRecord { line: i + 1, reason };
        let record: RatingRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if !scale.contains(record.score) {
            return Err(malformed(format!(
                "score {} outside {}..={}",
                record.score, scale.min, scale.max
            )));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn load_ratings(path: impl AsRef<Path>, scale: RatingScale) -> Result<Vec<RatingRecord>, ReportError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => ReportError::FileNotFound(path.to_path_buf()),
        _ => ReportError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    parse_ratings(file, scale)
}

/// Pearson correlation coefficient, mean-centred two-pass evaluation.
pub fn pearson<F: Scalar>(xs: &[F], ys: &[F]) -> Result<F, ReportError> {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    if xs.len() < 2 {
        return Err(ReportError::InsufficientData {
            needed: 2,
            found: xs.len(),
        });
    }
    let n = F::from_count(xs.len() as u64);
    let mean = |v: &[F]| v.iter().fold(F::zero(), |a, &b| a + b) / n;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == F::zero() {
        return Err(ReportError::ZeroVariance("entropy"));
    }
    if syy == F::zero() {
        return Err(ReportError::ZeroVariance("rating"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-F::one()).min(F::one()))
}

/// Correlation between long-duration entropy and the mean rating of each
/// image in `dimension`.
pub fn correlate<F: Scalar>(
    scores: &[AmbiguityScore<F>],
    ratings: &[RatingRecord],
    dimension: RatingDimension,
) -> Result<F, ReportError> {
    let mut sums: BTreeMap<&str, (i64, u64)> = BTreeMap::new();
    for r in ratings.iter().filter(|r| r.dimension == dimension) {
        let e = sums.entry(r.image_id.as_str()).or_default();
        e.0 += i64::from(r.score);
        e.1 += 1;
    }
    let mut entropy = Vec::new();
    let mut rating = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for score in scores {
        if !seen.insert(score.image_id.as_str()) {
            continue;
        }
        if let (Some(h), Some(&(sum, n))) = (score.h_long(), sums.get(score.image_id.as_str())) {
            entropy.push(h);
            rating.push(F::lit(sum as f64) / F::from_count(n));
        }
    }
    if entropy.len() < MIN_CORRELATION_IMAGES {
        return Err(ReportError::InsufficientData {
            needed: MIN_CORRELATION_IMAGES,
            found: entropy.len(),
        });
    }
    pearson(&entropy, &rating)
}
