// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::ambiguity::AmbiguityScore;
use crate::corpus::{Category, StimulusSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// Entropy at the long reference duration.
    LongEntropy,
    /// Entropy at the short reference duration.
    ShortEntropy,
    /// Long minus short entropy.
    Delta,
}

impl Metric {
    pub fn value<F: Scalar>(self, score: &AmbiguityScore<F>) -> Option<F> {
        match self {
            Metric::LongEntropy => score.h_long(),
            Metric::ShortEntropy => score.h_short(),
            Metric::Delta => score.delta_h,
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "h3" | "long" => Ok(Metric::LongEntropy),
            "h05" | "short" => Ok(Metric::ShortEntropy),
            "delta" => Ok(Metric::Delta),
            _ => Err(format!("unknown metric {s:?} (expected h3, h05 or delta)")),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::LongEntropy => "h3",
            Metric::ShortEntropy => "h05",
            Metric::Delta => "delta",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Lowest,
    Highest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList<F> {
    pub metric: Metric,
    pub direction: Direction,
    pub entries: Vec<(String, F)>,
    /// Images that lacked the metric.
    pub skipped: Vec<String>,
    pub partition_note: Option<String>,
}

impl<F: Scalar> RankedList<F> {
    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|(id, _)| id.as_str()).collect()
    }

    pub fn values(&self) -> Vec<F> {
        self.entries.iter().map(|&(_, v)| v).collect()
    }
}

fn order<F: Scalar>(direction: Direction) -> impl Fn(&(String, F), &(String, F)) -> Ordering {
    move |a, b| {
        let by_value = a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal);
        let by_value = match direction {
            Direction::Lowest => by_value,
            Direction::Highest => by_value.reverse(),
        };
        by_value.then_with(|| a.0.cmp(&b.0))
    }
}

fn rank_iter<'a, F, I>(scores: I, metric: Metric, direction: Direction, k: usize) -> Result<RankedList<F>, ReportError>
where
    F: Scalar,
    I: IntoIterator<Item = &'a AmbiguityScore<F>>,
{
    if k == 0 {
        return Err(ReportError::InvalidK);
    }
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for score in scores {
        match metric.value(score) {
            Some(v) if !v.is_nan() => entries.push((score.image_id.clone(), v)),
            _ => skipped.push(score.image_id.clone()),
        }
    }
    if entries.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    entries.sort_by(order(direction));
    entries.truncate(k);
    skipped.sort();
    Ok(RankedList {
        metric,
        direction,
        entries,
        skipped,
        partition_note: None,
    })
}

/// The `k` images with the lowest or highest value of `metric`. Ties are
/// broken by ascending image id, so the result does not depend on input
/// order.
pub fn rank<F: Scalar>(
    scores: &[AmbiguityScore<F>],
    metric: Metric,
    direction: Direction,
    k: usize,
) -> Result<RankedList<F>, ReportError> {
    rank_iter(scores, metric, direction, k)
}

/// Which side of the long-duration entropy threshold to keep. `Above` is
/// strict; a value equal to the threshold belongs to `Below`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn admits<F: Scalar>(self, h_long: F, threshold: F) -> bool {
        match self {
            Side::Above => h_long > threshold,
            Side::Below => h_long <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRanking<F> {
    pub lowest: RankedList<F>,
    pub highest: RankedList<F>,
}

/// Both ends of the delta ranking among images on one side of a
/// long-duration entropy threshold.
pub fn rank_by_delta_partition<F: Scalar>(
    scores: &[AmbiguityScore<F>],
    threshold: F,
    side: Side,
    k: usize,
) -> Result<DeltaRanking<F>, ReportError> {
    let admitted: Vec<&AmbiguityScore<F>> = scores
        .iter()
        .filter(|s| s.h_long().is_some_and(|h| side.admits(h, threshold)))
        .collect();
    let note = match side {
        Side::Above => format!("h3 > {threshold}"),
        Side::Below => format!("h3 <= {threshold}"),
    };
    let mut lowest = rank_iter(admitted.iter().copied(), Metric::Delta, Direction::Lowest, k)?;
    let mut highest = rank_iter(admitted.iter().copied(), Metric::Delta, Direction::Highest, k)?;
    lowest.partition_note = Some(note.clone());
    highest.partition_note = Some(note);
    Ok(DeltaRanking { lowest, highest })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint<F> {
    pub image_id: String,
    pub h_short: F,
    pub h_long: F,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scatter<F> {
    pub points: Vec<ScatterPoint<F>>,
    /// Images left out, with the reason.
    pub skipped: Vec<(String, &'static str)>,
}

pub fn scatter_points<F: Scalar>(scores: &[AmbiguityScore<F>], stimuli: &StimulusSet) -> Scatter<F> {
    let mut scatter = Scatter {
        points: Vec::new(),
        skipped: Vec::new(),
    };
    for score in scores {
        let id = score.image_id.clone();
        match (score.h_short(), score.h_long(), stimuli.get(&score.image_id)) {
            (None, _, _) => scatter.skipped.push((id, "missing short-duration entropy")),
            (_, None, _) => scatter.skipped.push((id, "missing long-duration entropy")),
            (_, _, None) => scatter.skipped.push((id, "not in stimulus set")),
            (Some(h_short), Some(h_long), Some(stimulus)) => scatter.points.push(ScatterPoint {
                image_id: id,
                h_short,
                h_long,
                category: stimulus.category,
            }),
        }
    }
    scatter
}
