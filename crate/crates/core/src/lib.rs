// SPDX-License-Identifier: Apache-2.0

//! Perceptual ambiguity of images measured from the spread of freeform
//! descriptions people give after fixed viewing durations.
//!
//! Descriptions are reduced to canonical noun tokens ([`textpipe`]),
//! counted per (image, duration) cell ([`ambiguity`]), and summarized by
//! the Shannon entropy of each cell's histogram. [`report`] ranks and plots
//! the resulting scores; [`study`] runs the timed collection protocol that
//! produces the descriptions in the first place.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod ambiguity;
pub mod analysis;
pub mod corpus;
pub mod report;
pub mod scalar;
pub mod study;
pub mod synth;
pub mod textpipe;

pub use scalar::Scalar;

pub type AmbiguityScore = ambiguity::AmbiguityScore<f64>;
pub type Thresholds = ambiguity::Thresholds<f64>;
pub type RankedList = report::RankedList<f64>;
pub type DeltaRanking = report::DeltaRanking<f64>;
pub type ScatterPoint = report::ScatterPoint<f64>;
pub type ScoreRow = analysis::ScoreRow<f64>;
pub type Analysis = analysis::Analysis<f64>;
pub type AnalysisOptions = analysis::AnalysisOptions<f64>;
