// SPDX-License-Identifier: Apache-2.0

//! Rankings, entropy-plane scatter points, charts and rating correlation.

mod correlate;
mod rank;
pub mod svg;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use correlate::{correlate, load_ratings, parse_ratings, pearson, RatingDimension, RatingRecord, RatingScale};
pub use rank::{
    rank, rank_by_delta_partition, scatter_points, DeltaRanking, Direction, Metric, RankedList, Scatter, ScatterPoint,
    Side,
};
pub use svg::{histogram_svg, render_histogram, render_scatter, scatter_svg};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no scores to rank")]
    EmptyInput,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("need at least {needed} images with entropy and ratings, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed record on line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
}
