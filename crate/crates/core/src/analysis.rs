// SPDX-License-Identifier: Apache-2.0

//! End-to-end scoring of a corpus and the scores table format.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::ambiguity::{
    build_histogram, classify, score_image, AmbiguityScore, Region, ScoreConfig, Thresholds, TokenHistogram,
};
use crate::corpus::{filter_by_vigilance, group_by_cell, Category, CellKey, CorpusError, ResponseSet, StimulusSet};
use crate::scalar::Scalar;
use crate::textpipe::TextPipeline;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("scores table: {0}")]
    Csv(#[from] csv::Error),
    #[error("scores table: {0}")]
    Table(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions<F> {
    pub vigilance_filter: bool,
    pub score: ScoreConfig,
    pub thresholds: Thresholds<F>,
}

impl<F: Scalar> Default for AnalysisOptions<F> {
    fn default() -> Self {
        Self {
            vigilance_filter: true,
            score: ScoreConfig::default(),
            thresholds: Thresholds::default(),
        }
    }
}

/// One row of the scores table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow<F> {
    pub score: AmbiguityScore<F>,
    pub category: Option<Category>,
    pub region: Option<Region>,
}

#[derive(Debug, Clone)]
pub struct Analysis<F> {
    pub histograms: BTreeMap<CellKey, TokenHistogram>,
    pub hedge_count: usize,
    pub rows: Vec<ScoreRow<F>>,
}

impl<F: Scalar> Analysis<F> {
    pub fn scores(&self) -> Vec<AmbiguityScore<F>> {
        self.rows.iter().map(|r| r.score.clone()).collect()
    }

    pub fn histogram(&self, image_id: &str, duration_ms: u32) -> Option<&TokenHistogram> {
        self.histograms.get(&CellKey::new(image_id, duration_ms))
    }
}

/// Histograms for every populated cell.
pub fn cell_histograms(
    responses: &ResponseSet,
    stimuli: &StimulusSet,
    pipeline: &TextPipeline,
    vigilance_filter: bool,
) -> Result<(BTreeMap<CellKey, TokenHistogram>, usize), CorpusError> {
    let filtered;
    let responses = if vigilance_filter {
        filtered = filter_by_vigilance(responses);
        &filtered
    } else {
        responses
    };
    let mut hedges = 0;
    let histograms = group_by_cell(responses, stimuli)?
        .into_iter()
        .map(|(cell, texts)| {
            let lists: Vec<Vec<String>> = texts
                .iter()
                .map(|t| {
                    let p = pipeline.process(t);
                    hedges += p.hedge_count;
                    p.tokens
                })
                .collect();
            (cell.clone(), build_histogram(cell, lists))
        })
        .collect();
    Ok((histograms, hedges))
}

pub fn analyze<F: Scalar>(
    responses: &ResponseSet,
    stimuli: &StimulusSet,
    pipeline: &TextPipeline,
    options: &AnalysisOptions<F>,
) -> Result<Analysis<F>, AnalysisError> {
    let (histograms, hedge_count) = cell_histograms(responses, stimuli, pipeline, options.vigilance_filter)?;

    let mut by_image: BTreeMap<&str, BTreeMap<u32, TokenHistogram>> = BTreeMap::new();
    for (cell, hist) in &histograms {
        by_image
            .entry(cell.image_id.as_str())
            .or_default()
            .insert(cell.duration_ms, hist.clone());
    }

    let rows = by_image
        .into_iter()
        .map(|(image_id, cells)| {
            let score = score_image::<F>(image_id, &cells, &options.score).expect("non-empty cells");
            ScoreRow {
                region: classify(&score, &options.thresholds).ok(),
                category: stimuli.get(image_id).map(|s| s.category),
                score,
            }
        })
        .collect();

    Ok(Analysis {
        histograms,
        hedge_count,
        rows,
    })
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the scores table. Entropy columns are named after the reference
/// durations (`h_500`, `h_3000`, `n_500`, `n_3000` by default).
pub fn write_scores<F: Scalar, W: Write>(
    out: W,
    rows: &[ScoreRow<F>],
    config: &ScoreConfig,
) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "image_id".to_string(),
        "category".to_string(),
        format!("h_{}", config.short_ms),
        format!("h_{}", config.long_ms),
        "delta_h".to_string(),
        format!("n_{}", config.short_ms),
        format!("n_{}", config.long_ms),
        "region".to_string(),
        "low_confidence".to_string(),
    ])?;
    for row in rows {
        let s = &row.score;
        w.write_record([
            s.image_id.clone(),
            fmt_opt(row.category),
            fmt_opt(s.h_short()),
            fmt_opt(s.h_long()),
            fmt_opt(s.delta_h),
            s.n_short().to_string(),
            s.n_long().to_string(),
            fmt_opt(row.region),
            s.low_confidence.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_scores_file<F: Scalar>(
    path: impl AsRef<Path>,
    rows: &[ScoreRow<F>],
    config: &ScoreConfig,
) -> Result<(), AnalysisError> {
    let file = std::fs::File::create(path.as_ref()).map_err(csv::Error::from)?;
    write_scores(file, rows, config)
}

fn duration_from_header(header: &str, prefix: &str) -> Result<u32, AnalysisError> {
    header
        .strip_prefix(prefix)
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| AnalysisError::Table(format!("unexpected column {header:?}")))
}

pub fn read_scores<F: Scalar, R: Read>(input: R, min_responses: usize) -> Result<Vec<ScoreRow<F>>, AnalysisError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 9 || &headers[0] != "image_id" || &headers[1] != "category" {
        return Err(AnalysisError::Table("unexpected header".into()));
    }
    let config = ScoreConfig {
        short_ms: duration_from_header(&headers[2], "h_")?,
        long_ms: duration_from_header(&headers[3], "h_")?,
        min_responses,
    };

    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| AnalysisError::Table(format!("row {}: bad {what}", i + 1));
        let float = |idx: usize, what: &str| -> Result<Option<F>, AnalysisError> {
            match &record[idx] {
                "" => Ok(None),
                v => v.parse::<f64>().map(|v| Some(F::lit(v))).map_err(|_| bad(what)),
            }
        };
        let h_short = float(2, "short entropy")?;
        let h_long = float(3, "long entropy")?;
        let mut score = AmbiguityScore::from_reference(&record[0], &config, h_short, h_long);
        score.delta_h = float(4, "delta_h")?;
        for (idx, duration) in [(5, config.short_ms), (6, config.long_ms)] {
            let n: usize = record[idx].parse().map_err(|_| bad("count"))?;
            score.n_by_duration.insert(duration, n);
        }
        score.low_confidence = record[8].parse().map_err(|_| bad("low_confidence"))?;
        rows.push(ScoreRow {
            category: match &record[1] {
                "" => None,
                c => Some(c.parse().map_err(|_| bad("category"))?),
            },
            region: match &record[7] {
                "" => None,
                c => Some(c.parse().map_err(|_| bad("region"))?),
            },
            score,
        });
    }
    Ok(rows)
}

pub fn read_scores_file<F: Scalar>(
    path: impl AsRef<Path>,
    min_responses: usize,
) -> Result<Vec<ScoreRow<F>>, AnalysisError> {
    let file = std::fs::File::open(path.as_ref()).map_err(csv::Error::from)?;
    read_scores(file, min_responses)
}
