// SPDX-License-Identifier: Apache-2.0

//! Timed-description collection protocol.
//!
//! Participants are assigned a (category, duration) condition, shown a
//! fixed plan of image trials with vigilance probes mixed in, and submit one
//! response per trial in order. Every state change is an event appended to
//! a line-delimited log; the in-memory state is a fold over that log.

pub mod api;
mod clock;
mod log;
mod service;
mod session;

use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Category, CorpusError};

pub use self::clock::{Clock, StepClock, SystemClock};
pub use self::log::{replay_log, Event, EventLog, Replay};
pub use self::service::{ServiceState, StudyService};
pub use self::session::{
    Ack, Condition, GridCell, NextTrial, Session, SessionStatus, Submission, TrialPayload, TrialSpec,
};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("session {0:?} is not active")]
    SessionNotActive(String),
    #[error("trial {got} submitted out of order, expected {expected}")]
    OutOfOrderSubmission { expected: usize, got: usize },
    #[error("trial {0} was already submitted")]
    DuplicateSubmission(usize),
    #[error("payload does not match the kind of trial {0}")]
    PayloadMismatch(usize),
    #[error("category {category} has {available} images, sessions need {needed}")]
    CategoryExhausted {
        category: Category,
        available: usize,
        needed: usize,
    },
    #[error("every condition has reached its participant target")]
    StudyFull,
    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
    #[error("corrupt event log at byte offset {offset}: {reason}")]
    CorruptLog { offset: u64, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl StudyError {
    /// Stable machine-readable error code used by the message API.
    pub fn code(&self) -> &'static str {
        match self {
            StudyError::UnknownSession(_) => "unknown_session",
            StudyError::SessionNotActive(_) => "session_not_active",
            StudyError::OutOfOrderSubmission { .. } => "out_of_order_submission",
            StudyError::DuplicateSubmission(_) => "duplicate_submission",
            StudyError::PayloadMismatch(_) => "payload_mismatch",
            StudyError::CategoryExhausted { .. } => "category_exhausted",
            StudyError::StudyFull => "study_full",
            StudyError::InvalidConfig(_) => "invalid_config",
            StudyError::CorruptLog { .. } => "corrupt_log",
            StudyError::Io { .. } | StudyError::Corpus(_) => "io_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub durations_ms: Vec<u32>,
    pub images_per_session: usize,
    pub categories: Vec<Category>,
    pub vigilance_probe_count: usize,
    pub vigilance_pass_min: usize,
    pub target_participants_per_condition: usize,
    pub rng_seed: Option<u64>,
    /// Vigilance grid dimensions.
    pub grid_rows: u8,
    pub grid_cols: u8,
    /// Relative deviation of measured from nominal exposure above which a
    /// trial is flagged.
    pub exposure_tolerance: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            durations_ms: vec![500, 3000],
            images_per_session: 30,
            categories: Category::ALL.to_vec(),
            vigilance_probe_count: 3,
            vigilance_pass_min: 2,
            target_participants_per_condition: 70,
            rng_seed: None,
            grid_rows: 3,
            grid_cols: 3,
            exposure_tolerance: 0.10,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        let fail = |m: &str| Err(StudyError::InvalidConfig(m.to_string()));
        if self.durations_ms.is_empty() || self.durations_ms.contains(&0) {
            return fail("durations must be non-empty and positive");
        }
        if self.categories.is_empty() {
            return fail("at least one category is required");
        }
        if self.images_per_session == 0 {
            return fail("images_per_session must be positive");
        }
        if self.vigilance_pass_min > self.vigilance_probe_count {
            return fail("vigilance_pass_min exceeds vigilance_probe_count");
        }
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return fail("vigilance grid must have at least one cell");
        }
        if self.exposure_tolerance.is_nan() || self.exposure_tolerance < 0.0 {
            return fail("exposure_tolerance must be non-negative");
        }
        Ok(())
    }

    /// All (category, duration) cells, category-major.
    pub fn conditions(&self) -> Vec<Condition> {
        self.categories
            .iter()
            .flat_map(|&category| {
                self.durations_ms
                    .iter()
                    .map(move |&duration_ms| Condition { category, duration_ms })
            })
            .collect()
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, StudyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| StudyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: Self = serde_json::from_str(&text).map_err(|e| StudyError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}
