// SPDX-License-Identifier: Apache-2.0

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub category: Category,
    pub duration_ms: u32,
}

/// A cell of the vigilance response grid, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub row: u8,
    pub col: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialSpec {
    /// Show `asset_path` for exactly `duration_ms`, then collect a
    /// vigilance click and a description.
    Image {
        image_id: String,
        asset_path: String,
        duration_ms: u32,
    },
    /// Flash a marker in `cell`; the participant must click that cell.
    VigilanceProbe { cell: GridCell, duration_ms: u32 },
}

impl TrialSpec {
    pub fn duration_ms(&self) -> u32 {
        match self {
            TrialSpec::Image { duration_ms, .. } | TrialSpec::VigilanceProbe { duration_ms, .. } => *duration_ms,
        }
    }

    pub fn image_id(&self) -> Option<&str> {
        match self {
            TrialSpec::Image { image_id, .. } => Some(image_id),
            TrialSpec::VigilanceProbe { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialPayload {
    Image {
        description: String,
        #[serde(default)]
        vigilance_cell_clicked: Option<GridCell>,
        /// Exposure the client measured from display timestamps.
        #[serde(default)]
        measured_exposure_ms: Option<f64>,
    },
    VigilanceProbe {
        cell_clicked: GridCell,
    },
}

impl TrialPayload {
    pub fn matches(&self, spec: &TrialSpec) -> bool {
        matches!(
            (self, spec),
            (TrialPayload::Image { .. }, TrialSpec::Image { .. })
                | (TrialPayload::VigilanceProbe { .. }, TrialSpec::VigilanceProbe { .. })
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Complete,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub trial_index: usize,
    pub payload: TrialPayload,
    pub exposure_flagged: bool,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub participant_id: String,
    pub category: Category,
    pub duration_ms: u32,
    pub trial_plan: Vec<TrialSpec>,
    pub cursor: usize,
    pub status: SessionStatus,
    pub vigilance_correct: usize,
    /// Set when the session completes.
    pub vigilance_passed: Option<bool>,
    pub submissions: Vec<Submission>,
    pub created_at: DateTime<Utc>,
}

impl Session {
    pub fn condition(&self) -> Condition {
        Condition {
            category: self.category,
            duration_ms: self.duration_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextTrial {
    Trial { trial_index: usize, trial: TrialSpec },
    SessionComplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub session_id: String,
    pub trial_index: usize,
    pub next_index: usize,
    pub complete: bool,
    pub exposure_flagged: bool,
}
