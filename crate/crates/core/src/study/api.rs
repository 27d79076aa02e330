// SPDX-License-Identifier: Apache-2.0

//! Structured request/response messages for the collection service.
//!
//! Field names here are the wire format; `docs/API.md` documents them.

use serde::{Deserialize, Serialize};

use super::service::StudyService;
use super::session::{Ack, NextTrial, TrialPayload};
use super::StudyError;
use crate::corpus::{Category, ResponseRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Request {
    CreateSession {
        participant_id: String,
    },
    NextTrial {
        session_id: String,
    },
    SubmitTrial {
        session_id: String,
        trial_index: usize,
        payload: TrialPayload,
    },
    Export,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub participant_id: String,
    pub category: Category,
    pub duration_ms: u32,
    pub trial_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exported {
    pub count: usize,
    pub records: Vec<ResponseRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl From<&StudyError> for ErrorBody {
    fn from(err: &StudyError) -> Self {
        Self {
            error: err.code().to_string(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Response {
    SessionCreated(SessionCreated),
    NextTrial(NextTrial),
    Ack(Ack),
    Exported(Exported),
    Error(ErrorBody),
}

pub fn create_session(service: &mut StudyService, participant_id: &str) -> Result<SessionCreated, StudyError> {
    let s = service.create_session(participant_id)?;
    Ok(SessionCreated {
        trial_count: s.trial_plan.len(),
        session_id: s.session_id,
        participant_id: s.participant_id,
        category: s.category,
        duration_ms: s.duration_ms,
    })
}

pub fn export(service: &StudyService) -> Exported {
    let records = service.export_records();
    Exported {
        count: records.len(),
        records,
    }
}

/// Runs one request against the service.
pub fn handle(service: &mut StudyService, request: Request) -> Result<Response, StudyError> {
    Ok(match request {
        Request::CreateSession { participant_id } => {
            Response::SessionCreated(create_session(service, &participant_id)?)
        }
        Request::NextTrial { session_id } => Response::NextTrial(service.next_trial(&session_id)?),
        Request::SubmitTrial {
            session_id,
            trial_index,
            payload,
        } => Response::Ack(service.submit_trial(&session_id, trial_index, payload)?),
        Request::Export => Response::Exported(export(service)),
    })
}

/// Like [`handle`], folding errors into [`Response::Error`].
pub fn handle_or_error(service: &mut StudyService, request: Request) -> Response {
    handle(service, request).unwrap_or_else(|e| Response::Error(ErrorBody::from(&e)))
}
