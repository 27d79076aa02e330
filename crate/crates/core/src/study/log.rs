// SPDX-License-Identifier: Apache-2.0

//! Append-only event log, one JSON object per line.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::service::ServiceState;
use super::session::{TrialPayload, TrialSpec};
use super::StudyError;
use crate::corpus::Category;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        participant_id: String,
        category: Category,
        duration_ms: u32,
        trial_plan: Vec<TrialSpec>,
        timestamp: DateTime<Utc>,
    },
    TrialSubmitted {
        session_id: String,
        trial_index: usize,
        payload: TrialPayload,
        exposure_flagged: bool,
        timestamp: DateTime<Utc>,
    },
    SessionCompleted {
        session_id: String,
        vigilance_correct: usize,
        vigilance_passed: bool,
        timestamp: DateTime<Utc>,
    },
    SessionAbandoned {
        session_id: String,
        timestamp: DateTime<Utc>,
    },
}

/// Appending writer. Each event is flushed, and synced to disk when
/// `sync` is set, before `append` returns.
#[derive(Debug)]
pub struct EventLog {
    file: File,
    path: PathBuf,
    sync: bool,
}

impl EventLog {
    fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StudyError + '_ {
        move |source| StudyError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Opens `path` for appending, first cutting it back to `valid_len`
    /// bytes (dropping a torn final line) when given.
    pub fn open(path: impl AsRef<Path>, valid_len: Option<u64>, sync: bool) -> Result<Self, StudyError> {
        let path = path.as_ref();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .read(true)
            .open(path)
            .map_err(Self::io_err(path))?;
        if let Some(len) = valid_len {
            let current = file.metadata().map_err(Self::io_err(path))?.len();
            if current > len {
                file.set_len(len).map_err(Self::io_err(path))?;
            }
            if len > 0 && !ends_with_newline(path, len).map_err(Self::io_err(path))? {
                file.write_all(b"\n").map_err(Self::io_err(path))?;
            }
        }
        Ok(Self {
            file,
            path: path.to_path_buf(),
            sync,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &Event) -> Result<(), StudyError> {
        let mut line = serde_json::to_vec(event).expect("event serializes");
        line.push(b'\n');
        let path = self.path.clone();
        self.file.write_all(&line).map_err(Self::io_err(&path))?;
        self.file.flush().map_err(Self::io_err(&path))?;
        if self.sync {
            self.file.sync_data().map_err(Self::io_err(&path))?;
        }
        Ok(())
    }
}

fn ends_with_newline(path: &Path, len: u64) -> io::Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    let mut f = File::open(path)?;
    f.seek(SeekFrom::Start(len - 1))?;
    let mut b = [0u8; 1];
    f.read_exact(&mut b)?;
    Ok(b[0] == b'\n')
}

#[derive(Debug, Clone, Default)]
pub struct Replay {
    pub state: ServiceState,
    pub events: usize,
    /// Length in bytes of the valid prefix.
    pub valid_len: u64,
    /// Whether an incomplete final line was ignored.
    pub truncated: bool,
}

/// Rebuilds service state from a log. A missing file is an empty log.
///
/// An unparseable final line without a trailing newline is a torn write:
/// it is ignored with a warning. Any other bad line is corruption.
pub fn replay_log(path: impl AsRef<Path>) -> Result<Replay, StudyError> {
    let path = path.as_ref();
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(source) => {
            return Err(StudyError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    replay_bytes(&bytes)
}

pub(crate) fn replay_bytes(bytes: &[u8]) -> Result<Replay, StudyError> {
    let mut replay = Replay::default();
    let mut offset = 0usize;
    while offset < bytes.len() {
        let (line, next, terminated) = match bytes[offset..].iter().position(|&b| b == b'\n') {
            Some(i) => (&bytes[offset..offset + i], offset + i + 1, true),
            None => (&bytes[offset..], bytes.len(), false),
        };
        if line.iter().all(u8::is_ascii_whitespace) {
            offset = next;
            if terminated {
                replay.valid_len = next as u64;
            }
            continue;
        }
        let corrupt = |reason: String| StudyError::CorruptLog {
            offset: offset as u64,
            reason,
        };
        match serde_json::from_slice::<Event>(line) {
            Ok(event) => {
                replay.state.apply(&event).map_err(corrupt)?;
                replay.events += 1;
                replay.valid_len = next as u64;
            }
            Err(e) if !terminated => {
                log::warn!("ignoring torn final event at byte {offset}: {e}");
                replay.truncated = true;
            }
            Err(e) => return Err(corrupt(e.to_string())),
        }
        offset = next;
    }
    Ok(replay)
}
