// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::clock::Clock;
use super::log::{replay_log, Event, EventLog};
use super::session::{
    Ack, Condition, GridCell, NextTrial, Session, SessionStatus, Submission, TrialPayload, TrialSpec,
};
use super::{StudyConfig, StudyError};
use crate::corpus::{write_responses, ResponseRecord, StimulusSet};

/// Sessions in creation order. Only changed by [`ServiceState::apply`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ServiceState {
    sessions: Vec<Session>,
    by_id: HashMap<String, usize>,
}

impl ServiceState {
    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn session(&self, session_id: &str) -> Option<&Session> {
        self.by_id.get(session_id).map(|&i| &self.sessions[i])
    }

    fn session_mut(&mut self, session_id: &str) -> Result<&mut Session, String> {
        match self.by_id.get(session_id) {
            Some(&i) => Ok(&mut self.sessions[i]),
            None => Err(format!("event for unknown session {session_id:?}")),
        }
    }

    /// Active and completed sessions per condition.
    pub fn condition_load(&self) -> BTreeMap<Condition, usize> {
        let mut load = BTreeMap::new();
        for s in &self.sessions {
            if s.status != SessionStatus::Abandoned {
                *load.entry(s.condition()).or_insert(0) += 1;
            }
        }
        load
    }

    /// Applies one event, checking it against the current state.
    pub fn apply(&mut self, event: &Event) -> Result<(), String> {
        match event {
            Event::SessionCreated {
                session_id,
                participant_id,
                category,
                duration_ms,
                trial_plan,
                timestamp,
            } => {
                if self.by_id.contains_key(session_id) {
                    return Err(format!("session {session_id:?} created twice"));
                }
                self.by_id.insert(session_id.clone(), self.sessions.len());
                self.sessions.push(Session {
                    session_id: session_id.clone(),
                    participant_id: participant_id.clone(),
                    category: *category,
                    duration_ms: *duration_ms,
                    trial_plan: trial_plan.clone(),
                    cursor: 0,
                    status: SessionStatus::Active,
                    vigilance_correct: 0,
                    vigilance_passed: None,
                    submissions: Vec::new(),
                    created_at: *timestamp,
                });
            }
            Event::TrialSubmitted {
                session_id,
                trial_index,
                payload,
                exposure_flagged,
                timestamp,
            } => {
                let session = self.session_mut(session_id)?;
                if session.status != SessionStatus::Active || *trial_index != session.cursor {
                    return Err(format!(
                        "submission {trial_index} does not follow cursor {}",
                        session.cursor
                    ));
                }
                let spec = session
                    .trial_plan
                    .get(*trial_index)
                    .ok_or_else(|| format!("trial {trial_index} beyond plan"))?;
                if !payload.matches(spec) {
                    return Err(format!("payload kind mismatch for trial {trial_index}"));
                }
                if let (TrialPayload::VigilanceProbe { cell_clicked }, TrialSpec::VigilanceProbe { cell, .. }) =
                    (payload, spec)
                {
                    if cell_clicked == cell {
                        session.vigilance_correct += 1;
                    }
                }
                session.submissions.push(Submission {
                    trial_index: *trial_index,
                    payload: payload.clone(),
                    exposure_flagged: *exposure_flagged,
                    timestamp: *timestamp,
                });
                session.cursor += 1;
            }
            Event::SessionCompleted {
                session_id,
                vigilance_correct,
                vigilance_passed,
                ..
            } => {
                let session = self.session_mut(session_id)?;
                if session.cursor != session.trial_plan.len() || session.status != SessionStatus::Active {
                    return Err(format!("session {session_id:?} completed early"));
                }
                if *vigilance_correct != session.vigilance_correct {
                    return Err(format!("vigilance tally mismatch for {session_id:?}"));
                }
                session.status = SessionStatus::Complete;
                session.vigilance_passed = Some(*vigilance_passed);
            }
            Event::SessionAbandoned { session_id, .. } => {
                let session = self.session_mut(session_id)?;
                if session.status != SessionStatus::Active {
                    return Err(format!("session {session_id:?} is not active"));
                }
                session.status = SessionStatus::Abandoned;
            }
        }
        Ok(())
    }

    /// Image-trial records of completed sessions, in creation then trial
    /// order, stamped with the session's vigilance outcome.
    pub fn export_records(&self) -> Vec<ResponseRecord> {
        let mut out = Vec::new();
        for session in self.sessions.iter().filter(|s| s.status == SessionStatus::Complete) {
            let passed = session.vigilance_passed.unwrap_or(false);
            for sub in &session.submissions {
                if let (TrialPayload::Image { description, .. }, Some(TrialSpec::Image { image_id, .. })) =
                    (&sub.payload, session.trial_plan.get(sub.trial_index))
                {
                    out.push(ResponseRecord {
                        participant_id: session.participant_id.clone(),
                        session_id: session.session_id.clone(),
                        image_id: image_id.clone(),
                        duration_ms: session.duration_ms,
                        raw_text: description.clone(),
                        vigilance_passed: passed,
                        timestamp: sub.timestamp,
                    });
                }
            }
        }
        out
    }
}

/// The collection service: configuration, stimuli, state and an optional
/// durable log. Mutations go through `&mut self`; callers serialize access.
pub struct StudyService {
    config: StudyConfig,
    stimuli: Arc<StimulusSet>,
    state: ServiceState,
    log: Option<EventLog>,
    clock: Box<dyn Clock>,
    seed: u64,
}

impl std::fmt::Debug for StudyService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StudyService")
            .field("config", &self.config)
            .field("sessions", &self.state.sessions.len())
            .field("log", &self.log.as_ref().map(EventLog::path))
            .finish()
    }
}

impl StudyService {
    /// In-memory service without a log.
    pub fn new(config: StudyConfig, stimuli: Arc<StimulusSet>, clock: Box<dyn Clock>) -> Result<Self, StudyError> {
        config.validate()?;
        let seed = config.rng_seed.unwrap_or_else(rand::random);
        Ok(Self {
            config,
            stimuli,
            state: ServiceState::default(),
            log: None,
            clock,
            seed,
        })
    }

    /// Service backed by the log at `path`, recovering any existing state
    /// from it first.
    pub fn with_log(
        config: StudyConfig,
        stimuli: Arc<StimulusSet>,
        clock: Box<dyn Clock>,
        path: impl AsRef<Path>,
        sync: bool,
    ) -> Result<Self, StudyError> {
        let mut service = Self::new(config, stimuli, clock)?;
        let replay = replay_log(path.as_ref())?;
        service.state = replay.state;
        service.log = Some(EventLog::open(path, Some(replay.valid_len), sync)?);
        Ok(service)
    }

    pub fn config(&self) -> &StudyConfig {
        &self.config
    }

    pub fn stimuli(&self) -> &StimulusSet {
        &self.stimuli
    }

    pub fn state(&self) -> &ServiceState {
        &self.state
    }

    fn commit(&mut self, event: Event) -> Result<(), StudyError> {
        if let Some(log) = &mut self.log {
            log.append(&event)?;
        }
        self.state
            .apply(&event)
            .expect("service only emits events valid for its own state");
        Ok(())
    }

    fn session_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Assigns the least-loaded condition (seeded tie-break) and plans the
    /// session's trials.
    pub fn create_session(&mut self, participant_id: &str) -> Result<Session, StudyError> {
        let index = self.state.sessions.len();
        let mut rng = self.session_rng(index);

        let load = self.state.condition_load();
        let target = self.config.target_participants_per_condition;
        let eligible: Vec<(Condition, usize)> = self
            .config
            .conditions()
            .into_iter()
            .map(|c| (c, load.get(&c).copied().unwrap_or(0)))
            .filter(|&(_, n)| n < target)
            .collect();
        let min = eligible.iter().map(|&(_, n)| n).min().ok_or(StudyError::StudyFull)?;
        let ties: Vec<Condition> = eligible.iter().filter(|&&(_, n)| n == min).map(|&(c, _)| c).collect();
        let condition = ties[rng.gen_range(0..ties.len())];

        let pool: Vec<_> = self.stimuli.in_category(condition.category).collect();
        let needed = self.config.images_per_session;
        if pool.len() < needed {
            return Err(StudyError::CategoryExhausted {
                category: condition.category,
                available: pool.len(),
                needed,
            });
        }
        let mut images: Vec<_> = pool.choose_multiple(&mut rng, needed).copied().collect();
        images.shuffle(&mut rng);

        let probes = self.config.vigilance_probe_count;
        let total = needed + probes;
        let probe_slots: std::collections::HashSet<usize> =
            index::sample(&mut rng, total, probes).into_iter().collect();
        let mut images = images.into_iter();
        let trial_plan = (0..total)
            .map(|slot| {
                if probe_slots.contains(&slot) {
                    TrialSpec::VigilanceProbe {
                        cell: GridCell {
                            row: rng.gen_range(0..self.config.grid_rows),
                            col: rng.gen_range(0..self.config.grid_cols),
                        },
                        duration_ms: condition.duration_ms,
                    }
                } else {
                    let image = images.next().expect("slot count matches image count");
                    TrialSpec::Image {
                        image_id: image.id.clone(),
                        asset_path: image.path.clone(),
                        duration_ms: condition.duration_ms,
                    }
                }
            })
            .collect();

        let session_id = format!("s{:06}", index + 1);
        self.commit(Event::SessionCreated {
            session_id: session_id.clone(),
            participant_id: participant_id.to_string(),
            category: condition.category,
            duration_ms: condition.duration_ms,
            trial_plan,
            timestamp: self.clock.now(),
        })?;
        Ok(self.state.session(&session_id).expect("just created").clone())
    }

    pub fn session(&self, session_id: &str) -> Result<&Session, StudyError> {
        self.state
            .session(session_id)
            .ok_or_else(|| StudyError::UnknownSession(session_id.to_string()))
    }

    /// The trial at the cursor. Does not advance.
    pub fn next_trial(&self, session_id: &str) -> Result<NextTrial, StudyError> {
        let session = self.session(session_id)?;
        match session.status {
            SessionStatus::Complete => Ok(NextTrial::SessionComplete),
            SessionStatus::Abandoned => Err(StudyError::SessionNotActive(session_id.to_string())),
            SessionStatus::Active => Ok(match session.trial_plan.get(session.cursor) {
                Some(trial) => NextTrial::Trial {
                    trial_index: session.cursor,
                    trial: trial.clone(),
                },
                None => NextTrial::SessionComplete,
            }),
        }
    }

    pub fn submit_trial(
        &mut self,
        session_id: &str,
        trial_index: usize,
        payload: TrialPayload,
    ) -> Result<Ack, StudyError> {
        let session = self.session(session_id)?;
        if trial_index < session.cursor {
            return Err(StudyError::DuplicateSubmission(trial_index));
        }
        if session.status != SessionStatus::Active {
            return Err(StudyError::SessionNotActive(session_id.to_string()));
        }
        if trial_index > session.cursor {
            return Err(StudyError::OutOfOrderSubmission {
                expected: session.cursor,
                got: trial_index,
            });
        }
        let spec = &session.trial_plan[trial_index];
        if !payload.matches(spec) {
            return Err(StudyError::PayloadMismatch(trial_index));
        }
        let nominal = f64::from(spec.duration_ms());
        let exposure_flagged = match &payload {
            TrialPayload::Image {
                measured_exposure_ms: Some(measured),
                ..
            } => (measured - nominal).abs() > self.config.exposure_tolerance * nominal,
            _ => false,
        };
        let last = trial_index + 1 == session.trial_plan.len();

        self.commit(Event::TrialSubmitted {
            session_id: session_id.to_string(),
            trial_index,
            payload,
            exposure_flagged,
            timestamp: self.clock.now(),
        })?;
        if last {
            let vigilance_correct = self.session(session_id)?.vigilance_correct;
            self.commit(Event::SessionCompleted {
                session_id: session_id.to_string(),
                vigilance_correct,
                vigilance_passed: vigilance_correct >= self.config.vigilance_pass_min,
                timestamp: self.clock.now(),
            })?;
        }
        Ok(Ack {
            session_id: session_id.to_string(),
            trial_index,
            next_index: trial_index + 1,
            complete: last,
            exposure_flagged,
        })
    }

    /// Marks an active session abandoned; it stops counting towards
    /// condition balance and is never exported.
    pub fn abandon_session(&mut self, session_id: &str) -> Result<(), StudyError> {
        if self.session(session_id)?.status != SessionStatus::Active {
            return Err(StudyError::SessionNotActive(session_id.to_string()));
        }
        self.commit(Event::SessionAbandoned {
            session_id: session_id.to_string(),
            timestamp: self.clock.now(),
        })
    }

    pub fn export_records(&self) -> Vec<ResponseRecord> {
        self.state.export_records()
    }

    pub fn export_responses(&self, out: impl AsRef<Path>) -> Result<usize, StudyError> {
        Ok(write_responses(out, &self.export_records())?)
    }

    /// Submissions whose measured exposure strayed past the tolerance, as
    /// (session id, trial index).
    pub fn flagged_exposures(&self) -> Vec<(String, usize)> {
        self.state
            .sessions
            .iter()
            .flat_map(|s| {
                s.submissions
                    .iter()
                    .filter(|sub| sub.exposure_flagged)
                    .map(|sub| (s.session_id.clone(), sub.trial_index))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Category, StimulusImage};
    use crate::study::clock::StepClock;
    use crate::study::log::replay_bytes;
    use chrono::{Duration, TimeZone, Utc};
    use std::collections::HashSet;

    fn stimuli(per_category: usize) -> Arc<StimulusSet> {
        let images = Category::ALL
            .iter()
            .flat_map(|&c| {
                (0..per_category).map(move |i| StimulusImage {
                    id: format!("{c}-{i:02}"),
                    path: format!("{c}/{i:02}.jpg"),
                    category: c,
                    source_note: None,
                })
            })
            .collect();
        Arc::new(StimulusSet::new(images).unwrap())
    }

    fn clock() -> Box<dyn Clock> {
        Box::new(StepClock::new(
            Utc.with_ymd_and_hms(2021, 6, 1, 9, 0, 0).unwrap(),
            Duration::milliseconds(1500),
        ))
    }

    fn service(seed: u64) -> StudyService {
        let config = StudyConfig {
            rng_seed: Some(seed),
            ..StudyConfig::default()
        };
        StudyService::new(config, stimuli(30), clock()).unwrap()
    }

    /// Answers every trial; probes answered correctly for the first `correct` probes.
    fn complete(svc: &mut StudyService, session_id: &str, correct: usize) {
        let mut probes_seen = 0;
        while let NextTrial::Trial { trial_index, trial } = svc.next_trial(session_id).unwrap() {
            let payload = match trial {
                TrialSpec::Image {
                    image_id, duration_ms, ..
                } => TrialPayload::Image {
                    description: format!("a picture of {image_id}"),
                    vigilance_cell_clicked: Some(GridCell { row: 0, col: 0 }),
                    measured_exposure_ms: Some(f64::from(duration_ms)),
                },
                TrialSpec::VigilanceProbe { cell, .. } => {
                    probes_seen += 1;
                    let clicked = if probes_seen <= correct {
                        cell
                    } else {
                        GridCell {
                            row: (cell.row + 1) % 3,
                            col: cell.col,
                        }
                    };
                    TrialPayload::VigilanceProbe { cell_clicked: clicked }
                }
            };
            svc.submit_trial(session_id, trial_index, payload).unwrap();
        }
    }

    #[test]
    fn plan_shape() {
        let mut svc = service(1);
        let s = svc.create_session("p1").unwrap();
        assert_eq!(s.trial_plan.len(), 33);
        let images: Vec<_> = s.trial_plan.iter().filter_map(TrialSpec::image_id).collect();
        assert_eq!(images.len(), 30);
        assert_eq!(images.iter().collect::<HashSet<_>>().len(), 30, "no repeats");
        for id in images {
            assert_eq!(svc.stimuli().get(id).unwrap().category, s.category);
        }
        assert!(s.trial_plan.iter().all(|t| t.duration_ms() == s.duration_ms));
    }

    #[test]
    fn balanced_assignment() {
        let mut svc = service(9);
        for i in 0..10 {
            svc.create_session(&format!("p{i}")).unwrap();
        }
        let load = svc.state().condition_load();
        assert_eq!(load.len(), 10);
        assert!(load.values().all(|&n| n == 1));
    }

    #[test]
    fn exhausted_category() {
        let config = StudyConfig {
            rng_seed: Some(3),
            ..StudyConfig::default()
        };
        let mut svc = StudyService::new(config, stimuli(20), clock()).unwrap();
        assert!(matches!(
            svc.create_session("p"),
            Err(StudyError::CategoryExhausted {
                available: 20,
                needed: 30,
                ..
            })
        ));
    }

    #[test]
    fn study_full_when_targets_met() {
        let config = StudyConfig {
            rng_seed: Some(3),
            categories: vec![Category::Abstract],
            durations_ms: vec![500],
            target_participants_per_condition: 1,
            ..StudyConfig::default()
        };
        let mut svc = StudyService::new(config, stimuli(30), clock()).unwrap();
        svc.create_session("a").unwrap();
        assert!(matches!(svc.create_session("b"), Err(StudyError::StudyFull)));
    }

    #[test]
    fn submission_ordering() {
        let mut svc = service(2);
        let id = svc.create_session("p").unwrap().session_id;
        let NextTrial::Trial { trial_index: 0, trial } = svc.next_trial(&id).unwrap() else {
            panic!("expected first trial")
        };
        assert_eq!(trial, svc.session(&id).unwrap().trial_plan[0]);
        let wrong_kind = match trial {
            TrialSpec::Image { .. } => TrialPayload::VigilanceProbe {
                cell_clicked: GridCell { row: 0, col: 0 },
            },
            TrialSpec::VigilanceProbe { .. } => TrialPayload::Image {
                description: "x".into(),
                vigilance_cell_clicked: None,
                measured_exposure_ms: None,
            },
        };
        assert!(matches!(
            svc.submit_trial(&id, 0, wrong_kind),
            Err(StudyError::PayloadMismatch(0))
        ));
        let probe = TrialPayload::VigilanceProbe {
            cell_clicked: GridCell { row: 0, col: 0 },
        };
        assert!(matches!(
            svc.submit_trial(&id, 2, probe.clone()),
            Err(StudyError::OutOfOrderSubmission { expected: 0, got: 2 })
        ));
        assert!(matches!(
            svc.submit_trial("nope", 0, probe.clone()),
            Err(StudyError::UnknownSession(_))
        ));
        assert!(matches!(svc.next_trial("nope"), Err(StudyError::UnknownSession(_))));

        complete(&mut svc, &id, 3);
        let s = svc.session(&id).unwrap();
        assert_eq!((s.status, s.cursor), (SessionStatus::Complete, 33));
        assert_eq!(svc.next_trial(&id).unwrap(), NextTrial::SessionComplete);
        assert!(matches!(
            svc.submit_trial(&id, 32, probe.clone()),
            Err(StudyError::DuplicateSubmission(32))
        ));
        assert!(matches!(
            svc.submit_trial(&id, 33, probe),
            Err(StudyError::SessionNotActive(_))
        ));
    }

    #[test]
    fn vigilance_threshold_stamps_export() {
        let mut svc = service(4);
        let failing = svc.create_session("fail").unwrap().session_id;
        complete(&mut svc, &failing, 1);
        let passing = svc.create_session("pass").unwrap().session_id;
        complete(&mut svc, &passing, 2);
        let records = svc.export_records();
        assert_eq!(records.len(), 60);
        assert!(records
            .iter()
            .filter(|r| r.session_id == failing)
            .all(|r| !r.vigilance_passed));
        assert!(records
            .iter()
            .filter(|r| r.session_id == passing)
            .all(|r| r.vigilance_passed));
    }

    #[test]
    fn only_completed_sessions_export() {
        let mut svc = service(5);
        assert!(svc.export_records().is_empty());
        let id = svc.create_session("p").unwrap().session_id;
        assert!(svc.export_records().is_empty());
        complete(&mut svc, &id, 3);
        assert_eq!(svc.export_records().len(), 30);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        assert_eq!(svc.export_responses(&path).unwrap(), 30);
    }

    #[test]
    fn abandoned_sessions_free_their_condition() {
        let mut svc = service(6);
        let id = svc.create_session("p").unwrap().session_id;
        svc.abandon_session(&id).unwrap();
        assert!(svc.state().condition_load().is_empty());
        assert!(matches!(svc.next_trial(&id), Err(StudyError::SessionNotActive(_))));
        assert!(matches!(svc.abandon_session(&id), Err(StudyError::SessionNotActive(_))));
    }

    #[test]
    fn exposure_deviation_flagged() {
        let mut svc = service(7);
        let id = svc.create_session("p").unwrap().session_id;
        while let NextTrial::Trial { trial_index, trial } = svc.next_trial(&id).unwrap() {
            match trial {
                TrialSpec::Image { duration_ms, .. } => {
                    let ack = svc
                        .submit_trial(
                            &id,
                            trial_index,
                            TrialPayload::Image {
                                description: "cat".into(),
                                vigilance_cell_clicked: None,
                                measured_exposure_ms: Some(f64::from(duration_ms) * 1.2),
                            },
                        )
                        .unwrap();
                    assert!(ack.exposure_flagged);
                    break;
                }
                TrialSpec::VigilanceProbe { cell, .. } => {
                    svc.submit_trial(&id, trial_index, TrialPayload::VigilanceProbe { cell_clicked: cell })
                        .unwrap();
                }
            }
        }
        assert_eq!(svc.flagged_exposures().len(), 1);
    }

    #[test]
    fn log_replay_matches_live_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let config = StudyConfig {
            rng_seed: Some(11),
            ..StudyConfig::default()
        };
        let mut svc = StudyService::with_log(config.clone(), stimuli(30), clock(), &path, false).unwrap();
        let a = svc.create_session("a").unwrap().session_id;
        complete(&mut svc, &a, 3);
        let b = svc.create_session("b").unwrap().session_id;
        svc.submit_trial(&b, 0, first_payload(&svc, &b)).unwrap();

        let replay = replay_log(&path).unwrap();
        assert!(!replay.truncated);
        assert_eq!(&replay.state, svc.state());
        assert_eq!(replay.state.export_records(), svc.export_records());
        assert_eq!(replay_log(&path).unwrap().state, replay.state, "replay is idempotent");

        drop(svc);
        let resumed = StudyService::with_log(config, stimuli(30), clock(), &path, false).unwrap();
        assert_eq!(resumed.session(&b).unwrap().cursor, 1);
    }

    fn first_payload(svc: &StudyService, id: &str) -> TrialPayload {
        match svc.next_trial(id).unwrap() {
            NextTrial::Trial {
                trial: TrialSpec::VigilanceProbe { cell, .. },
                ..
            } => TrialPayload::VigilanceProbe { cell_clicked: cell },
            _ => TrialPayload::Image {
                description: "a dog".into(),
                vigilance_cell_clicked: None,
                measured_exposure_ms: None,
            },
        }
    }

    #[test]
    fn torn_tail_and_corruption() {
        assert_eq!(replay_bytes(b"").unwrap().events, 0);

        let mut svc = service(12);
        let id = svc.create_session("p").unwrap().session_id;
        let created = serde_json::to_string(&Event::SessionCreated {
            session_id: id.clone(),
            participant_id: "p".into(),
            category: svc.session(&id).unwrap().category,
            duration_ms: 500,
            trial_plan: svc.session(&id).unwrap().trial_plan.clone(),
            timestamp: Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(),
        })
        .unwrap();

        let torn = format!("{created}\n{{\"type\":\"trial_sub");
        let r = replay_bytes(torn.as_bytes()).unwrap();
        assert!(r.truncated);
        assert_eq!(r.events, 1);
        assert_eq!(r.valid_len as usize, created.len() + 1);

        let garbage = format!("{created}\nnot json\n{created}\n");
        match replay_bytes(garbage.as_bytes()) {
            Err(StudyError::CorruptLog { offset, .. }) => assert_eq!(offset as usize, created.len() + 1),
            other => panic!("unexpected {other:?}"),
        }

        let duplicate = format!("{created}\n{created}\n");
        assert!(matches!(
            replay_bytes(duplicate.as_bytes()),
            Err(StudyError::CorruptLog { .. })
        ));
    }

    #[test]
    fn resume_after_torn_write_appends_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let config = StudyConfig {
            rng_seed: Some(13),
            ..StudyConfig::default()
        };
        {
            let mut svc = StudyService::with_log(config.clone(), stimuli(30), clock(), &path, false).unwrap();
            svc.create_session("a").unwrap();
        }
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.extend_from_slice(b"{\"type\":\"session_cr");
        std::fs::write(&path, &bytes).unwrap();

        let mut svc = StudyService::with_log(config, stimuli(30), clock(), &path, false).unwrap();
        assert_eq!(svc.state().sessions().len(), 1);
        svc.create_session("b").unwrap();
        let replay = replay_log(&path).unwrap();
        assert!(!replay.truncated);
        assert_eq!(replay.state.sessions().len(), 2);
    }
}
