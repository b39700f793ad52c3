//! Line-delimited JSON event logs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::egoview::ViewCondition;
use crate::error::{Error, Result};
use crate::protocol::QuestionnaireResponse;
use crate::session::{ticks_to_seconds, SessionEvent, SessionRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub session_seconds: f64,
    pub wall_time: DateTime<Utc>,
    pub kind: String,
    pub payload: Value,
}

/// Stamps records with `epoch` plus session time. With a fixed epoch,
/// simulated logs are reproducible byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WallClock {
    pub epoch: DateTime<Utc>,
}

impl WallClock {
    pub fn simulated() -> Self {
        Self { epoch: DateTime::UNIX_EPOCH }
    }

    pub fn starting_now() -> Self {
        Self { epoch: Utc::now() }
    }

    pub fn at(&self, session_seconds: f64) -> DateTime<Utc> {
        self.epoch + TimeDelta::microseconds((session_seconds * 1e6).round() as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Training,
    Measured,
}

/// Identifies one pass (one condition on one graph) inside a study log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassInfo {
    pub pass: usize,
    pub condition: ViewCondition,
    pub graph: usize,
    pub stage: Stage,
    /// Session ticks elapsed before this pass began.
    pub offset_ticks: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PassPayload {
    #[serde(flatten)]
    pass: PassInfo,
    tick: u64,
    data: Value,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_seconds(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.session_seconds)
    }

    /// Appends a record; session time may not go backwards.
    pub fn push(&mut self, clock: WallClock, session_seconds: f64, kind: &str, payload: Value) -> Result<()> {
        if !session_seconds.is_finite() || session_seconds < self.last_seconds() {
            return Err(Error::Format(format!(
                "session time {session_seconds} precedes {}",
                self.last_seconds()
            )));
        }
        self.records.push(LogRecord {
            session_seconds,
            wall_time: clock.at(session_seconds),
            kind: kind.to_owned(),
            payload,
        });
        Ok(())
    }

    pub fn push_session_record(&mut self, clock: WallClock, pass: PassInfo, record: &SessionRecord) -> Result<()> {
        let tagged = serde_json::to_value(&record.event)?;
        let data = tagged.get("payload").cloned().unwrap_or(Value::Null);
        let payload = serde_json::to_value(PassPayload { pass, tick: record.tick, data })?;
        let seconds = ticks_to_seconds(pass.offset_ticks + record.tick);
        self.push(clock, seconds, record.event.kind(), payload)
    }

    /// Appends a validated questionnaire outside any pass, at the current
    /// end of the log.
    pub fn record_questionnaire(&mut self, clock: WallClock, response: &QuestionnaireResponse) -> Result<()> {
        response.validate()?;
        self.push(clock, self.last_seconds(), "questionnaire", serde_json::to_value(response)?)
    }

    /// Questionnaires in log order, with the pass they were submitted in.
    pub fn questionnaires(&self) -> Result<Vec<(Option<PassInfo>, QuestionnaireResponse)>> {
        let mut out = Vec::new();
        for r in self.records.iter().filter(|r| r.kind == "questionnaire") {
            let (pass, data) = match parse_pass_payload(r)? {
                Some(p) => (Some(p.pass), p.data),
                None => (None, r.payload.clone()),
            };
            let q = serde_json::from_value(data).map_err(|e| Error::Format(format!("questionnaire: {e}")))?;
            out.push((pass, q));
        }
        Ok(out)
    }

    /// Session records of every pass, in log order.
    pub fn passes(&self) -> Result<Vec<(PassInfo, Vec<SessionRecord>)>> {
        let mut out: Vec<(PassInfo, Vec<SessionRecord>)> = Vec::new();
        for r in &self.records {
            let Some(p) = parse_pass_payload(r)? else { continue };
            let event: SessionEvent = serde_json::from_value(serde_json::json!({"kind": r.kind, "payload": p.data}))
                .map_err(|e| Error::Format(format!("record '{}': {e}", r.kind)))?;
            let record = SessionRecord { tick: p.tick, event };
            match out.last_mut() {
                Some((info, records)) if info.pass == p.pass.pass => records.push(record),
                _ => out.push((p.pass, vec![record])),
            }
        }
        Ok(out)
    }

    /// Structural checks: monotone time, paired task records, closed passes.
    pub fn validate(&self) -> Result<()> {
        if self.records.windows(2).any(|w| w[1].session_seconds < w[0].session_seconds) {
            return Err(Error::Format("session time decreases".into()));
        }
        for (info, records) in self.passes()? {
            let mut open: Option<usize> = None;
            for r in &records {
                match &r.event {
                    SessionEvent::TaskStart { index, .. } => {
                        if let Some(i) = open {
                            return Err(Error::Format(format!("pass {}: task {i} never ended", info.pass)));
                        }
                        open = Some(*index);
                    }
                    SessionEvent::TaskEnd { index, .. } => {
                        if open != Some(*index) {
                            return Err(Error::Format(format!("pass {}: task {index} ended without start", info.pass)));
                        }
                        open = None;
                    }
                    _ => {}
                }
            }
            if let Some(i) = open {
                return Err(Error::Format(format!("pass {}: task {i} never ended", info.pass)));
            }
            if !matches!(records.last().map(|r| &r.event), Some(SessionEvent::End(_))) {
                return Err(Error::Format(format!("pass {} has no session.end", info.pass)));
            }
        }
        Ok(())
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r: LogRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
            records.push(r);
        }
        Ok(Self { records })
    }
}

fn parse_pass_payload(r: &LogRecord) -> Result<Option<PassPayload>> {
    if r.payload.get("pass").is_none() || r.payload.get("tick").is_none() {
        return Ok(None);
    }
    serde_json::from_value(r.payload.clone())
        .map(Some)
        .map_err(|e| Error::Format(format!("record '{}': {e}", r.kind)))
}
