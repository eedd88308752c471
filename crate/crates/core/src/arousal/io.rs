//! Playtrace files.
//!
//! One sample per line, UTF-8, with a required header:
//!
//! ```text
//! session_id,timestamp_s,lane_top,lane_bottom,b1,b2,b3,b4,b5,b6,score,arousal_raw
//! p01,0.25,0,1,0,0,1,0,0,0,0,0.137
//! ```
//!
//! `b1..b6` are the band slots top-near, top-mid, top-far, bottom-near,
//! bottom-mid, bottom-far with 0 = empty, 1 = item, 2 = obstacle. Rows of a
//! session need not be contiguous but their timestamps must strictly
//! increase. `arousal_raw` is on any scale and is min-max normalized per
//! session on load.
//!
//! # Mapping AGAIN exports
//!
//! The AGAIN Endless Runner logs carry one row per game tick with the
//! player's lane and the positions of on-screen objects, plus the
//! continuous arousal annotation resampled to the same clock. To convert:
//! take the participant/session identifier as `session_id`, the elapsed
//! game time as `timestamp_s`, the player lane as the two one-hot bits,
//! bin each lane's objects into the three distance bands exactly as
//! [`featurize`](crate::env::featurize) does (obstacle over item), copy
//! the running game score, and copy the raw annotation value unchanged.
//! [`convert_rows`] performs that last step given already-binned records.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{HumanSample, HumanSession};
use crate::env::{Band, CellKey, Lane};
use crate::{Error, Result};

pub const HEADER: [&str; 12] = [
    "session_id",
    "timestamp_s",
    "lane_top",
    "lane_bottom",
    "b1",
    "b2",
    "b3",
    "b4",
    "b5",
    "b6",
    "score",
    "arousal_raw",
];

/// Loads sessions from a playtrace file and normalizes their arousal.
pub fn load_sessions(path: impl AsRef<Path>) -> Result<Vec<HumanSession>> {
    read_sessions(File::open(path)?)
}

pub fn read_sessions<R: Read>(input: R) -> Result<Vec<HumanSession>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();

    let header = match records.next() {
        None => return Err(Error::EmptyDataset("file has no header".into())),
        Some(record) => record?,
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, msg: format!("expected header `{}`", HEADER.join(",")) });
    }

    let mut sessions: Vec<HumanSession> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let (id, sample) = parse_row(&record, line)?;
        let slot = *by_id.entry(id.clone()).or_insert_with(|| {
            sessions.push(HumanSession { session_id: id.clone(), samples: Vec::new() });
            sessions.len() - 1
        });
        let session = &mut sessions[slot];
        if let Some(prev) = session.samples.last() {
            if !(sample.timestamp > prev.timestamp) {
                return Err(Error::NonMonotoneTimestamps { session: id, line, timestamp: sample.timestamp });
            }
        }
        session.samples.push(sample);
    }
    if sessions.is_empty() {
        return Err(Error::EmptyDataset("file has no samples".into()));
    }
    for session in &mut sessions {
        session.normalize_arousal();
    }
    Ok(sessions)
}

fn parse_row(record: &csv::StringRecord, line: u64) -> Result<(String, HumanSample)> {
    let err = |msg: String| Error::Parse { line, msg };
    if record.len() != HEADER.len() {
        return Err(err(format!("expected {} fields, found {}", HEADER.len(), record.len())));
    }
    let field = |i: usize| &record[i];
    let number = |i: usize| -> Result<f64> {
        field(i)
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(format!("{} is not a finite number: `{}`", HEADER[i], field(i))))
    };
    let code = |i: usize| -> Result<u8> {
        field(i).parse::<u8>().map_err(|_| err(format!("{} is not a small integer: `{}`", HEADER[i], field(i))))
    };

    let session_id = field(0).to_string();
    if session_id.is_empty() {
        return Err(err("empty session_id".into()));
    }
    let timestamp = number(1)?;
    let lane = match (code(2)?, code(3)?) {
        (1, 0) => Lane::Top,
        (0, 1) => Lane::Bottom,
        (t, b) => return Err(err(format!("lane bits must be one-hot, got {t},{b}"))),
    };
    let mut bands = [Band::Empty; 6];
    for (slot, band) in bands.iter_mut().enumerate() {
        let raw = code(4 + slot)?;
        *band = Band::from_code(raw).ok_or_else(|| err(format!("b{} must be 0, 1 or 2, got {raw}", slot + 1)))?;
    }
    let score = field(10)
        .parse::<i64>()
        .map_err(|_| err(format!("score is not an integer: `{}`", field(10))))?;
    let arousal = number(11)?;
    Ok((session_id, HumanSample { timestamp, key: CellKey { lane, bands }, score, arousal }))
}

/// Writes sessions in the playtrace format, using each sample's `arousal`
/// as the raw value.
pub fn write_sessions<W: Write>(out: W, sessions: &[HumanSession]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for session in sessions {
        for sample in &session.samples {
            let params = sample.key.params();
            let mut row = Vec::with_capacity(HEADER.len());
            row.push(session.session_id.clone());
            row.push(sample.timestamp.to_string());
            row.extend(params.iter().map(u8::to_string));
            row.push(sample.score.to_string());
            row.push(sample.arousal.to_string());
            writer.write_record(&row)?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// One already-featurized log row from an external source.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRow {
    pub session_id: String,
    pub elapsed_s: f64,
    pub key: CellKey,
    pub score: i64,
    pub annotation: f64,
}

/// Groups external rows into sessions, sorted by time within each session,
/// keeping the raw annotation so the result can be written with
/// [`write_sessions`].
pub fn convert_rows(rows: impl IntoIterator<Item = ExternalRow>) -> Vec<HumanSession> {
    let mut sessions: Vec<HumanSession> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    for row in rows {
        let slot = *by_id.entry(row.session_id.clone()).or_insert_with(|| {
            sessions.push(HumanSession { session_id: row.session_id.clone(), samples: Vec::new() });
            sessions.len() - 1
        });
        sessions[slot].samples.push(HumanSample {
            timestamp: row.elapsed_s,
            key: row.key,
            score: row.score,
            arousal: row.annotation,
        });
    }
    for session in &mut sessions {
        session.samples.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        session.samples.dedup_by(|a, b| a.timestamp == b.timestamp);
    }
    sessions
}
