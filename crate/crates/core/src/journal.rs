//! Append-only event journal and snapshots.
//!
//! Both files use the same line framing:
//!
//! ```text
//! <crc32 as 8 lowercase hex digits> <SP> <canonical JSON> <LF>
//! ```
//!
//! The CRC-32 (IEEE) covers exactly the JSON bytes. Canonical JSON has
//! object keys sorted and no insignificant whitespace. A journal line's
//! JSON is `{"kind":..,"payload":..,"sequence":n}`; a snapshot is a single
//! line whose JSON is `{"as_of_sequence":n,"state":{..}}`.
//!
//! Sequences start at 1 and have no gaps. When reading, an unterminated or
//! corrupt *final* line is treated as a torn write and dropped; a corrupt
//! line anywhere else is fatal.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub const JOURNAL_FILE: &str = "events.log";
pub const SNAPSHOT_FILE: &str = "snapshot.dat";

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("journal i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("expected sequence {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("checksum mismatch at line {line} (after sequence {after_sequence})")]
    ChecksumMismatch { line: usize, after_sequence: u64 },
    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("journal is unusable after an earlier write failure")]
    Poisoned,
    #[error("event encoding failed: {0}")]
    Encode(String),
}

impl JournalError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Io(_) | Self::Poisoned => "io-error",
            Self::SequenceGap { .. } => "sequence-gap",
            Self::ChecksumMismatch { .. } => "checksum-mismatch",
            Self::Malformed { .. } => "malformed-record",
            Self::Encode(_) => "encode-error",
        }
    }
}

/// Serializes any value to canonical JSON text.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String, JournalError> {
    // serde_json's Map is ordered by key, so routing through Value sorts
    // every object at every depth.
    let value = serde_json::to_value(value).map_err(|e| JournalError::Encode(e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JournalError::Encode(e.to_string()))
}

pub fn frame(json: &str) -> String {
    format!("{:08x} {}\n", crc32fast::hash(json.as_bytes()), json)
}

/// Splits a framed line (without its newline) and verifies the checksum.
fn unframe(line: &str) -> Option<&str> {
    let (crc, json) = line.split_once(' ')?;
    if crc.len() != 8 {
        return None;
    }
    let expected = u32::from_str_radix(crc, 16).ok()?;
    (crc32fast::hash(json.as_bytes()) == expected).then_some(json)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JournalRecord<E> {
    pub sequence: u64,
    pub event: E,
}

impl<E: Serialize> JournalRecord<E> {
    /// The framed line for this record, newline included.
    pub fn encode(&self) -> Result<String, JournalError> {
        let mut value = serde_json::to_value(&self.event).map_err(|e| JournalError::Encode(e.to_string()))?;
        let obj = value.as_object_mut().ok_or_else(|| JournalError::Encode("events must serialize as objects".into()))?;
        obj.insert("sequence".into(), Value::from(self.sequence));
        Ok(frame(&canonical_json(&value)?))
    }
}

impl<E: DeserializeOwned> JournalRecord<E> {
    fn decode(json: &str, line: usize) -> Result<Self, JournalError> {
        let malformed = |reason: String| JournalError::Malformed { line, reason };
        let mut value: Value = serde_json::from_str(json).map_err(|e| malformed(e.to_string()))?;
        let obj = value.as_object_mut().ok_or_else(|| malformed("not an object".into()))?;
        let sequence = obj.remove("sequence").and_then(|v| v.as_u64()).ok_or_else(|| malformed("missing sequence".into()))?;
        let event = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        Ok(JournalRecord { sequence, event })
    }
}

/// Result of reading a journal file.
#[derive(Debug)]
pub struct JournalContents<E> {
    pub records: Vec<JournalRecord<E>>,
    /// Byte length of the valid prefix.
    pub valid_len: u64,
    /// Bytes after the valid prefix that belonged to a torn final line.
    pub torn_bytes: u64,
}

/// Parses journal bytes. Sequences must be consecutive; the first sequence
/// may be any value (a compacted journal starts after its snapshot).
pub fn parse_journal<E: DeserializeOwned>(bytes: &[u8]) -> Result<JournalContents<E>, JournalError> {
    let mut records: Vec<JournalRecord<E>> = Vec::new();
    let mut offset = 0usize;
    let mut line_no = 0usize;
    while offset < bytes.len() {
        line_no += 1;
        let rest = &bytes[offset..];
        let newline = rest.iter().position(|&b| b == b'\n');
        let is_last = newline.is_none_or(|n| offset + n + 1 == bytes.len());
        let last_seq = records.last().map_or(0, |r| r.sequence);
        let torn = |records: Vec<JournalRecord<E>>| JournalContents {
            records,
            valid_len: offset as u64,
            torn_bytes: (bytes.len() - offset) as u64,
        };
        let Some(n) = newline else {
            // every complete write ends in a newline
            return Ok(torn(records));
        };
        let json = std::str::from_utf8(&rest[..n]).ok().and_then(unframe);
        let Some(json) = json else {
            if is_last {
                return Ok(torn(records));
            }
            return Err(JournalError::ChecksumMismatch { line: line_no, after_sequence: last_seq });
        };
        let record = JournalRecord::<E>::decode(json, line_no)?;
        if let Some(prev) = records.last() {
            if record.sequence != prev.sequence + 1 {
                return Err(JournalError::SequenceGap { expected: prev.sequence + 1, got: record.sequence });
            }
        }
        records.push(record);
        offset += n + 1;
    }
    Ok(JournalContents { records, valid_len: offset as u64, torn_bytes: 0 })
}

pub fn read_journal<E: DeserializeOwned>(path: &Path) -> Result<JournalContents<E>, JournalError> {
    match fs::read(path) {
        Ok(bytes) => parse_journal(&bytes),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(JournalContents { records: Vec::new(), valid_len: 0, torn_bytes: 0 }),
        Err(e) => Err(e.into()),
    }
}

/// Where journal lines go.
pub trait JournalSink: Send + Sync {
    fn write_line(&mut self, line: &[u8]) -> io::Result<()>;
    fn sync(&mut self) -> io::Result<()>;
}

impl JournalSink for File {
    fn write_line(&mut self, line: &[u8]) -> io::Result<()> {
        self.write_all(line)
    }

    fn sync(&mut self) -> io::Result<()> {
        self.sync_data()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlushPolicy {
    /// fsync after every event before it is acknowledged.
    #[default]
    PerEvent,
    /// Leave flushing to the OS. For tests and bulk loads.
    Batch,
}

pub struct Journal {
    sink: Box<dyn JournalSink>,
    last_sequence: u64,
    policy: FlushPolicy,
    poisoned: bool,
}

impl std::fmt::Debug for Journal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Journal")
            .field("last_sequence", &self.last_sequence)
            .field("policy", &self.policy)
            .field("poisoned", &self.poisoned)
            .finish()
    }
}

impl Journal {
    pub fn new(sink: Box<dyn JournalSink>, last_sequence: u64, policy: FlushPolicy) -> Self {
        Journal { sink, last_sequence, policy, poisoned: false }
    }

    /// Opens `path` for appending, first cutting it back to `valid_len`
    /// bytes to discard a torn tail.
    pub fn open_file(path: &Path, valid_len: u64, last_sequence: u64, policy: FlushPolicy) -> Result<Self, JournalError> {
        let file = OpenOptions::new().create(true).append(true).read(true).open(path)?;
        if file.metadata()?.len() != valid_len {
            file.set_len(valid_len)?;
            file.sync_all()?;
        }
        Ok(Journal::new(Box::new(file), last_sequence, policy))
    }

    pub fn last_sequence(&self) -> u64 {
        self.last_sequence
    }

    pub fn append<E: Serialize>(&mut self, record: &JournalRecord<E>) -> Result<(), JournalError> {
        if self.poisoned {
            return Err(JournalError::Poisoned);
        }
        let expected = self.last_sequence + 1;
        if record.sequence != expected {
            return Err(JournalError::SequenceGap { expected, got: record.sequence });
        }
        let line = record.encode()?;
        let written = self.sink.write_line(line.as_bytes()).and_then(|_| match self.policy {
            FlushPolicy::PerEvent => self.sink.sync(),
            FlushPolicy::Batch => Ok(()),
        });
        if let Err(e) = written {
            // a partial line may be on disk; the next open truncates it
            self.poisoned = true;
            return Err(e.into());
        }
        self.last_sequence = record.sequence;
        Ok(())
    }
}

/// A point-in-time copy of the full state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<S> {
    pub as_of_sequence: u64,
    pub state: S,
}

#[derive(Serialize)]
struct SnapshotRef<'a, S> {
    as_of_sequence: u64,
    state: &'a S,
}

#[derive(serde::Deserialize)]
struct SnapshotOwned<S> {
    as_of_sequence: u64,
    state: S,
}

pub fn encode_snapshot<S: Serialize>(as_of_sequence: u64, state: &S) -> Result<String, JournalError> {
    Ok(frame(&canonical_json(&SnapshotRef { as_of_sequence, state })?))
}

pub fn decode_snapshot<S: DeserializeOwned>(text: &str) -> Result<Snapshot<S>, JournalError> {
    let line = text.strip_suffix('\n').ok_or(JournalError::ChecksumMismatch { line: 1, after_sequence: 0 })?;
    let json = unframe(line).ok_or(JournalError::ChecksumMismatch { line: 1, after_sequence: 0 })?;
    let snap: SnapshotOwned<S> = serde_json::from_str(json).map_err(|e| JournalError::Malformed { line: 1, reason: e.to_string() })?;
    Ok(Snapshot { as_of_sequence: snap.as_of_sequence, state: snap.state })
}

/// Writes a snapshot atomically (temp file, fsync, rename).
pub fn write_snapshot<S: Serialize>(path: &Path, as_of_sequence: u64, state: &S) -> Result<(), JournalError> {
    let text = encode_snapshot(as_of_sequence, state)?;
    write_atomically(path, text.as_bytes())
}

pub fn read_snapshot<S: DeserializeOwned>(path: &Path) -> Result<Option<Snapshot<S>>, JournalError> {
    match fs::read_to_string(path) {
        Ok(text) => decode_snapshot(&text).map(Some),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Drops journal records at or below `as_of_sequence`, keeping the suffix.
pub fn compact_journal(path: &Path, as_of_sequence: u64) -> Result<usize, JournalError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    let contents = parse_journal::<Value>(&bytes)?;
    let mut kept = String::new();
    let mut dropped = 0;
    for record in &contents.records {
        if record.sequence <= as_of_sequence {
            dropped += 1;
        } else {
            kept.push_str(&record.encode()?);
        }
    }
    write_atomically(path, kept.as_bytes())?;
    Ok(dropped)
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), JournalError> {
    let mut tmp = PathBuf::from(path);
    tmp.as_mut_os_string().push(".tmp");
    {
        let mut file = File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
