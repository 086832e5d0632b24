//! Getting events into the store: replay of a finished log and tailing a
//! growing one.

use std::fs::File;
use std::io::{self, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration as StdDuration;

use chrono::Duration;
use homeminer::engine::Recommendation;
use homeminer::events::{parse_event_line, parse_log, Event, EventError, EventLog, LogFormat};
use thiserror::Error;

use crate::clock::VirtualClock;
use crate::journal::Record;
use crate::store::{SharedStore, Store, StoreError};

#[derive(Debug, Error)]
pub enum IntakeError {
    #[error("cannot open {path}: {source}")]
    Open { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Parse(#[from] EventError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Reads a whole log; the format follows the file extension.
pub fn load_log(path: impl AsRef<Path>) -> Result<EventLog, IntakeError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IntakeError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = parse_log(io::BufReader::new(file), LogFormat::from_path(path))?;
    Ok(parsed.log)
}

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    /// Virtual seconds per real second; `None` replays without sleeping.
    pub speed: Option<f64>,
    /// After the last event, let time run on by this much so pending
    /// completions resolve.
    pub flush_after: Option<Duration>,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            speed: Some(1000.0),
            flush_after: Some(Duration::hours(1)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReplayReport {
    pub events: usize,
    pub rejected: usize,
    pub recommendations: Vec<Recommendation>,
}

/// Feeds `events` in order, keeping `clock` at the time of the current
/// event. Rejected events are logged and counted. The output does not
/// depend on `speed`.
pub fn replay(
    store: &mut Store,
    events: &[Event],
    options: &ReplayOptions,
    clock: Option<&VirtualClock>,
) -> Result<ReplayReport, IntakeError> {
    let mut report = ReplayReport::default();
    let mut previous: Option<chrono::DateTime<chrono::Utc>> = None;
    for event in events {
        if let (Some(speed), Some(prev)) = (options.speed, previous) {
            let gap = (event.timestamp - prev).num_milliseconds().max(0) as f64;
            if speed > 0.0 && gap > 0.0 {
                std::thread::sleep(StdDuration::from_secs_f64(gap / 1000.0 / speed));
            }
        }
        previous = Some(event.timestamp);
        if let Some(c) = clock {
            c.set(event.timestamp);
        }
        match store.submit(Record::Event { event: event.clone() }) {
            Ok(out) => report.recommendations.extend(out.emitted),
            Err(StoreError::Rejected(e)) => {
                tracing::warn!(%e, "event rejected");
                report.rejected += 1;
            }
            Err(e) => return Err(e.into()),
        }
        report.events += 1;
    }
    if let (Some(after), Some(last)) = (options.flush_after, events.last()) {
        let at = last.timestamp + after;
        if let Some(c) = clock {
            c.set(at);
        }
        let out = store.submit(Record::Tick {
            home_id: last.home_id.clone(),
            at,
        })?;
        report.recommendations.extend(out.emitted);
    }
    Ok(report)
}

/// Follows a JSONL file as it grows. Incomplete trailing lines are held
/// back until their newline arrives; a truncated file is read again from
/// the start.
#[derive(Debug)]
pub struct Tail {
    path: PathBuf,
    offset: u64,
    partial: Vec<u8>,
    pub skipped: usize,
}

pub const DEFAULT_POLL_INTERVAL: StdDuration = StdDuration::from_secs(1);

impl Tail {
    /// Starts at the beginning of the file, which must exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, IntakeError> {
        let path = path.as_ref().to_path_buf();
        File::open(&path).map_err(|source| IntakeError::Open {
            path: path.clone(),
            source,
        })?;
        Ok(Tail {
            path,
            offset: 0,
            partial: Vec::new(),
            skipped: 0,
        })
    }

    /// Starts at the current end of the file.
    pub fn open_at_end(path: impl AsRef<Path>) -> Result<Self, IntakeError> {
        let mut tail = Self::open(path)?;
        tail.offset = std::fs::metadata(&tail.path).map(|m| m.len()).unwrap_or(0);
        Ok(tail)
    }

    /// Events appended since the last poll.
    pub fn poll(&mut self) -> io::Result<Vec<Event>> {
        let mut file = File::open(&self.path)?;
        let len = file.metadata()?.len();
        if len < self.offset {
            tracing::warn!(path = %self.path.display(), "tailed file shrank; starting over");
            self.offset = 0;
            self.partial.clear();
        }
        file.seek(SeekFrom::Start(self.offset))?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)?;
        self.offset += buf.len() as u64;
        self.partial.extend_from_slice(&buf);

        let mut events = Vec::new();
        let complete = match self.partial.iter().rposition(|&b| b == b'\n') {
            Some(i) => i + 1,
            None => return Ok(events),
        };
        let lines: Vec<u8> = self.partial.drain(..complete).collect();
        for line in String::from_utf8_lossy(&lines).lines() {
            if line.trim().is_empty() {
                continue;
            }
            match parse_event_line(line) {
                Some(e) => events.push(e),
                None => {
                    self.skipped += 1;
                    tracing::warn!(line, "skipping malformed tailed line");
                }
            }
        }
        Ok(events)
    }
}

/// Polls `tail` every `interval` and submits what it finds until `stop`
/// is set.
pub async fn run_tail(store: SharedStore, mut tail: Tail, interval: StdDuration, stop: Arc<AtomicBool>) {
    while !stop.load(Ordering::Relaxed) {
        match tail.poll() {
            Ok(events) => {
                let mut store = store.lock().expect("store lock");
                for event in events {
                    if let Err(e) = store.submit(Record::Event { event }) {
                        tracing::warn!(%e, "tailed event rejected");
                    }
                }
            }
            Err(e) => tracing::warn!(%e, "tail poll failed"),
        }
        tokio::time::sleep(interval).await;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const LINE: &str = r#"{"ts":"2012-04-28T13:26:38Z","home":"H1","zone":"Z3","zone_name":"living room","device":"D17","scene":434,"source":377,"group":"lighting"}"#;

    #[test]
    fn tail_holds_back_partial_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("live.jsonl");
        std::fs::write(&path, "").unwrap();
        let mut tail = Tail::open(&path).unwrap();
        assert!(tail.poll().unwrap().is_empty());

        let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "{LINE}\n{}", &LINE[..20]).unwrap();
        f.flush().unwrap();
        assert_eq!(tail.poll().unwrap().len(), 1);
        write!(f, "{}\nbroken\n", &LINE[20..]).unwrap();
        f.flush().unwrap();
        assert_eq!(tail.poll().unwrap().len(), 1);
        assert_eq!(tail.skipped, 1);

        std::fs::write(&path, format!("{LINE}\n")).unwrap();
        assert_eq!(tail.poll().unwrap().len(), 1);
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(matches!(
            load_log("/definitely/not/here.jsonl"),
            Err(IntakeError::Open { .. })
        ));
        assert!(Tail::open("/definitely/not/here.jsonl").is_err());
    }
}
