//! Append-only JSONL journal. Every state change of the service is one
//! record; the service state is the fold of the journal.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use homeminer::engine::EngineConfig;
use homeminer::events::{iso, Event, SymbolEntry, SymbolPolicy};
use homeminer::rules::{AssociationRule, Vote};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    /// Installs (or replaces) a home's symbol table, rules and engine
    /// configuration.
    RulesLoaded {
        home_id: String,
        policy: SymbolPolicy,
        symbols: Vec<SymbolEntry>,
        rules: Vec<AssociationRule>,
        config: EngineConfig,
    },
    Event {
        event: Event,
    },
    /// Time passed without events.
    Tick {
        home_id: String,
        #[serde(with = "iso")]
        at: DateTime<Utc>,
    },
    Feedback {
        recommendation_id: String,
        vote: Vote,
        #[serde(with = "iso")]
        at: DateTime<Utc>,
    },
    ResetRule {
        home_id: String,
        rule_id: String,
        #[serde(with = "iso")]
        at: DateTime<Utc>,
    },
    /// Refits the feedback regression and re-weights the home's rules,
    /// excluding the given share of them.
    Refit {
        home_id: String,
        exclude_fraction: f64,
        #[serde(with = "iso")]
        at: DateTime<Utc>,
    },
}

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal i/o: {0}")]
    Io(#[from] io::Error),
    #[error("journal line {line} is corrupt: {reason}")]
    Corrupt { line: usize, reason: String },
}

/// Reads every record. A torn final line (a crash mid-append) is dropped;
/// corruption anywhere else is an error. Returns the records and the byte
/// length of the valid prefix.
pub fn read_records<R: io::Read>(input: R) -> Result<(Vec<Record>, u64), JournalError> {
    let mut reader = BufReader::new(input);
    let mut records = Vec::new();
    let mut valid = 0u64;
    let mut line = String::new();
    let mut number = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 {
            break;
        }
        number += 1;
        let complete = line.ends_with('\n');
        if line.trim().is_empty() {
            if complete {
                valid += read as u64;
            }
            continue;
        }
        if !complete {
            tracing::warn!(line = number, "dropping torn journal tail");
            break;
        }
        match serde_json::from_str::<Record>(line.trim_end()) {
            Ok(r) => {
                records.push(r);
                valid += read as u64;
            }
            Err(e) => {
                return Err(JournalError::Corrupt {
                    line: number,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok((records, valid))
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
    records: u64,
}

impl Journal {
    /// Opens or creates the journal and returns it with its records.
    pub fn open(path: impl AsRef<Path>) -> Result<(Journal, Vec<Record>), JournalError> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .read(true)
            .write(true)
            .open(&path)?;
        let (records, valid) = read_records(&mut file)?;
        let len = file.metadata()?.len();
        if valid < len {
            file.set_len(valid)?;
        }
        file.seek(SeekFrom::Start(valid))?;
        let journal = Journal {
            path,
            file,
            records: records.len() as u64,
        };
        Ok((journal, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> u64 {
        self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records == 0
    }

    /// Appends and syncs one record.
    pub fn append(&mut self, record: &Record) -> Result<(), JournalError> {
        let mut line = serde_json::to_vec(record).map_err(io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.records += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn tick(min: u32) -> Record {
        Record::Tick {
            home_id: "H1".into(),
            at: Utc.with_ymd_and_hms(2014, 1, 1, 0, min, 0).unwrap(),
        }
    }

    #[test]
    fn round_trip_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        {
            let (mut j, records) = Journal::open(&path).unwrap();
            assert!(records.is_empty());
            j.append(&tick(1)).unwrap();
            j.append(&tick(2)).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"kind":"tick","home_"#).unwrap();
        drop(f);

        let (mut j, records) = Journal::open(&path).unwrap();
        assert_eq!(records, vec![tick(1), tick(2)]);
        j.append(&tick(3)).unwrap();
        drop(j);
        let (_, records) = Journal::open(&path).unwrap();
        assert_eq!(records, vec![tick(1), tick(2), tick(3)]);
    }

    #[test]
    fn corruption_in_the_middle_is_an_error() {
        let text = format!(
            "{}\nnot json\n{}\n",
            serde_json::to_string(&tick(1)).unwrap(),
            serde_json::to_string(&tick(2)).unwrap()
        );
        assert!(matches!(
            read_records(text.as_bytes()),
            Err(JournalError::Corrupt { line: 2, .. })
        ));
    }

    #[test]
    fn wire_format() {
        let rec = Record::Feedback {
            recommendation_id: "H1-000001".into(),
            vote: Vote::NotUseful,
            at: Utc.with_ymd_and_hms(2014, 1, 1, 0, 0, 0).unwrap(),
        };
        assert_eq!(
            serde_json::to_string(&rec).unwrap(),
            r#"{"kind":"feedback","recommendation_id":"H1-000001","vote":"not_useful","at":"2014-01-01T00:00:00Z"}"#
        );
    }
}
