//! The journal together with the state it folds into.

use std::path::Path;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::journal::{Journal, JournalError, Record};
use crate::state::{ApplyError, Outcome, ServiceState, Snapshot};

pub const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error(transparent)]
    Rejected(#[from] ApplyError),
    #[error("journal record {record} does not apply: {source}")]
    Replay { record: usize, source: ApplyError },
}

/// Records are validated, appended and synced, then applied. A record that
/// would not apply never reaches the journal.
#[derive(Debug)]
pub struct Store {
    journal: Option<Journal>,
    state: ServiceState,
}

pub type SharedStore = Arc<Mutex<Store>>;

impl Store {
    /// A store that forgets everything on drop.
    pub fn in_memory() -> Self {
        Store {
            journal: None,
            state: ServiceState::new(),
        }
    }

    /// Opens `data_dir/journal.jsonl`, rebuilding the state from it.
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let (journal, records) = Journal::open(data_dir.as_ref().join(JOURNAL_FILE))?;
        let state = ServiceState::replay(&records)
            .map_err(|(record, source)| StoreError::Replay { record, source })?;
        tracing::info!(records = records.len(), path = %journal.path().display(), "journal replayed");
        Ok(Store {
            journal: Some(journal),
            state,
        })
    }

    pub fn shared(self) -> SharedStore {
        Arc::new(Mutex::new(self))
    }

    pub fn submit(&mut self, record: Record) -> Result<Outcome, StoreError> {
        self.state.validate(&record)?;
        if let Some(j) = &mut self.journal {
            j.append(&record)?;
        }
        Ok(self.state.apply(&record)?)
    }

    pub fn state(&self) -> &ServiceState {
        &self.state
    }

    pub fn snapshot(&self) -> Snapshot {
        self.state.snapshot()
    }

    pub fn is_persistent(&self) -> bool {
        self.journal.is_some()
    }
}
