//! Operational shell around the `homeminer` library: an append-only journal
//! whose fold is the service state, event intake, metrics, a JSON HTTP API
//! and the `homeminer` command line.

pub mod api;
pub mod cli;
pub mod clock;
pub mod fixtures;
pub mod intake;
pub mod journal;
pub mod metrics;
pub mod state;
pub mod store;

pub use clock::{Clock, SystemClock, VirtualClock};
pub use journal::Record;
pub use metrics::{compute_metrics, MetricsSnapshot, MetricsWindow};
pub use state::{ServiceState, Snapshot};
pub use store::{SharedStore, Store};
