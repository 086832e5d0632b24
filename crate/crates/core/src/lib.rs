//! Mining smart-home event logs for habits and turning them into
//! energy-saving recommendations.
//!
//! The pipeline runs left to right:
//!
//! * [`events`] parses logs and maps events to compact symbols,
//! * [`wsdd`] mines frequent (and periodic) contiguous patterns,
//! * [`rules`] turns patterns that end in an energy-lowering action into
//!   association rules and manages their lifecycle under user feedback,
//! * [`engine`] matches rules against a live event stream and emits
//!   recommendations.
//!
//! [`oracle`] holds reference miners for differential testing and
//! [`bench`] holds synthetic data generators and the benchmark harness.

pub mod bench;
pub mod engine;
pub mod events;
pub mod oracle;
pub mod rules;
pub mod wsdd;
