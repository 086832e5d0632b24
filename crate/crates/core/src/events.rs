//! Smart-home event model, log parsing and symbolization.
//!
//! An [`Event`] is one scene activation on a device in a zone. Logs are
//! line-oriented (JSONL or CSV with a header row) and are always returned in
//! `(timestamp, line number)` order. Mining and matching work on compact
//! [`Symbol`]s rather than raw events; [`symbolize`] performs that mapping
//! under a [`SymbolPolicy`] and records a [`SymbolTable`] for display.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EventError {
    #[error("i/o error reading event log: {0}")]
    Io(#[from] io::Error),
    #[error("{malformed} of {total} lines are malformed; is the log format correct?")]
    Format { malformed: usize, total: usize },
    #[error("invalid symbol table entry on line {line}: {reason}")]
    SymbolTable { line: usize, reason: String },
}

/// ISO-8601 UTC timestamps with second precision, e.g. `2012-04-28T13:26:38Z`.
pub mod iso {
    use chrono::{DateTime, SecondsFormat, Timelike, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn format(ts: &DateTime<Utc>) -> String {
        ts.to_rfc3339_opts(SecondsFormat::Secs, true)
    }

    pub fn parse(s: &str) -> Result<DateTime<Utc>, chrono::ParseError> {
        let ts = DateTime::parse_from_rfc3339(s.trim())?.with_timezone(&Utc);
        Ok(ts.with_nanosecond(0).unwrap_or(ts))
    }

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            ts: &Option<DateTime<Utc>>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            match ts {
                Some(ts) => s.serialize_some(&format(ts)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<DateTime<Utc>>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|raw| parse(&raw).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

/// Functional device group. Unrecognised group names map to `Unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeviceGroup {
    Lighting,
    Shades,
    Heating,
    Audio,
    Video,
    Security,
    Access,
    Joker,
    Broadcast,
    Unknown,
}

impl DeviceGroup {
    pub const ALL: [DeviceGroup; 10] = [
        DeviceGroup::Lighting,
        DeviceGroup::Shades,
        DeviceGroup::Heating,
        DeviceGroup::Audio,
        DeviceGroup::Video,
        DeviceGroup::Security,
        DeviceGroup::Access,
        DeviceGroup::Joker,
        DeviceGroup::Broadcast,
        DeviceGroup::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DeviceGroup::Lighting => "lighting",
            DeviceGroup::Shades => "shades",
            DeviceGroup::Heating => "heating",
            DeviceGroup::Audio => "audio",
            DeviceGroup::Video => "video",
            DeviceGroup::Security => "security",
            DeviceGroup::Access => "access",
            DeviceGroup::Joker => "joker",
            DeviceGroup::Broadcast => "broadcast",
            DeviceGroup::Unknown => "unknown",
        }
    }

    /// Broadcast and unknown events are not tied to a specific device group.
    pub fn is_unscoped(self) -> bool {
        matches!(self, DeviceGroup::Broadcast | DeviceGroup::Unknown)
    }
}

impl fmt::Display for DeviceGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceGroup {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(DeviceGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == lower)
            .unwrap_or(DeviceGroup::Unknown))
    }
}

impl Serialize for DeviceGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DeviceGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Ok(raw.parse().unwrap_or(DeviceGroup::Unknown))
    }
}

/// One timestamped smart-home action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "ts", with = "iso")]
    pub timestamp: DateTime<Utc>,
    #[serde(rename = "home")]
    pub home_id: String,
    #[serde(rename = "zone")]
    pub zone_id: String,
    pub zone_name: String,
    #[serde(rename = "device")]
    pub device_id: String,
    #[serde(rename = "scene")]
    pub scene_id: u32,
    #[serde(rename = "source")]
    pub source_id: u32,
    pub group: DeviceGroup,
}

/// The events of a single home in chronological order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventLog {
    pub home_id: String,
    events: Vec<Event>,
}

impl EventLog {
    /// Builds a log, stable-sorting by timestamp so equal timestamps keep
    /// their input order.
    pub fn from_events(home_id: impl Into<String>, mut events: Vec<Event>) -> Self {
        events.sort_by_key(|e| e.timestamp);
        EventLog {
            home_id: home_id.into(),
            events,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Keeps only the events accepted by `filter`, preserving order.
    pub fn filtered(&self, filter: &EventFilter) -> EventLog {
        EventLog {
            home_id: self.home_id.clone(),
            events: self
                .events
                .iter()
                .filter(|e| filter.accepts(e))
                .cloned()
                .collect(),
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.events.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for e in &self.events {
            w.serialize(e).map_err(io::Error::other)?;
        }
        w.flush()
    }
}

const CSV_HEADER: [&str; 8] = [
    "ts",
    "home",
    "zone",
    "zone_name",
    "device",
    "scene",
    "source",
    "group",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Jsonl,
    Csv,
}

impl FromStr for LogFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(LogFormat::Jsonl),
            "csv" => Ok(LogFormat::Csv),
            other => Err(format!("unknown log format `{other}`")),
        }
    }
}

impl LogFormat {
    /// Guesses the format from a file name, defaulting to JSONL.
    pub fn from_path(path: &std::path::Path) -> LogFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => LogFormat::Csv,
            _ => LogFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedLog {
    pub log: EventLog,
    /// Lines that could not be decoded as events.
    pub skipped: usize,
    /// Well-formed lines belonging to a different home than the first event.
    pub foreign: usize,
}

/// Parses a line-oriented event log.
///
/// Malformed lines are skipped and counted. If more than half of the
/// non-blank lines are malformed the whole input is rejected, which almost
/// always means the wrong format was selected.
pub fn parse_log<R: Read>(input: R, format: LogFormat) -> Result<ParsedLog, EventError> {
    let (decoded, total) = match format {
        LogFormat::Jsonl => decode_jsonl(input)?,
        LogFormat::Csv => decode_csv(input)?,
    };
    let malformed = decoded.iter().filter(|d| d.is_none()).count();
    if malformed * 2 > total {
        return Err(EventError::Format { malformed, total });
    }

    let mut home_id: Option<String> = None;
    let mut events = Vec::with_capacity(decoded.len());
    let mut foreign = 0;
    for event in decoded.into_iter().flatten() {
        let home = home_id.get_or_insert_with(|| event.home_id.clone());
        if *home == event.home_id {
            events.push(event);
        } else {
            foreign += 1;
        }
    }
    if malformed > 0 || foreign > 0 {
        tracing::warn!(malformed, foreign, "skipped event log lines");
    }
    Ok(ParsedLog {
        log: EventLog::from_events(home_id.unwrap_or_default(), events),
        skipped: malformed,
        foreign,
    })
}

/// Decodes a single JSONL event line.
pub fn parse_event_line(line: &str) -> Option<Event> {
    serde_json::from_str(line).ok()
}

fn decode_jsonl<R: Read>(input: R) -> Result<(Vec<Option<Event>>, usize), EventError> {
    let reader = BufReader::new(input);
    let mut out = Vec::new();
    for raw in reader.split(b'\n') {
        let raw = raw?;
        let line = String::from_utf8_lossy(&raw);
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_event_line(&line));
    }
    let total = out.len();
    Ok((out, total))
}

fn decode_csv<R: Read>(input: R) -> Result<(Vec<Option<Event>>, usize), EventError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let mut out = Vec::new();
    for record in reader.deserialize::<Event>() {
        match record {
            Ok(e) => out.push(Some(e)),
            Err(err) => match err.into_kind() {
                csv::ErrorKind::Io(io) => return Err(EventError::Io(io)),
                _ => out.push(None),
            },
        }
    }
    let total = out.len();
    Ok((out, total))
}

/// Selects which events take part in mining and matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventFilter {
    /// Source ids known to be timers, scripts or sensors.
    pub non_user_sources: BTreeSet<u32>,
    /// Drop events from `non_user_sources`.
    pub user_only: bool,
    /// Keep broadcast and unknown-group events.
    pub include_unscoped: bool,
}

impl Default for EventFilter {
    fn default() -> Self {
        EventFilter {
            non_user_sources: BTreeSet::new(),
            user_only: true,
            include_unscoped: true,
        }
    }
}

impl EventFilter {
    pub fn accepts(&self, event: &Event) -> bool {
        if self.user_only && self.non_user_sources.contains(&event.source_id) {
            return false;
        }
        self.include_unscoped || !event.group.is_unscoped()
    }
}

/// Compact token standing for one kind of event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

impl FromStr for Symbol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('S')
            .and_then(|n| n.parse().ok())
            .map(Symbol)
            .ok_or_else(|| format!("invalid symbol `{s}`"))
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// How coarsely events are merged into symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// `(zone, device, scene)`
    #[default]
    Device,
    /// `(zone, group, scene)`
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymbolPolicy {
    pub granularity: Granularity,
}

impl SymbolPolicy {
    pub fn device() -> Self {
        SymbolPolicy {
            granularity: Granularity::Device,
        }
    }

    pub fn group() -> Self {
        SymbolPolicy {
            granularity: Granularity::Group,
        }
    }

    fn key(&self, e: &Event) -> SymbolKey {
        let unit = match self.granularity {
            Granularity::Device => e.device_id.clone(),
            Granularity::Group => e.group.as_str().to_string(),
        };
        SymbolKey {
            zone_id: e.zone_id.clone(),
            unit,
            scene_id: e.scene_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SymbolKey {
    zone_id: String,
    unit: String,
    scene_id: u32,
}

/// Human-readable description of a symbol, as exported to `symbols.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolEntry {
    pub symbol: Symbol,
    pub desc: String,
    pub zone_name: String,
    #[serde(rename = "zone")]
    pub zone_id: String,
    /// Device id or group name, depending on the policy.
    pub unit: String,
    pub group: DeviceGroup,
    #[serde(rename = "scene")]
    pub scene_id: u32,
}

impl SymbolEntry {
    /// Room name for display, falling back to the zone id when unnamed.
    pub fn display_zone(&self) -> &str {
        if self.zone_name.trim().is_empty() {
            &self.zone_id
        } else {
            &self.zone_name
        }
    }

    fn key(&self) -> SymbolKey {
        SymbolKey {
            zone_id: self.zone_id.clone(),
            unit: self.unit.clone(),
            scene_id: self.scene_id,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    policy: SymbolPolicy,
    entries: Vec<SymbolEntry>,
    index: HashMap<SymbolKey, Symbol>,
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.policy == other.policy && self.entries == other.entries
    }
}

impl SymbolTable {
    pub fn new(policy: SymbolPolicy) -> Self {
        SymbolTable {
            policy,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Rebuilds a table from exported entries. Symbols must be dense and
    /// in order (`S0`, `S1`, ...).
    pub fn from_entries(
        policy: SymbolPolicy,
        entries: Vec<SymbolEntry>,
    ) -> Result<Self, EventError> {
        let mut table = SymbolTable::new(policy);
        for (i, entry) in entries.into_iter().enumerate() {
            if entry.symbol != Symbol(i as u32) {
                return Err(EventError::SymbolTable {
                    line: i + 1,
                    reason: format!("expected S{i}, found {}", entry.symbol),
                });
            }
            if table.index.insert(entry.key(), entry.symbol).is_some() {
                return Err(EventError::SymbolTable {
                    line: i + 1,
                    reason: "duplicate symbol key".into(),
                });
            }
            table.entries.push(entry);
        }
        Ok(table)
    }

    pub fn policy(&self) -> SymbolPolicy {
        self.policy
    }

    pub fn entries(&self) -> &[SymbolEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, symbol: Symbol) -> Option<&SymbolEntry> {
        self.entries.get(symbol.0 as usize)
    }

    /// The symbol for an event, if this kind of event has been seen before.
    pub fn lookup(&self, event: &Event) -> Option<Symbol> {
        self.index.get(&self.policy.key(event)).copied()
    }

    pub fn intern(&mut self, event: &Event) -> Symbol {
        let key = self.policy.key(event);
        if let Some(&sym) = self.index.get(&key) {
            return sym;
        }
        let symbol = Symbol(self.entries.len() as u32);
        let desc = format!("{} / {} / scene {}", event.zone_name, key.unit, event.scene_id);
        self.entries.push(SymbolEntry {
            symbol,
            desc,
            zone_name: event.zone_name.clone(),
            zone_id: event.zone_id.clone(),
            unit: key.unit.clone(),
            group: event.group,
            scene_id: event.scene_id,
        });
        self.index.insert(key, symbol);
        symbol
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for entry in &self.entries {
            serde_json::to_writer(&mut out, entry)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn read_jsonl<R: Read>(input: R, policy: SymbolPolicy) -> Result<Self, EventError> {
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line).map_err(|e| EventError::SymbolTable {
                line: i + 1,
                reason: e.to_string(),
            })?;
            entries.push(entry);
        }
        SymbolTable::from_entries(policy, entries)
    }
}

/// A log reduced to symbols, with timestamps in Unix seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolizedLog {
    pub symbols: Vec<Symbol>,
    pub timestamps: Vec<i64>,
    pub table: SymbolTable,
}

/// Maps every event to a symbol. Symbols are numbered in order of first
/// appearance, so the result depends only on the log and the policy.
pub fn symbolize(log: &EventLog, policy: SymbolPolicy) -> SymbolizedLog {
    let mut table = SymbolTable::new(policy);
    let symbols = log.events().iter().map(|e| table.intern(e)).collect();
    let timestamps = log.events().iter().map(|e| e.timestamp.timestamp()).collect();
    SymbolizedLog {
        symbols,
        timestamps,
        table,
    }
}

/// Symbolizes a log against an existing table; events the table has never
/// seen yield `None`.
pub fn symbolize_with(log: &EventLog, table: &SymbolTable) -> Vec<Option<Symbol>> {
    log.events().iter().map(|e| table.lookup(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIVING_ROOM: &str = r#"{"ts":"2012-04-28T13:26:38Z","home":"H1","zone":"Z3","zone_name":"living room","device":"D17","scene":434,"source":377,"group":"lighting"}
{"ts":"2012-04-28T13:30:39Z","home":"H1","zone":"Z3","zone_name":"living room","device":"D17","scene":424,"source":381,"group":"lighting"}
{"ts":"2012-04-28T13:41:50Z","home":"H1","zone":"Z3","zone_name":"living room","device":"D17","scene":422,"source":381,"group":"lighting"}
"#;

    #[test]
    fn parses_living_room_example_in_order() {
        let parsed = parse_log(LIVING_ROOM.as_bytes(), LogFormat::Jsonl).unwrap();
        let scenes: Vec<u32> = parsed.log.events().iter().map(|e| e.scene_id).collect();
        assert_eq!(scenes, vec![434, 424, 422]);
        assert_eq!(parsed.skipped, 0);
        assert_eq!(parsed.log.home_id, "H1");
        assert_eq!(
            iso::format(&parsed.log.events()[2].timestamp),
            "2012-04-28T13:41:50Z"
        );
    }

    #[test]
    fn empty_input_is_empty_log() {
        let parsed = parse_log(&b""[..], LogFormat::Jsonl).unwrap();
        assert!(parsed.log.is_empty());
        assert_eq!(parsed.skipped, 0);
        let parsed = parse_log(&b""[..], LogFormat::Csv).unwrap();
        assert!(parsed.log.is_empty());
    }

    #[test]
    fn malformed_lines_are_skipped_until_majority() {
        let mut input = LIVING_ROOM.to_string();
        input.push_str("not json\n");
        let parsed = parse_log(input.as_bytes(), LogFormat::Jsonl).unwrap();
        assert_eq!(parsed.log.len(), 3);
        assert_eq!(parsed.skipped, 1);

        input.push_str("nope\n{\"ts\":1}\n");
        assert_eq!(parse_log(input.as_bytes(), LogFormat::Jsonl).unwrap().skipped, 3);
        input.push_str("[]\n");
        let err = parse_log(input.as_bytes(), LogFormat::Jsonl).unwrap_err();
        assert!(matches!(err, EventError::Format { malformed: 4, total: 7 }));
    }

    #[test]
    fn wrong_format_is_rejected() {
        let err = parse_log(LIVING_ROOM.as_bytes(), LogFormat::Csv).unwrap_err();
        assert!(matches!(err, EventError::Format { .. }));
    }

    #[test]
    fn negative_scene_is_malformed() {
        let line = LIVING_ROOM.lines().next().unwrap().replace("434", "-4");
        let input = format!("{LIVING_ROOM}{line}\n");
        let parsed = parse_log(input.as_bytes(), LogFormat::Jsonl).unwrap();
        assert_eq!(parsed.skipped, 1);
    }

    #[test]
    fn csv_with_quoting() {
        let input = "ts,home,zone,zone_name,device,scene,source,group\n\
                     2012-04-28T13:26:38Z,H1,Z3,\"living room, north\",D17,434,377,lighting\n";
        let parsed = parse_log(input.as_bytes(), LogFormat::Csv).unwrap();
        assert_eq!(parsed.log.events()[0].zone_name, "living room, north");
    }

    #[test]
    fn foreign_home_lines_are_dropped() {
        let extra = LIVING_ROOM.lines().next().unwrap().replace("H1", "H2");
        let input = format!("{LIVING_ROOM}{extra}\n");
        let parsed = parse_log(input.as_bytes(), LogFormat::Jsonl).unwrap();
        assert_eq!(parsed.log.len(), 3);
        assert_eq!(parsed.foreign, 1);
    }

    #[test]
    fn unknown_group_maps_to_unknown() {
        let line = LIVING_ROOM.lines().next().unwrap().replace("lighting", "toaster");
        let e = parse_event_line(&line).unwrap();
        assert_eq!(e.group, DeviceGroup::Unknown);
    }

    #[test]
    fn device_policy_gives_distinct_symbols_for_example() {
        let parsed = parse_log(LIVING_ROOM.as_bytes(), LogFormat::Jsonl).unwrap();
        let s = symbolize(&parsed.log, SymbolPolicy::device());
        assert_eq!(s.symbols, vec![Symbol(0), Symbol(1), Symbol(2)]);
        assert_eq!(s.table.get(Symbol(0)).unwrap().desc, "living room / D17 / scene 434");
    }

    #[test]
    fn same_event_kind_same_symbol() {
        let parsed = parse_log(LIVING_ROOM.as_bytes(), LogFormat::Jsonl).unwrap();
        let mut events = parsed.log.into_events();
        let mut again = events[0].clone();
        again.timestamp += chrono::Duration::hours(3);
        events.push(again);
        let log = EventLog::from_events("H1", events);
        let s = symbolize(&log, SymbolPolicy::device());
        assert_eq!(s.symbols[0], s.symbols[3]);
    }

    #[test]
    fn group_policy_merges_devices() {
        let parsed = parse_log(LIVING_ROOM.as_bytes(), LogFormat::Jsonl).unwrap();
        let mut events = parsed.log.into_events();
        let mut other = events[0].clone();
        other.device_id = "D99".into();
        other.timestamp += chrono::Duration::hours(1);
        events.push(other);
        let log = EventLog::from_events("H1", events);
        let by_device = symbolize(&log, SymbolPolicy::device());
        let by_group = symbolize(&log, SymbolPolicy::group());
        assert_ne!(by_device.symbols[0], by_device.symbols[3]);
        assert_eq!(by_group.symbols[0], by_group.symbols[3]);
    }

    #[test]
    fn filter_drops_non_user_and_unscoped() {
        let parsed = parse_log(LIVING_ROOM.as_bytes(), LogFormat::Jsonl).unwrap();
        let mut filter = EventFilter::default();
        filter.non_user_sources.insert(377);
        assert_eq!(parsed.log.filtered(&filter).len(), 2);
        filter.user_only = false;
        assert_eq!(parsed.log.filtered(&filter).len(), 3);

        let mut e = parsed.log.events()[0].clone();
        e.group = DeviceGroup::Broadcast;
        let log = EventLog::from_events("H1", vec![e]);
        let strict = EventFilter {
            include_unscoped: false,
            ..EventFilter::default()
        };
        assert!(log.filtered(&strict).is_empty());
        assert_eq!(log.filtered(&EventFilter::default()).len(), 1);
    }

    #[test]
    fn symbol_table_round_trips() {
        let parsed = parse_log(LIVING_ROOM.as_bytes(), LogFormat::Jsonl).unwrap();
        let s = symbolize(&parsed.log, SymbolPolicy::device());
        let mut buf = Vec::new();
        s.table.write_jsonl(&mut buf).unwrap();
        let first = String::from_utf8(buf.clone()).unwrap();
        assert!(first.starts_with(
            r#"{"symbol":"S0","desc":"living room / D17 / scene 434","zone_name":"living room""#
        ));
        let back = SymbolTable::read_jsonl(&buf[..], SymbolPolicy::device()).unwrap();
        assert_eq!(back, s.table);
        assert_eq!(back.lookup(&parsed.log.events()[1]), Some(Symbol(1)));
    }

    #[test]
    fn display_zone_falls_back_to_id() {
        let entry = SymbolEntry {
            symbol: Symbol(0),
            desc: String::new(),
            zone_name: " ".into(),
            zone_id: "Z9".into(),
            unit: "D1".into(),
            group: DeviceGroup::Lighting,
            scene_id: 0,
        };
        assert_eq!(entry.display_zone(), "Z9");
    }
}
