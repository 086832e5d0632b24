//! The `homeminer` command line.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration as StdDuration;

use anyhow::{bail, Context, Result};
use chrono::Duration;
use clap::{Args, Parser, Subcommand, ValueEnum};
use homeminer::bench::synthetic::home_like;
use homeminer::bench::{generate, run_benchmark, write_report, BenchConfig, BenchInput, Miner};
use homeminer::engine::{EmissionPolicy, EngineConfig};
use homeminer::events::{
    symbolize, symbolize_with, EventFilter, EventLog, Symbol, SymbolPolicy, SymbolTable,
    SymbolizedLog,
};
use homeminer::rules::{extract_rules, ActionCatalog, AssociationRule, RuleConfig, SplitMode};
use homeminer::wsdd::{
    mine, read_patterns_jsonl, write_patterns_jsonl, Item, MinedPattern, MiningParams,
};

use crate::api::{router, AppState};
use crate::clock::{SystemClock, VirtualClock};
use crate::intake::{load_log, replay, run_tail, ReplayOptions, Tail, DEFAULT_POLL_INTERVAL};
use crate::journal::Record;
use crate::metrics::{compute_metrics, MetricsWindow};
use crate::store::Store;

#[derive(Debug, Parser)]
#[command(name = "homeminer", version, about = "Mine smart-home logs for habits and recommend energy savings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine frequent and periodic patterns from an event log.
    Mine(MineArgs),
    /// Work with association rules.
    #[command(subcommand)]
    Rules(RulesCommand),
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Replay a log through the recommender and print what it emits.
    Replay(ReplayArgs),
    /// Compare the miners' run time and memory.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum RulesCommand {
    /// Turn mined patterns into association rules.
    Extract(ExtractArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GranularityArg {
    Device,
    Group,
}

impl From<GranularityArg> for SymbolPolicy {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Device => SymbolPolicy::device(),
            GranularityArg::Group => SymbolPolicy::group(),
        }
    }
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Source ids of timers and scripts; their events are ignored.
    #[arg(long = "non-user-source", value_delimiter = ',')]
    pub non_user_sources: Vec<u32>,
    /// Ignore broadcast and unknown-group events.
    #[arg(long)]
    pub scoped_only: bool,
    #[arg(long, value_enum, default_value = "device")]
    pub granularity: GranularityArg,
}

impl FilterArgs {
    pub fn filter(&self) -> EventFilter {
        EventFilter {
            non_user_sources: self.non_user_sources.iter().copied().collect::<BTreeSet<_>>(),
            user_only: true,
            include_unscoped: !self.scoped_only,
        }
    }
}

#[derive(Debug, Args)]
pub struct MineArgs {
    pub log: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub min_support: f64,
    #[arg(long, default_value_t = 5)]
    pub max_window: usize,
    #[arg(long, default_value_t = 0)]
    pub wildcards: usize,
    #[arg(long, default_value_t = 0.15)]
    pub cv_threshold: f64,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Directory for `patterns.jsonl` and `symbols.jsonl`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    FirstAction,
    ActionFinal,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// `patterns.jsonl` written by `mine`.
    pub patterns: PathBuf,
    /// Action catalog (TOML or JSON). Defaults to off/standby scenes.
    #[arg(long)]
    pub actions: Option<PathBuf>,
    /// The log the patterns were mined from.
    #[arg(long)]
    pub log: PathBuf,
    /// Defaults to `symbols.jsonl` next to the patterns.
    #[arg(long)]
    pub symbols: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "first-action")]
    pub split: SplitArg,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Defaults to `rules.jsonl` next to the patterns.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(long, default_value_t = 6.0)]
    pub cooldown_hours: f64,
    #[arg(long, default_value_t = 3)]
    pub daily_cap: u32,
    #[arg(long, default_value_t = 5)]
    pub completion_timeout_mins: i64,
}

impl PolicyArgs {
    pub fn config(&self, filter: EventFilter) -> EngineConfig {
        EngineConfig {
            policy: EmissionPolicy {
                per_rule_cooldown: Duration::seconds((self.cooldown_hours * 3600.0) as i64),
                per_home_daily_cap: self.daily_cap,
                completion_timeout: Duration::minutes(self.completion_timeout_mins),
            },
            filter,
            ..EngineConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "homeminer-data")]
    pub data_dir: PathBuf,
    /// Rules to install (`rules.jsonl`); needs `--symbols`.
    #[arg(long, requires = "symbols")]
    pub rules: Option<PathBuf>,
    #[arg(long)]
    pub symbols: Option<PathBuf>,
    /// Install the rules even if the home already has rules in the journal.
    #[arg(long)]
    pub reload: bool,
    /// Static bearer token for the API.
    #[arg(long, env = "HOMEMINER_TOKEN")]
    pub token: Option<String>,
    /// Follow a growing JSONL event log.
    #[arg(long)]
    pub tail: Option<PathBuf>,
    /// Seconds between timeout/expiry ticks.
    #[arg(long, default_value_t = 60)]
    pub tick_secs: u64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub log: PathBuf,
    /// Virtual seconds per real second; 0 replays as fast as possible.
    #[arg(long, default_value_t = 1000.0)]
    pub speed: f64,
    /// Rules to replay against; mined from the log itself when omitted.
    #[arg(long, requires = "symbols")]
    pub rules: Option<PathBuf>,
    #[arg(long)]
    pub symbols: Option<PathBuf>,
    #[arg(long)]
    pub actions: Option<PathBuf>,
    /// Keep a journal here instead of replaying in memory.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// An event log, or `synthetic` for generated home-like logs.
    pub input: String,
    #[arg(long, value_delimiter = ',', default_value = "wsdd,prefix,brute")]
    pub miners: Vec<Miner>,
    /// Event counts for `synthetic`.
    #[arg(long, value_delimiter = ',', default_value = "1173,10000,40000,80000,156121")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    pub min_support: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub max_window: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    #[arg(long, default_value_t = 600)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// CSV report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn read_catalog(path: Option<&Path>) -> Result<ActionCatalog> {
    let Some(path) = path else {
        return Ok(ActionCatalog::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let catalog = if path.extension().is_some_and(|e| e == "json") {
        ActionCatalog::from_json(&text)
    } else {
        ActionCatalog::from_toml(&text)
    };
    catalog.with_context(|| format!("parsing {}", path.display()))
}

fn read_symbols(path: &Path, policy: SymbolPolicy) -> Result<SymbolTable> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    SymbolTable::read_jsonl(f, policy).with_context(|| format!("reading {}", path.display()))
}

fn read_rules(path: &Path) -> Result<Vec<AssociationRule>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    homeminer::rules::read_rules_jsonl(f).with_context(|| format!("reading {}", path.display()))
}

/// Filters and symbolizes a log, then mines it.
pub fn mine_log(log: &EventLog, filter: &EventFilter, policy: SymbolPolicy, params: &MiningParams) -> Result<(SymbolizedLog, Vec<MinedPattern>)> {
    let symbolized = symbolize(&log.filtered(filter), policy);
    let mined = mine(&symbolized.symbols, &symbolized.timestamps, params)?;
    Ok((symbolized, mined))
}

/// The mined sequence rebuilt against an existing table; events the table
/// does not know become a symbol that matches nothing.
pub fn sequence_for(log: &EventLog, filter: &EventFilter, table: &SymbolTable) -> Vec<Symbol> {
    symbolize_with(&log.filtered(filter), table)
        .into_iter()
        .map(|s| s.unwrap_or(Symbol(u32::MAX)))
        .collect()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mine(args) => cmd_mine(args),
        Command::Rules(RulesCommand::Extract(args)) => cmd_extract(args),
        Command::Serve(args) => cmd_serve(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_mine(args: MineArgs) -> Result<()> {
    let log = load_log(&args.log)?;
    let mut params = MiningParams::new(args.max_window, args.min_support).with_wildcards(args.wildcards);
    params.periodicity_cv_threshold = args.cv_threshold;
    let (symbolized, mined) = mine_log(&log, &args.filter.filter(), args.filter.granularity.into(), &params)?;
    std::fs::create_dir_all(&args.out)?;
    let patterns = args.out.join("patterns.jsonl");
    let symbols = args.out.join("symbols.jsonl");
    write_patterns_jsonl(&mined, open_out(&patterns)?)?;
    symbolized.table.write_jsonl(open_out(&symbols)?)?;
    eprintln!(
        "{}: {} events, {} symbols, {} patterns ({} periodic) -> {}",
        log.home_id,
        symbolized.symbols.len(),
        symbolized.table.len(),
        mined.len(),
        mined.iter().filter(|m| m.periodicity.is_periodic).count(),
        args.out.display()
    );
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let dir = args.patterns.parent().unwrap_or(Path::new("."));
    let symbols_path = args.symbols.clone().unwrap_or_else(|| dir.join("symbols.jsonl"));
    let out_path = args.out.clone().unwrap_or_else(|| dir.join("rules.jsonl"));

    let policy: SymbolPolicy = args.filter.granularity.into();
    let table = read_symbols(&symbols_path, policy)?;
    let catalog = read_catalog(args.actions.as_deref())?;
    let records = read_patterns_jsonl(File::open(&args.patterns).with_context(|| format!("opening {}", args.patterns.display()))?)?;
    let log = load_log(&args.log)?;
    let seq = sequence_for(&log, &args.filter.filter(), &table);
    let config = RuleConfig {
        split: match args.split {
            SplitArg::FirstAction => SplitMode::FirstAction,
            SplitArg::ActionFinal => SplitMode::ActionFinal,
        },
        ..RuleConfig::default()
    };
    let actions = catalog.resolve(&table);
    let rules = extract_rules(
        &log.home_id,
        records.iter().map(|r| r.pattern.as_slice()),
        &actions,
        &seq,
        &config,
    );
    homeminer::rules::write_rules_jsonl(&rules, open_out(&out_path)?)?;
    eprintln!("{} patterns -> {} rules -> {}", records.len(), rules.len(), out_path.display());
    Ok(())
}

fn load_record(home_id: &str, table: &SymbolTable, rules: Vec<AssociationRule>, config: EngineConfig) -> Record {
    Record::RulesLoaded {
        home_id: home_id.to_string(),
        policy: table.policy(),
        symbols: table.entries().to_vec(),
        rules,
        config,
    }
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let mut store = Store::open(&args.data_dir)?;
    if let (Some(rules_path), Some(symbols_path)) = (&args.rules, &args.symbols) {
        let table = read_symbols(symbols_path, args.filter.granularity.into())?;
        let rules = read_rules(rules_path)?;
        let Some(home_id) = rules.first().map(|r| r.home_id.clone()) else {
            bail!("{} holds no rules", rules_path.display());
        };
        if args.reload || store.state().home(&home_id).is_none() {
            store.submit(load_record(&home_id, &table, rules, args.policy.config(args.filter.filter())))?;
            tracing::info!(home = %home_id, "rules installed");
        }
    }
    let store = store.shared();
    let state = AppState {
        store: store.clone(),
        clock: Arc::new(SystemClock),
        token: args.token.clone(),
    };

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let stop = Arc::new(AtomicBool::new(false));
        if let Some(path) = &args.tail {
            let tail = Tail::open(path)?;
            tokio::spawn(run_tail(store.clone(), tail, DEFAULT_POLL_INTERVAL, stop.clone()));
        }
        let ticker_store = store.clone();
        let tick_every = StdDuration::from_secs(args.tick_secs.max(1));
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(tick_every);
            loop {
                interval.tick().await;
                let now = chrono::Utc::now();
                let mut s = ticker_store.lock().expect("store lock");
                let homes: Vec<String> = s.state().homes().map(|(h, _)| h.clone()).collect();
                for home_id in homes {
                    if let Err(e) = s.submit(Record::Tick { home_id, at: now }) {
                        tracing::warn!(%e, "tick failed");
                    }
                }
            }
        });
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", args.port)).await?;
        tracing::info!(port = args.port, "listening");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        stop.store(true, std::sync::atomic::Ordering::Relaxed);
        Ok(())
    })
}

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let log = load_log(&args.log)?;
    let filter = args.filter.filter();
    let policy: SymbolPolicy = args.filter.granularity.into();
    let (table, rules) = match (&args.rules, &args.symbols) {
        (Some(r), Some(s)) => (read_symbols(s, policy)?, read_rules(r)?),
        _ => {
            let (symbolized, mined) = mine_log(&log, &filter, policy, &MiningParams::default())?;
            let actions = read_catalog(args.actions.as_deref())?.resolve(&symbolized.table);
            let items: Vec<Vec<Item>> = mined.iter().map(|m| m.pattern.items.clone()).collect();
            let rules = extract_rules(
                &log.home_id,
                items.iter().map(Vec::as_slice),
                &actions,
                &symbolized.symbols,
                &RuleConfig::default(),
            );
            (symbolized.table, rules)
        }
    };
    let mut store = match &args.data_dir {
        Some(dir) => Store::open(dir)?,
        None => Store::in_memory(),
    };
    store.submit(load_record(&log.home_id, &table, rules, args.policy.config(filter)))?;
    let clock = VirtualClock::new(log.events().first().map_or_else(chrono::Utc::now, |e| e.timestamp));
    let options = ReplayOptions {
        speed: (args.speed > 0.0).then_some(args.speed),
        ..ReplayOptions::default()
    };
    let report = replay(&mut store, log.events(), &options, Some(&clock))?;
    let mut out = io::stdout().lock();
    for rec in &report.recommendations {
        serde_json::to_writer(&mut out, rec)?;
        writeln!(out)?;
    }
    let m = compute_metrics(store.state(), MetricsWindow::all());
    eprintln!(
        "{} events ({} rejected), {} recommendations, {:.2} per day",
        report.events, report.rejected, m.recommendations_sent, m.recs_per_day_per_home
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let inputs: Vec<BenchInput> = if args.input == "synthetic" {
        args.sizes
            .iter()
            .map(|&n| {
                let log = generate(&home_like(n, args.seed))?;
                Ok(BenchInput::new(format!("synthetic_{n}"), log.symbols))
            })
            .collect::<Result<_>>()?
    } else {
        let log = load_log(&args.input)?;
        let symbolized = symbolize(&log.filtered(&args.filter.filter()), args.filter.granularity.into());
        vec![BenchInput::new(args.input.clone(), symbolized.symbols)]
    };
    let params: Vec<MiningParams> = args
        .min_support
        .iter()
        .map(|&s| MiningParams::new(args.max_window, s))
        .collect();
    for p in &params {
        p.validate()?;
    }
    let config = BenchConfig {
        repeats: args.repeats,
        warmup: args.warmup,
        timeout: StdDuration::from_secs(args.timeout_secs),
    };
    let rows = run_benchmark(&inputs, &params, &args.miners, &config);
    match &args.out {
        Some(path) => write_report(&rows, open_out(path)?)?,
        None => write_report(&rows, io::stdout().lock())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_documented_invocations() {
        let cli = Cli::try_parse_from(["homeminer", "mine", "log.jsonl", "--min-support", "0.01", "--max-window", "5", "--wildcards", "0", "--out", "out"]).unwrap();
        assert!(matches!(cli.command, Command::Mine(ref m) if m.max_window == 5));
        let cli = Cli::try_parse_from(["homeminer", "rules", "extract", "p.jsonl", "--actions", "a.toml", "--log", "l.jsonl"]).unwrap();
        assert!(matches!(cli.command, Command::Rules(RulesCommand::Extract(_))));
        let cli = Cli::try_parse_from(["homeminer", "bench", "synthetic", "--miners", "wsdd,prefix,brute"]).unwrap();
        match cli.command {
            Command::Bench(b) => assert_eq!(b.miners, Miner::ALL.to_vec()),
            _ => panic!("bench expected"),
        }
        let cli = Cli::try_parse_from(["homeminer", "replay", "l.jsonl", "--speed", "1000"]).unwrap();
        assert!(matches!(cli.command, Command::Replay(ref r) if r.speed == 1000.0));
        let cli = Cli::try_parse_from(["homeminer", "serve", "--port", "8080", "--data-dir", "d"]).unwrap();
        assert!(matches!(cli.command, Command::Serve(ref s) if s.port == 8080));
    }
}
