//! Configuration files, command verbs and file outputs.
//!
//! Config files are flat `key=value` text, one pair per line, `#` starting a
//! comment. Files ending in `.json` are read as a flat JSON object with the
//! same keys (the `run_meta.json` / `sweep_meta.json` manifests written next
//! to every output). Unknown keys are rejected. `--set key=value` flags are
//! applied after the file.
//!
//! Reals in CSV files are written with 6 significant digits (`%g` style),
//! undefined values as an empty field, infinities as `inf`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::engine::{run_from, Observer, SimConfig, StepStats};
use crate::ensemble::{run_sweep, EnsembleRecord, Stat, SweepSpec};
use crate::error::{Error, Result};
use crate::observables::{
    condensed_fraction, distance_histogram, exact_match_fraction, expected_lifetime, order_ratio,
    overlap_histogram, producer_capacity_bound, regime_estimate, track_survivor_basins, CenterKind,
    HistogramRecorder, OccupancyTracker,
};
use crate::population::{init_market, MarketState};

#[derive(Debug, Parser)]
#[command(
    name = "hypermarket",
    version,
    about = "Producer/consumer co-evolution on the k-bit hypercube"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one trajectory and write its CSV outputs.
    Run {
        #[command(flatten)]
        input: ConfigArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run multi-seed ensembles over a parameter grid.
    Sweep {
        #[command(flatten)]
        input: ConfigArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print analytic consumer lifetimes by distance to a producer.
    Lifetimes {
        #[command(flatten)]
        input: ConfigArgs,
    },
    /// Print the niche/competition estimate over theta and producer counts.
    Regime {
        #[command(flatten)]
        input: ConfigArgs,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// key=value config file, or a JSON manifest from a previous run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set theta=0.8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

/// Config pairs with aliases resolved; later pairs win.
#[derive(Debug, Default, Clone)]
pub struct Entries {
    pairs: BTreeMap<String, String>,
}

const ALIASES: &[(&str, &str)] = &[
    ("a_c", "consumer_cost"),
    ("a_p", "producer_cost"),
    ("n_p", "n_producers"),
    ("n_c", "n_consumers"),
    ("c_p", "producer_capital"),
    ("s_0", "initial_satisfaction"),
    ("s_c", "initial_satisfaction"),
];

fn canonical(key: &str) -> &str {
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == key)
        .map_or(key, |(_, name)| name)
}

trait ConfigValue: Sized {
    const EXPECTED: &'static str;
    fn parse_value(text: &str) -> Option<Self>;
}

macro_rules! config_value {
    ($t:ty, $expected:literal) => {
        impl ConfigValue for $t {
            const EXPECTED: &'static str = $expected;
            fn parse_value(text: &str) -> Option<Self> {
                <$t>::from_str(text).ok()
            }
        }
    };
}

config_value!(f64, "a real number");
config_value!(u64, "an integer ≥ 0");
config_value!(u32, "an integer ≥ 0");
config_value!(usize, "an integer ≥ 0");

impl Entries {
    pub fn insert(&mut self, key: &str, value: &str) {
        self.pairs
            .insert(canonical(key.trim()).to_owned(), value.trim().to_owned());
    }

    pub fn extend(&mut self, other: Entries) {
        self.pairs.extend(other.pairs);
    }

    fn take<T: ConfigValue>(&mut self, key: &str) -> Result<Option<T>> {
        let Some(text) = self.pairs.remove(key) else {
            return Ok(None);
        };
        T::parse_value(&text).map(Some).ok_or_else(|| Error::Parse {
            key: key.to_owned(),
            value: text,
            expected: T::EXPECTED,
        })
    }

    fn take_list<T: ConfigValue>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(text) = self.pairs.remove(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.push(T::parse_value(item).ok_or_else(|| Error::Parse {
                key: key.to_owned(),
                value: item.to_owned(),
                expected: T::EXPECTED,
            })?);
        }
        Ok(Some(out))
    }

    /// Fails on the first key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.pairs.into_keys().next() {
            Some(key) => Err(Error::UnknownKey(key)),
            None => Ok(()),
        }
    }
}

/// Parses `key=value` lines.
pub fn parse_key_values(text: &str) -> Result<Entries> {
    let mut entries = Entries::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) if !key.trim().is_empty() => entries.insert(key, value),
            _ => {
                return Err(Error::Syntax {
                    line: n + 1,
                    text: raw.to_owned(),
                })
            }
        }
    }
    Ok(entries)
}

fn json_scalar(value: &Value) -> Option<String> {
    match value {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Parses a flat JSON object; arrays become comma-separated lists.
pub fn parse_json_entries(text: &str, path: &Path) -> Result<Entries> {
    let value: Value = serde_json::from_str(text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })?;
    let Value::Object(map) = value else {
        return Err(Error::Syntax {
            line: 1,
            text: "top-level JSON value must be an object".into(),
        });
    };
    let mut entries = Entries::default();
    for (key, value) in &map {
        let text = match value {
            Value::Array(items) => items
                .iter()
                .map(json_scalar)
                .collect::<Option<Vec<_>>>()
                .map(|v| v.join(",")),
            other => json_scalar(other),
        };
        let text = text.ok_or_else(|| Error::Parse {
            key: key.clone(),
            value: value.to_string(),
            expected: "a number, string or list",
        })?;
        entries.insert(key, &text);
    }
    Ok(entries)
}

pub fn load_entries(path: &Path) -> Result<Entries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|ext| ext == "json") {
        parse_json_entries(&text, path)
    } else {
        parse_key_values(&text)
    }
}

impl ConfigArgs {
    pub fn entries(&self) -> Result<Entries> {
        let mut entries = match &self.config {
            Some(path) => load_entries(path)?,
            None => Entries::default(),
        };
        for item in &self.overrides {
            let mut one = parse_key_values(item)?;
            if one.pairs.is_empty() {
                return Err(Error::Syntax {
                    line: 1,
                    text: item.clone(),
                });
            }
            entries.extend(std::mem::take(&mut one));
        }
        Ok(entries)
    }
}

impl SimConfig {
    /// Reads model keys from `entries` on top of the defaults and validates.
    pub fn from_entries(entries: &mut Entries) -> Result<SimConfig> {
        let mut c = SimConfig::default();
        if let Some(v) = entries.take("k")? {
            c.k = v;
        }
        if let Some(v) = entries.take("theta")? {
            c.theta = v;
        }
        if let Some(v) = entries.take("consumer_cost")? {
            c.consumer_cost = v;
        }
        if let Some(v) = entries.take("producer_cost")? {
            c.producer_cost = v;
        }
        if let Some(v) = entries.take("n_producers")? {
            c.n_producers = v;
        }
        if let Some(v) = entries.take("n_consumers")? {
            c.n_consumers = v;
        }
        if let Some(v) = entries.take("producer_capital")? {
            c.producer_capital = v;
        }
        if let Some(v) = entries.take("initial_satisfaction")? {
            c.initial_satisfaction = v;
        }
        if let Some(v) = entries.take("steps")? {
            c.steps = v;
        }
        if let Some(v) = entries.take("seed")? {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }

    /// Canonical key/value pairs; parsing them back yields `self`.
    pub fn to_pairs(&self) -> Vec<(&'static str, Value)> {
        vec![
            ("k", self.k.into()),
            ("theta", self.theta.into()),
            ("consumer_cost", self.consumer_cost.into()),
            ("producer_cost", self.producer_cost.into()),
            ("n_producers", self.n_producers.into()),
            ("n_consumers", self.n_consumers.into()),
            ("producer_capital", self.producer_capital.into()),
            ("initial_satisfaction", self.initial_satisfaction.into()),
            ("steps", self.steps.into()),
            ("seed", self.seed.into()),
        ]
    }
}

/// Renders pairs as a `key=value` config file.
pub fn to_key_values(pairs: &[(&'static str, Value)]) -> String {
    let mut out = String::new();
    for (key, value) in pairs {
        let text = match value {
            Value::Array(items) => items
                .iter()
                .map(|v| json_scalar(v).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(","),
            other => json_scalar(other).unwrap_or_default(),
        };
        let _ = writeln!(out, "{key}={text}");
    }
    out
}

pub fn to_json(pairs: &[(&'static str, Value)]) -> String {
    let map: Map<String, Value> = pairs
        .iter()
        .map(|(k, v)| ((*k).to_owned(), v.clone()))
        .collect();
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("plain JSON values");
    text.push('\n');
    text
}

/// Output controls for the `run` verb.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Steps between consumer overlap histograms; 0 disables the series.
    pub hist_stride: u64,
    /// Surviving producers whose basins are tracked; 0 disables tracking.
    pub track_basins: usize,
    /// Random reference sites tracked alongside the survivors.
    pub control_sites: usize,
    pub basin_radius: u32,
    /// Steps between progress log lines; 0 disables them.
    pub log_every: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            hist_stride: 100,
            track_basins: 0,
            control_sites: 2,
            basin_radius: 2,
            log_every: 500,
        }
    }
}

impl RunOptions {
    pub fn from_entries(entries: &mut Entries, config: &SimConfig) -> Result<RunOptions> {
        let mut o = RunOptions::default();
        if let Some(v) = entries.take("hist_stride")? {
            o.hist_stride = v;
        }
        if let Some(v) = entries.take("track_basins")? {
            o.track_basins = v;
        }
        if let Some(v) = entries.take("control_sites")? {
            o.control_sites = v;
        }
        if let Some(v) = entries.take("basin_radius")? {
            o.basin_radius = v;
        }
        if let Some(v) = entries.take("log_every")? {
            o.log_every = v;
        }
        if o.basin_radius > config.k {
            return Err(Error::Validation {
                field: "basin_radius",
                value: o.basin_radius.to_string(),
                bound: "basin_radius ∈ [0,k]",
            });
        }
        Ok(o)
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, Value)> {
        vec![
            ("hist_stride", self.hist_stride.into()),
            ("track_basins", self.track_basins.into()),
            ("control_sites", self.control_sites.into()),
            ("basin_radius", self.basin_radius.into()),
            ("log_every", self.log_every.into()),
        ]
    }
}

/// Reads a sweep: model keys for the base config plus grid keys.
pub fn sweep_from_entries(entries: &mut Entries) -> Result<SweepSpec> {
    let mut spec = SweepSpec {
        base: SimConfig::from_entries(entries)?,
        ..SweepSpec::default()
    };
    if let Some(v) = entries.take_list("np_grid")? {
        spec.np_grid = v;
    }
    if let Some(v) = entries.take_list("ac_values")? {
        spec.ac_values = v;
    }
    if let Some(v) = entries.take_list("theta_values")? {
        spec.theta_values = v;
    }
    if let Some(v) = entries.take("n_seeds")? {
        spec.n_seeds = v;
    }
    if let Some(v) = entries.take("seed_base")? {
        spec.seed_base = v;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn sweep_pairs(spec: &SweepSpec) -> Vec<(&'static str, Value)> {
    let mut pairs = spec.base.to_pairs();
    pairs.push(("np_grid", spec.np_grid.clone().into()));
    pairs.push(("ac_values", spec.ac_values.clone().into()));
    pairs.push(("theta_values", spec.theta_values.clone().into()));
    pairs.push(("n_seeds", spec.n_seeds.into()));
    pairs.push(("seed_base", spec.seed_base.into()));
    pairs
}

/// Formats a real with 6 significant digits, `%g` style.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn histogram_csv(h: &[u64]) -> String {
    let mut out = String::from("bin,count\n");
    for (bin, count) in h.iter().enumerate() {
        let _ = writeln!(out, "{bin},{count}");
    }
    out
}

/// Everything a `run` produces, before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: SimConfig,
    pub options: RunOptions,
    pub initial: MarketState,
    pub stats: Vec<StepStats>,
    pub final_state: MarketState,
    pub histograms: Vec<(u64, Vec<u64>)>,
    pub occupancy: Option<OccupancyTracker>,
}

struct RunRecorder {
    stats: Vec<StepStats>,
    histograms: Option<HistogramRecorder>,
    log_every: u64,
}

impl Observer for RunRecorder {
    fn initial(&mut self, state: &MarketState) {
        if let Some(h) = &mut self.histograms {
            h.initial(state);
        }
    }

    fn after_step(&mut self, state: &MarketState, stats: &StepStats) {
        if let Some(h) = &mut self.histograms {
            h.after_step(state, stats);
        }
        if self.log_every > 0 && stats.t.is_multiple_of(self.log_every) {
            log::info!(
                "t={} producers={} <S>={:.4} deaths={}",
                stats.t,
                stats.n_producers,
                stats.mean_satisfaction,
                stats.deaths
            );
        }
        self.stats.push(stats.clone());
    }
}

pub fn simulate(config: &SimConfig, options: &RunOptions) -> Result<RunOutput> {
    let initial = init_market(config);
    let mut recorder = RunRecorder {
        stats: Vec::with_capacity(config.steps as usize),
        histograms: (options.hist_stride > 0).then(|| HistogramRecorder::new(options.hist_stride)),
        log_every: options.log_every,
    };
    let final_state = run_from(initial.clone(), config, &mut recorder);
    let occupancy = if options.track_basins > 0 {
        Some(track_survivor_basins(
            config,
            options.track_basins,
            options.control_sites,
            options.basin_radius,
        )?)
    } else {
        None
    };
    Ok(RunOutput {
        config: config.clone(),
        options: options.clone(),
        initial,
        stats: recorder.stats,
        final_state,
        histograms: recorder.histograms.map(|h| h.records).unwrap_or_default(),
        occupancy,
    })
}

pub fn timeseries_csv(initial: &MarketState, stats: &[StepStats]) -> String {
    let mut out =
        String::from("t,n_producers,mean_capital,mean_satisfaction,deaths,transactions\n");
    let _ = writeln!(
        out,
        "0,{},{},{},0,0",
        initial.producers.len(),
        fmt_real(initial.mean_capital()),
        fmt_real(initial.mean_satisfaction())
    );
    for s in stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t,
            s.n_producers,
            fmt_real(s.mean_capital),
            fmt_real(s.mean_satisfaction),
            s.deaths,
            s.transactions
        );
    }
    out
}

pub fn producers_csv(state: &MarketState) -> String {
    let mut out = String::from("id,product_string,capital,customers_last_step\n");
    for p in &state.producers {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.id,
            p.product,
            fmt_real(p.capital),
            p.customers
        );
    }
    out
}

/// Final-state summary as `metric,value` rows.
pub fn summary_csv(output: &RunOutput) -> String {
    let state = &output.final_state;
    let config = &output.config;
    let h = overlap_histogram(&state.needs(), config.k).expect("consumers share k");
    let mean_s = state.mean_satisfaction();
    let last_overlap = output
        .stats
        .last()
        .and_then(StepStats::mean_relative_overlap);
    let bound = last_overlap
        .and_then(|q| producer_capacity_bound(config.n_consumers, config.producer_cost, q).ok());
    let regime = regime_estimate(config.k, config.theta, config.n_producers);
    let mut distinct: Vec<_> = state.needs();
    distinct.sort_unstable();
    distinct.dedup();
    let mean_age =
        state.consumers.iter().map(|c| c.age as f64).sum::<f64>() / state.consumers.len() as f64;
    let max_s = state
        .consumers
        .iter()
        .map(|c| c.satisfaction)
        .fold(f64::NEG_INFINITY, f64::max);

    let rows: Vec<(&str, String)> = vec![
        ("t", state.t.to_string()),
        ("survivors", state.producers.len().to_string()),
        ("mean_capital", fmt_real(state.mean_capital())),
        ("n_consumers", state.consumers.len().to_string()),
        ("mean_satisfaction", fmt_real(mean_s)),
        ("max_satisfaction", fmt_real(max_s)),
        ("mean_consumer_age", fmt_real(mean_age)),
        ("distinct_needs", distinct.len().to_string()),
        (
            "condensed_fraction",
            fmt_real(condensed_fraction(mean_s, config.initial_satisfaction)),
        ),
        (
            "exact_match_fraction",
            fmt_real(exact_match_fraction(state)),
        ),
        ("order_ratio", fmt_opt(order_ratio(&h))),
        ("mean_relative_overlap_last_step", fmt_opt(last_overlap)),
        ("capacity_bound", fmt_opt(bound)),
        ("regime", regime.regime.to_string()),
        ("regime_coverage", fmt_real(regime.coverage)),
    ];
    let mut out = String::from("metric,value\n");
    for (metric, value) in rows {
        let _ = writeln!(out, "{metric},{value}");
    }
    out
}

pub fn histogram_series_csv(records: &[(u64, Vec<u64>)]) -> String {
    let mut out = String::from("t,bin,count\n");
    for (t, h) in records {
        for (bin, count) in h.iter().enumerate() {
            let _ = writeln!(out, "{t},{bin},{count}");
        }
    }
    out
}

pub fn occupancy_csv(tracker: &OccupancyTracker) -> String {
    let labels: Vec<String> = tracker.centers.iter().map(|c| c.label()).collect();
    let mut out = String::from("t,center_id,count\n");
    for (t, row) in tracker.counts.iter().enumerate() {
        for (label, count) in labels.iter().zip(row) {
            let _ = writeln!(out, "{t},{label},{count}");
        }
    }
    out
}

pub fn occupancy_centers_csv(tracker: &OccupancyTracker) -> String {
    let mut out = String::from("center_id,kind,site\n");
    for c in &tracker.centers {
        let kind = match c.kind {
            CenterKind::Survivor(_) => "survivor",
            CenterKind::Control(_) => "control",
        };
        let _ = writeln!(out, "{},{kind},{}", c.label(), c.site);
    }
    out
}

/// Writes every `run` output into `dir` and returns the written paths.
pub fn emit_run(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let k = output.config.k;
    let state = &output.final_state;
    let mut files: Vec<(&str, String)> = vec![
        (
            "timeseries.csv",
            timeseries_csv(&output.initial, &output.stats),
        ),
        ("producers_final.csv", producers_csv(state)),
        ("summary.csv", summary_csv(output)),
        (
            "need_overlap_hist.csv",
            histogram_csv(&overlap_histogram(&state.needs(), k)?),
        ),
        (
            "producer_distance_hist.csv",
            histogram_csv(&distance_histogram(&state.products(), k)?),
        ),
    ];
    if !output.histograms.is_empty() {
        files.push((
            "need_overlap_series.csv",
            histogram_series_csv(&output.histograms),
        ));
    }
    if let Some(tracker) = &output.occupancy {
        files.push(("occupancy.csv", occupancy_csv(tracker)));
        files.push(("occupancy_centers.csv", occupancy_centers_csv(tracker)));
    }
    let mut manifest = output.config.to_pairs();
    manifest.extend(output.options.to_pairs());
    files.push(("run_meta.json", to_json(&manifest)));

    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}

fn stat_fields(s: &Stat) -> String {
    format!("{},{}", fmt_real(s.mean), fmt_real(s.std))
}

pub fn sweep_csv(records: &[EnsembleRecord]) -> String {
    let mut out = String::from(
        "n_producers,consumer_cost,theta,n_seeds,\
         survivors_mean,survivors_std,\
         mean_capital_mean,mean_capital_std,\
         mean_satisfaction_mean,mean_satisfaction_std,\
         order_ratio_mean,order_ratio_std,order_ratio_runs,\
         condensed_fraction_mean,condensed_fraction_std,\
         exact_match_fraction_mean,exact_match_fraction_std\n",
    );
    for r in records {
        let ratio = match &r.order_ratio {
            Some(s) => format!("{},{}", stat_fields(s), s.count),
            None => ",,0".to_owned(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n_producers,
            fmt_real(r.consumer_cost),
            fmt_real(r.theta),
            r.n_seeds,
            stat_fields(&r.survivors),
            stat_fields(&r.mean_capital),
            stat_fields(&r.mean_satisfaction),
            ratio,
            stat_fields(&r.condensed_fraction),
            stat_fields(&r.exact_match_fraction),
        );
    }
    out
}

pub fn emit_sweep(
    spec: &SweepSpec,
    records: &[EnsembleRecord],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join("sweep.csv");
    write_file(&csv, &sweep_csv(records))?;
    let meta = dir.join("sweep_meta.json");
    write_file(&meta, &to_json(&sweep_pairs(spec)))?;
    Ok(vec![csv, meta])
}

pub fn lifetimes_csv(config: &SimConfig) -> String {
    let mut out = String::from("distance,relative_overlap,lifetime\n");
    for d in 0..=config.k {
        let lifetime = expected_lifetime(
            d,
            config.consumer_cost,
            config.theta,
            config.k,
            config.initial_satisfaction,
        );
        let _ = writeln!(
            out,
            "{d},{},{}",
            fmt_real(f64::from(config.k - d) / f64::from(config.k)),
            fmt_real(lifetime)
        );
    }
    out
}

pub fn regime_csv(k: u32, theta_values: &[f64], np_grid: &[usize]) -> String {
    let mut out = String::from("k,theta,n_producers,basin_size,coverage,regime\n");
    for &theta in theta_values {
        for &n in np_grid {
            let e = regime_estimate(k, theta, n);
            let _ = writeln!(
                out,
                "{k},{},{n},{},{},{}",
                fmt_real(theta),
                e.basin_size,
                fmt_real(e.coverage),
                e.regime
            );
        }
    }
    out
}

/// Executes one verb. Table verbs print to stdout.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { input, out } => {
            let mut entries = input.entries()?;
            let config = SimConfig::from_entries(&mut entries)?;
            let options = RunOptions::from_entries(&mut entries, &config)?;
            entries.finish()?;
            let output = simulate(&config, &options)?;
            for path in emit_run(&output, out)? {
                log::info!("wrote {}", path.display());
            }
        }
        Command::Sweep { input, out } => {
            let mut entries = input.entries()?;
            let spec = sweep_from_entries(&mut entries)?;
            entries.finish()?;
            log::info!(
                "sweeping {} cells x {} seeds",
                spec.cells().len(),
                spec.n_seeds
            );
            let records = run_sweep(&spec);
            for path in emit_sweep(&spec, &records, out)? {
                log::info!("wrote {}", path.display());
            }
        }
        Command::Lifetimes { input } => {
            let mut entries = input.entries()?;
            let config = SimConfig::from_entries(&mut entries)?;
            entries.finish()?;
            print!("{}", lifetimes_csv(&config));
        }
        Command::Regime { input } => {
            let mut entries = input.entries()?;
            let spec = sweep_from_entries(&mut entries)?;
            entries.finish()?;
            print!(
                "{}",
                regime_csv(spec.base.k, &spec.theta_values, &spec.np_grid)
            );
        }
    }
    Ok(())
}
