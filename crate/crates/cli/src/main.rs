//! `burstlab`: batch analytics for timestamped event logs. Ingests
//! `network_id,timestamp` records, runs a burstiness test battery against
//! the homogeneous-Poisson null, simulates a two-state bursty process, and
//! fits that model to data by Gibbs sampling.
//!
//! Exit codes: 0 success, 1 usage or ingestion error, 2 analysis
//! precondition failure, 3 fit non-convergence (outputs still written).

use anyhow::Context;
use burstlab_cli::{config, report, POSTERIOR_SCHEMA};
use burstlab_core::burstiness::{assess, binned_profile};
use burstlab_core::event_series::{
    parse_events_with_meta, IngestConfig, TiePolicy, TimeFormat,
};
use burstlab_core::gibbs::{fit, ChainInit, FitConfig, PriorConfig};
use burstlab_core::ripley::{default_grid, k_profile, EdgePolicy};
use burstlab_core::stat_tests::{test_arrival_uniformity, test_interevent_exponential};
use burstlab_core::two_state::{simulate, InitialState, TwoStateParams};
use clap::{Args, Parser, Subcommand};
use config::{resolve, resolve_opt, FileConfig};
use report::{AnalysisReport, AnalyzeConfigEcho, Entry};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "burstlab",
    version,
    about = "Burstiness analytics and two-state modeling for event-series logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full test battery on one network's event series.
    Analyze(AnalyzeArgs),
    /// Simulate a two-state trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Fit the two-state model to observed events via Gibbs sampling.
    Fit(FitArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Delimiter-separated event log (header: network_id,timestamp).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Network id to extract.
    #[arg(long)]
    network: Option<String>,
    /// Master seed for all stochastic steps.
    #[arg(long)]
    seed: Option<u64>,
    /// Report output path; side CSVs are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json (default) or csv.
    #[arg(long)]
    format: Option<String>,
    /// Monte Carlo trials for the null envelope.
    #[arg(long = "mc-trials")]
    mc_trials: Option<usize>,
    /// Envelope coverage probability.
    #[arg(long)]
    coverage: Option<f64>,
    /// Comma-separated K-profile half-widths (default: 20 log-spaced points).
    #[arg(long)]
    grid: Option<String>,
    /// Tie policy for inter-event times: keep or jitter.
    #[arg(long = "tie-policy")]
    tie_policy: Option<String>,
    /// Ripley edge policy: interior or uncorrected.
    #[arg(long = "edge-policy")]
    edge_policy: Option<String>,
    /// Input column delimiter.
    #[arg(long)]
    delimiter: Option<char>,
    /// Timestamp format: auto, epoch, or iso.
    #[arg(long = "time-format")]
    time_format: Option<String>,
    /// Observation window override as "start,end" (numeric seconds).
    #[arg(long)]
    window: Option<String>,
    /// Input has no header row.
    #[arg(long = "no-header")]
    no_header: bool,
    /// key=value config file; flags override config.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Normal-state event rate.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Excited-state event rate.
    #[arg(long)]
    lambda1: Option<f64>,
    /// P(next state excited | normal).
    #[arg(long)]
    p0: Option<f64>,
    /// P(next state excited | excited).
    #[arg(long)]
    p1: Option<f64>,
    /// Number of events to emit.
    #[arg(long)]
    events: Option<usize>,
    /// Initial state: 0, 1, or random.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value config file; flags override config.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Event log (network_id,timestamp) or trajectory CSV
    /// (event_time,hidden_state).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Network id (required for event-log input).
    #[arg(long)]
    network: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Posterior JSON output path; the draws CSV is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Primary output format: json (default) or csv (draws at --out).
    #[arg(long)]
    format: Option<String>,
    /// Number of independent chains.
    #[arg(long)]
    chains: Option<usize>,
    /// Sweeps per chain.
    #[arg(long)]
    iters: Option<usize>,
    /// Sweeps discarded per chain.
    #[arg(long)]
    burnin: Option<usize>,
    /// Keep every k-th retained draw in the CSV.
    #[arg(long)]
    thin: Option<usize>,
    /// Convergence threshold on R-hat.
    #[arg(long = "rhat-threshold")]
    rhat_threshold: Option<f64>,
    /// Input column delimiter (event-log input).
    #[arg(long)]
    delimiter: Option<char>,
    /// Timestamp format: auto, epoch, or iso (event-log input).
    #[arg(long = "time-format")]
    time_format: Option<String>,
    /// Input has no header row (event-log input).
    #[arg(long = "no-header")]
    no_header: bool,
    /// key=value config file; flags override config.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Error categories mapped to process exit codes.
enum Failure {
    /// Bad flags, bad config, unreadable input, malformed rows.
    Usage(String),
    /// The series cannot support any analysis.
    Precondition(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Precondition(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Precondition(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            std::process::exit(failure.code());
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, Failure> {
    match path {
        Some(p) => FileConfig::load(p).map_err(usage),
        None => Ok(FileConfig::default()),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required (flag or config)")))
}

/// `report.json` -> `report.<suffix>` alongside it.
fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn parse_time_format(raw: &str) -> Result<TimeFormat, Failure> {
    match raw {
        "auto" => Ok(TimeFormat::Auto),
        "epoch" => Ok(TimeFormat::EpochSeconds),
        "iso" => Ok(TimeFormat::Iso8601),
        other => Err(Failure::Usage(format!(
            "unknown time format {other:?} (expected auto, epoch, or iso)"
        ))),
    }
}

fn parse_pair(raw: &str, flag: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::Usage(format!("--{flag} expects \"a,b\"")));
    }
    let a = parts[0].trim().parse::<f64>().map_err(usage)?;
    let b = parts[1].trim().parse::<f64>().map_err(usage)?;
    Ok((a, b))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(usage)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32, Failure> {
    let cfg = load_config(&args.config)?;
    let input = required(resolve_opt(args.input, &cfg, "input").map_err(usage)?, "input")?;
    let network = required(
        resolve_opt(args.network, &cfg, "network").map_err(usage)?,
        "network",
    )?;
    let out = required(resolve_opt(args.out, &cfg, "out").map_err(usage)?, "out")?;
    let seed = resolve(args.seed, &cfg, "seed", 0).map_err(usage)?;
    let mc_trials = resolve(args.mc_trials, &cfg, "mc-trials", 10_000).map_err(usage)?;
    let coverage = resolve(args.coverage, &cfg, "coverage", 0.95).map_err(usage)?;
    let format = resolve(args.format, &cfg, "format", "json".into()).map_err(usage)?;
    let delimiter = resolve(args.delimiter, &cfg, "delimiter", ',').map_err(usage)?;
    let time_format_raw =
        resolve(args.time_format, &cfg, "time-format", "auto".into()).map_err(usage)?;
    let time_format = parse_time_format(&time_format_raw)?;
    let has_header = !(args.no_header
        || cfg.get::<bool>("no-header").map_err(usage)?.unwrap_or(false));
    let window = match resolve_opt(args.window, &cfg, "window").map_err(usage)? {
        Some(raw) => Some(parse_pair(&raw, "window")?),
        None => None,
    };
    let tie_policy_raw =
        resolve(args.tie_policy, &cfg, "tie-policy", "keep".into()).map_err(usage)?;
    let edge_policy = match resolve(args.edge_policy, &cfg, "edge-policy", "interior".into())
        .map_err(usage)?
        .as_str()
    {
        "interior" => EdgePolicy::InteriorOnly,
        "uncorrected" => EdgePolicy::Uncorrected,
        other => {
            return Err(Failure::Usage(format!(
                "unknown edge policy {other:?} (expected interior or uncorrected)"
            )))
        }
    };
    let grid_override = match resolve_opt(args.grid, &cfg, "grid").map_err(usage)? {
        None => None,
        Some(raw) => {
            let parsed: Result<Vec<f64>, _> =
                raw.split(',').map(|v| v.trim().parse::<f64>()).collect();
            Some(parsed.map_err(usage)?)
        }
    };

    let text = std::fs::read_to_string(&input)
        .with_context(|| format!("cannot read {}", input.display()))
        .map_err(usage)?;
    let ingest = IngestConfig {
        network: network.clone(),
        delimiter,
        has_header,
        time_format,
        window,
    };
    let (series, resolution) = parse_events_with_meta(&text, &ingest).map_err(usage)?;
    if series.len() < 2 {
        return Err(Failure::Precondition(format!(
            "need at least 2 events to analyze, got {}",
            series.len()
        )));
    }

    let tie_policy = match tie_policy_raw.as_str() {
        "keep" => TiePolicy::KeepZeros,
        "jitter" => TiePolicy::Jitter {
            seed,
            resolution: resolution.seconds(),
        },
        other => {
            return Err(Failure::Usage(format!(
                "unknown tie policy {other:?} (expected keep or jitter)"
            )))
        }
    };
    let iets = series.inter_event_times(tie_policy).map_err(usage)?;

    let arrival = Entry::from_result(test_arrival_uniformity(&series));
    let interevent = Entry::from_result(test_interevent_exponential(&iets, None));
    let grid = match &grid_override {
        Some(g) => Ok(g.clone()),
        None => default_grid(&series),
    };
    let ripley = match &grid {
        Ok(g) => Entry::from_result(k_profile(&series, g, edge_policy)),
        Err(e) => Entry::Unavailable {
            reason: e.to_string(),
        },
    };
    let burstiness = Entry::from_result(assess(&iets, mc_trials, seed, coverage));
    let binned = binned_profile(&iets);

    let echo = AnalyzeConfigEcho {
        input: input.display().to_string(),
        network: network.clone(),
        seed,
        mc_trials,
        coverage,
        grid: grid.unwrap_or_default(),
        tie_policy: tie_policy_raw,
        edge_policy: match edge_policy {
            EdgePolicy::InteriorOnly => "interior".into(),
            EdgePolicy::Uncorrected => "uncorrected".into(),
        },
        delimiter,
        time_format: time_format_raw,
        has_header,
        window: series.window(),
    };
    let report = AnalysisReport::build(
        network,
        series.len(),
        echo,
        arrival,
        interevent,
        ripley,
        burstiness,
    );

    match format.as_str() {
        "json" => {
            let mut body = serde_json::to_string_pretty(&report).map_err(usage)?;
            body.push('\n');
            write_file(&out, body.as_bytes())?;
        }
        "csv" => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf).map_err(usage)?;
            write_file(&out, &buf)?;
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown format {other:?} (expected json or csv)"
            )))
        }
    }

    if let Some(profile) = report.ripley.value() {
        let mut buf = Vec::new();
        profile.write_csv(&mut buf).map_err(usage)?;
        write_file(&side_path(&out, "ripley.csv"), &buf)?;
    }
    if let Ok(profile) = &binned {
        let mut buf = Vec::new();
        profile.write_csv(&mut buf).map_err(usage)?;
        write_file(&side_path(&out, "bins.csv"), &buf)?;
    }
    if let Some(b) = report.burstiness.value() {
        let scatter = format!(
            "network_id,delta,mu\n{},{},{}\n",
            report.network_id, b.delta, b.mu
        );
        write_file(&side_path(&out, "scatter.csv"), scatter.as_bytes())?;
    }

    println!(
        "analyzed network {} ({} events): verdicts [arrival {:?}, interevent {:?}, k {:?}, burstiness {:?}, memory {:?}] -> {}",
        report.network_id,
        report.event_count,
        report.verdict_row.kolmogorov_arrival,
        report.verdict_row.kolmogorov_interevent,
        report.verdict_row.k_statistic,
        report.verdict_row.burstiness,
        report.verdict_row.memory,
        out.display()
    );
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, Failure> {
    let cfg = load_config(&args.config)?;
    let lambda0 = required(
        resolve_opt(args.lambda0, &cfg, "lambda0").map_err(usage)?,
        "lambda0",
    )?;
    let lambda1 = required(
        resolve_opt(args.lambda1, &cfg, "lambda1").map_err(usage)?,
        "lambda1",
    )?;
    let p0 = required(resolve_opt(args.p0, &cfg, "p0").map_err(usage)?, "p0")?;
    let p1 = required(resolve_opt(args.p1, &cfg, "p1").map_err(usage)?, "p1")?;
    let events = required(
        resolve_opt(args.events, &cfg, "events").map_err(usage)?,
        "events",
    )?;
    let initial_raw = resolve(args.initial, &cfg, "initial", "random".into()).map_err(usage)?;
    let seed = resolve(args.seed, &cfg, "seed", 0).map_err(usage)?;
    let out = required(resolve_opt(args.out, &cfg, "out").map_err(usage)?, "out")?;

    let initial = match initial_raw.as_str() {
        "0" => InitialState::FixedNormal,
        "1" => InitialState::FixedExcited,
        "random" => InitialState::Random,
        other => {
            return Err(Failure::Usage(format!(
                "unknown initial state {other:?} (expected 0, 1, or random)"
            )))
        }
    };
    let params = TwoStateParams::new(lambda0, lambda1, p0, p1).map_err(usage)?;
    let traj = simulate(&params, events, initial, seed).map_err(usage)?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).map_err(usage)?;
    write_file(&out, &buf)?;
    println!(
        "simulated {} events (seed {seed}) -> {}",
        traj.event_times.len(),
        out.display()
    );
    Ok(0)
}

/// Echo of a fit run's effective settings.
#[derive(Serialize)]
struct FitConfigEcho {
    input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    network: Option<String>,
    chains: usize,
    iterations: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    rhat_threshold: f64,
    duration_count: usize,
}

#[derive(Serialize)]
struct PosteriorDocument {
    schema_version: String,
    config: FitConfigEcho,
    posterior: burstlab_core::gibbs::PosteriorReport,
}

fn load_durations_for_fit(
    text: &str,
    args_network: Option<String>,
    delimiter: char,
    time_format: TimeFormat,
    has_header: bool,
) -> Result<(Vec<f64>, Option<String>), Failure> {
    let first_line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .trim()
        .to_string();
    if first_line.starts_with("event_time") {
        // Trajectory CSV from the simulate command.
        let mut times = Vec::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let t = line
                .split(',')
                .next()
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| Failure::Usage(format!("row {}: bad event_time: {e}", idx + 1)))?;
            times.push(t);
        }
        times.sort_unstable_by(f64::total_cmp);
        let durations = times.windows(2).map(|w| w[1] - w[0]).collect();
        Ok((durations, None))
    } else {
        let network = args_network.ok_or_else(|| {
            Failure::Usage("--network is required for event-log input".to_string())
        })?;
        let ingest = IngestConfig {
            network: network.clone(),
            delimiter,
            has_header,
            time_format,
            window: None,
        };
        let (series, _) = parse_events_with_meta(text, &ingest).map_err(usage)?;
        if series.len() < 2 {
            return Err(Failure::Precondition(format!(
                "need at least 2 events to fit, got {}",
                series.len()
            )));
        }
        let iets = series.inter_event_times(TiePolicy::KeepZeros).map_err(usage)?;
        Ok((iets.durations().to_vec(), Some(network)))
    }
}

fn cmd_fit(args: FitArgs) -> Result<i32, Failure> {
    let cfg = load_config(&args.config)?;
    let input = required(resolve_opt(args.input, &cfg, "input").map_err(usage)?, "input")?;
    let out = required(resolve_opt(args.out, &cfg, "out").map_err(usage)?, "out")?;
    let seed = resolve(args.seed, &cfg, "seed", 0).map_err(usage)?;
    let chains = resolve(args.chains, &cfg, "chains", 10).map_err(usage)?;
    let iterations = resolve(args.iters, &cfg, "iters", 5000).map_err(usage)?;
    let burn_in = resolve(args.burnin, &cfg, "burnin", 1500).map_err(usage)?;
    let thin = resolve(args.thin, &cfg, "thin", 1).map_err(usage)?;
    let rhat_threshold =
        resolve(args.rhat_threshold, &cfg, "rhat-threshold", 1.1).map_err(usage)?;
    let format = resolve(args.format, &cfg, "format", "json".into()).map_err(usage)?;
    let network = resolve_opt(args.network, &cfg, "network").map_err(usage)?;
    let delimiter = resolve(args.delimiter, &cfg, "delimiter", ',').map_err(usage)?;
    let time_format_raw =
        resolve(args.time_format, &cfg, "time-format", "auto".into()).map_err(usage)?;
    let time_format = parse_time_format(&time_format_raw)?;
    let has_header = !(args.no_header
        || cfg.get::<bool>("no-header").map_err(usage)?.unwrap_or(false));

    let text = std::fs::read_to_string(&input)
        .with_context(|| format!("cannot read {}", input.display()))
        .map_err(usage)?;
    let (durations, network) =
        load_durations_for_fit(&text, network, delimiter, time_format, has_header)?;
    if durations.len() < 2 {
        return Err(Failure::Precondition(format!(
            "need at least 2 durations to fit, got {}",
            durations.len()
        )));
    }

    let fit_config = FitConfig {
        chains,
        iterations,
        burn_in,
        master_seed: seed,
        rhat_threshold,
            init: ChainInit::default(),
        };
    let samples = fit(&durations, &PriorConfig::default(), &fit_config).map_err(usage)?;

    let document = PosteriorDocument {
        schema_version: POSTERIOR_SCHEMA.to_string(),
        config: FitConfigEcho {
            input: input.display().to_string(),
            network,
            chains,
            iterations,
            burn_in,
            thin,
            seed,
            rhat_threshold,
            duration_count: durations.len(),
        },
        posterior: samples.report(),
    };
    let mut body = serde_json::to_string_pretty(&document).map_err(usage)?;
    body.push('\n');

    let mut draws = Vec::new();
    samples.write_draws_csv(&mut draws, thin).map_err(usage)?;

    match format.as_str() {
        "json" => {
            write_file(&out, body.as_bytes())?;
            write_file(&side_path(&out, "draws.csv"), &draws)?;
        }
        "csv" => {
            write_file(&out, &draws)?;
            write_file(&side_path(&out, "posterior.json"), body.as_bytes())?;
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown format {other:?} (expected json or csv)"
            )))
        }
    }

    let code = match samples.converged {
        Some(false) => {
            eprintln!(
                "warning: fit did not converge (R-hat threshold {rhat_threshold}); outputs written"
            );
            3
        }
        _ => 0,
    };
    println!(
        "fitted {} durations with {} chains x {} sweeps -> {}",
        durations.len(),
        chains,
        iterations,
        out.display()
    );
    Ok(code)
}
