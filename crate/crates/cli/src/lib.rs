//! `roboviz` subcommands. Exit codes: 0 success, 1 usage, 2 integrity
//! failure, 3 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use roboviz_core::engine::MatchLog;
use roboviz_core::matchgen::{load_match, save_match};
use roboviz_core::rng::mix_seed;
use roboviz_core::simbot::{extend_error, run_headless, Bot, BotPolicy};
use roboviz_core::{generate_match, replay, LogError, MatchConfig, MatchData, RobotStatus, StoreError};
use thiserror::Error;

pub mod client;
pub mod stats;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Integrity(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Integrity(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<StoreError> for CliError {
    fn from(err: StoreError) -> Self {
        match err {
            StoreError::Integrity { .. } | StoreError::Inconsistent { .. } => CliError::Integrity(err.to_string()),
            StoreError::Parse { .. } => CliError::Integrity(err.to_string()),
            StoreError::Io { .. } => CliError::Runtime(err.to_string()),
        }
    }
}

impl From<LogError> for CliError {
    fn from(err: LogError) -> Self {
        CliError::Integrity(err.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "roboviz", version, about = "Generate, serve, play and replay Roboviz matches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Generate match files from a seed.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// standard, nonpoly, early, late, or a `+` combination.
        #[arg(long, default_value = "standard")]
        variant: String,
    },
    /// Run the match server.
    Serve {
        #[arg(long, env = "ROBOVIZ_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "ROBOVIZ_HOST", default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "ROBOVIZ_ADMIN_SECRET")]
        admin_secret: String,
        #[arg(long, env = "ROBOVIZ_TICK_SECONDS", default_value_t = 6.0)]
        tick_seconds: f64,
        /// Directory for persisted match logs.
        #[arg(long, env = "ROBOVIZ_LOG_DIR")]
        log_dir: Option<PathBuf>,
    },
    /// Play one team of a served match with a simulated player.
    Bot {
        #[arg(long)]
        url: String,
        #[arg(long = "match")]
        match_id: String,
        #[arg(long)]
        team: String,
        /// omniscient[:E], regression[:D], filter[:D] or greedy[:D].
        #[arg(long, default_value = "omniscient")]
        policy: String,
        /// Noise range of the omniscient player.
        #[arg(long)]
        error: Option<i64>,
        /// Match files; required by the omniscient player.
        #[arg(long)]
        match_dir: Option<PathBuf>,
        /// Reuse a team token instead of joining.
        #[arg(long)]
        token: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play a full match between two bots in-process.
    Headless {
        #[arg(long = "match")]
        match_dir: PathBuf,
        #[arg(long)]
        bot_a: String,
        #[arg(long)]
        bot_b: String,
        #[arg(long)]
        seed: u64,
        /// Where to write the log (default: headless-<seed>.ndjson).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Re-simulate a log and check it reproduces its hash.
    Replay {
        #[arg(long)]
        log: PathBuf,
        /// Match files; regenerated from the logged config when absent.
        #[arg(long = "match")]
        match_dir: Option<PathBuf>,
    },
    /// Score trajectory, claims and resolution reasons of a log.
    Stats {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(err) => {
            eprintln!("roboviz: {err}");
            err.exit_code()
        }
    }
}

/// Runs a subcommand, returning what it prints on success.
pub fn execute(cmd: Cmd) -> Result<String, CliError> {
    match cmd {
        Cmd::Gen { seed, out, variant } => {
            let config = MatchConfig::with_seed(seed)
                .apply_variant(&variant)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let data = generate_match(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
            let hash = save_match(&data, &out)?;
            Ok(format!("{hash}  {}\n", out.display()))
        }
        Cmd::Serve {
            port,
            host,
            admin_secret,
            tick_seconds,
            log_dir,
        } => serve(&host, port, admin_secret, tick_seconds, log_dir),
        Cmd::Bot {
            url,
            match_id,
            team,
            policy,
            error,
            match_dir,
            token,
            seed,
        } => {
            let truth = match &match_dir {
                Some(dir) => Some(Arc::new(load_match(dir)?)),
                None => None,
            };
            let mut bot = make_bot(&policy, error, truth, seed)?;
            let remote = client::Remote::new(&url, &match_id);
            let report = client::play(&remote, &team, token, &mut bot)?;
            Ok(format!(
                "team {}\tscore {}\tclaimed {}\tsent {}\trejected {}\n",
                report.team, report.score, report.claimed, report.sent, report.rejected
            ))
        }
        Cmd::Headless {
            match_dir,
            bot_a,
            bot_b,
            seed,
            log,
        } => {
            let data = Arc::new(load_match(&match_dir)?);
            let log_path = log.unwrap_or_else(|| PathBuf::from(format!("headless-{seed}.ndjson")));
            headless(data, &bot_a, &bot_b, seed, &log_path)
        }
        Cmd::Replay { log, match_dir } => {
            let recorded = read_log(&log)?;
            let data = match match_dir {
                Some(dir) => load_match(&dir)?,
                None => replay::regenerate_match(&recorded).map_err(|e| CliError::Integrity(e.to_string()))?,
            };
            let summary = replay::verify(Arc::new(data), &recorded)?;
            let mut out = format!("log_hash {}\nreproduced ok\ntick {}\n", summary.log_hash, summary.tick);
            for (team, score) in &summary.scores {
                out.push_str(&format!("score\t{team}\t{score}\n"));
            }
            Ok(out)
        }
        Cmd::Stats { log, json } => {
            let recorded = read_log(&log)?;
            let stats = stats::match_stats(&recorded).ok_or(LogError::MissingStart)?;
            if json {
                Ok(serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n")
            } else {
                Ok(stats.render())
            }
        }
    }
}

fn read_log(path: &Path) -> Result<MatchLog, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(MatchLog::from_ndjson(&text)?)
}

/// Builds a bot from a policy spec; `error` overrides the omniscient range.
pub fn make_bot(spec: &str, error: Option<i64>, truth: Option<Arc<MatchData>>, seed: u64) -> Result<Bot, CliError> {
    let mut policy: BotPolicy = spec.parse().map_err(|e: roboviz_core::simbot::BotError| CliError::Usage(e.to_string()))?;
    if let Some(e) = error {
        policy = extend_error(policy, e).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Bot::from_policy(policy, truth, seed).map_err(|e| CliError::Usage(e.to_string()))
}

/// Team names used by `headless`.
pub const HEADLESS_TEAMS: [&str; 2] = ["a", "b"];

pub fn headless(data: Arc<MatchData>, bot_a: &str, bot_b: &str, seed: u64, log_path: &Path) -> Result<String, CliError> {
    let mut a = make_bot(bot_a, None, Some(data.clone()), mix_seed(seed, 1))?;
    let mut b = make_bot(bot_b, None, Some(data.clone()), mix_seed(seed, 2))?;
    let [ta, tb] = HEADLESS_TEAMS;
    let state = run_headless(data, [(ta, &mut a), (tb, &mut b)], seed).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(log_path, state.log().to_ndjson())
        .map_err(|e| CliError::Runtime(format!("{}: {e}", log_path.display())))?;
    let mut out = String::new();
    for (team, bot) in [(ta, &a), (tb, &b)] {
        let claimed = state
            .statuses()
            .iter()
            .filter(|s| s.claimed_by() == Some(team))
            .count();
        out.push_str(&format!(
            "team {team}\tpolicy {}\tscore {}\tclaimed {claimed}\trejected {}\n",
            bot.policy(),
            state.score(team).expect("known team"),
            bot.rejected()
        ));
    }
    let down = state
        .statuses()
        .iter()
        .filter(|s| **s == RobotStatus::PoweredDown)
        .count();
    out.push_str(&format!("powered_down {down}\n"));
    out.push_str(&format!("log {}\nlog_hash {}\n", log_path.display(), state.log().hash()));
    Ok(out)
}

fn serve(host: &str, port: u16, admin_secret: String, tick_seconds: f64, log_dir: Option<PathBuf>) -> Result<String, CliError> {
    if admin_secret.is_empty() {
        return Err(CliError::Usage("--admin-secret must not be empty".into()));
    }
    if !(tick_seconds.is_finite() && tick_seconds > 0.0) {
        return Err(CliError::Usage("--tick-seconds must be positive".into()));
    }
    if let Some(dir) = &log_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    }
    let config = roboviz_server::ServerConfig {
        admin_secret,
        default_tick_seconds: tick_seconds,
        log_dir,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime
        .block_on(async {
            let listener = tokio::net::TcpListener::bind((host, port)).await?;
            eprintln!("roboviz: listening on {}", listener.local_addr()?);
            roboviz_server::serve(listener, config).await
        })
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(String::new())
}
