use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use pursuit::batch::{BatchPlan, InitSource};
use pursuit::commands::{self, load_scenario};
use pursuit::run::OutcomeKind;
use pursuit::scenario::{parse_evader, parse_team, Scenario};
use pursuit::service::channel::TcpChannel;
use pursuit::service::{IdlePolicy, SessionOptions};
use pursuit_core::policy::EvaderKind;
use pursuit_core::sim::TeamKind;

#[derive(Parser)]
#[command(name = "pursuit", version, about = "Encirclement-keeping pursuit-evasion simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, default_value = "five_pursuers")]
    scenario: String,
    /// `key=value` override, applied after the file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario, String> {
        let mut s = load_scenario(&self.scenario).map_err(|e| format!("{}: {e}", self.scenario))?;
        s.apply_overrides(&self.overrides).map_err(|e| e.to_string())?;
        Ok(s)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Play one game; writes trajectory.csv, metrics.csv and report.json.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_team)]
        policy: Option<TeamKind>,
        #[arg(long, value_parser = parse_evader)]
        evader: Option<EvaderKind>,
    },
    /// Many games over seeds and policies; writes runs.csv and summary.csv.
    Batch {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of seeds, counting up from the scenario's seed.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Comma-separated team policies (default: the scenario's).
        #[arg(long, value_parser = parse_team, value_delimiter = ',')]
        policy: Vec<TeamKind>,
        /// Comma-separated evader policies (default: the scenario's).
        #[arg(long, value_parser = parse_evader, value_delimiter = ',')]
        evader: Vec<EvaderKind>,
        /// Draw this many pursuers at random per seed instead of using the
        /// scenario's positions.
        #[arg(long, value_name = "N")]
        random_init: Option<usize>,
        /// Half-width of the square random starts are drawn from.
        #[arg(long = "box", default_value_t = 5.0)]
        half_width: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Build and print the partition for the scenario's start.
    Egp {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        json: bool,
    },
    /// Host live sessions with an external evader.
    Serve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
        #[arg(long, default_value_t = 10.0)]
        tick_rate: f64,
        /// Advance as soon as the client's action arrives.
        #[arg(long)]
        lockstep: bool,
        /// Repeat the previous action on idle ticks instead of standing still.
        #[arg(long)]
        repeat_idle: bool,
        /// Seconds a dropped session waits for a reconnect.
        #[arg(long, default_value_t = 60.0)]
        session_timeout: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PURSUIT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            policy,
            evader,
        } => {
            let mut s = scenario.load()?;
            s.config.team = policy.unwrap_or(s.config.team);
            s.config.evader_policy = evader.unwrap_or(s.config.evader_policy);
            let report = commands::cmd_run(&s, out.as_deref()).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if let Some(e) = &report.error {
                eprintln!("simulation error: {e}");
            }
            Ok(if report.outcome == OutcomeKind::Error {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Batch {
            scenario,
            out,
            seeds,
            policy,
            evader,
            random_init,
            half_width,
            workers,
        } => {
            let base = scenario.load()?;
            if !(half_width.is_finite() && half_width > 0.0) {
                return Err("--box must be positive".into());
            }
            let plan = BatchPlan {
                teams: if policy.is_empty() { vec![base.config.team] } else { policy },
                evaders: if evader.is_empty() { vec![base.config.evader_policy] } else { evader },
                seeds,
                init: match random_init {
                    Some(pursuers) => InitSource::RandomBox { pursuers, half_width },
                    None => InitSource::Scenario,
                },
                workers: workers
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
                base,
            };
            let summary = commands::cmd_batch(&plan, out.as_deref()).map_err(|e| e.to_string())?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for row in &summary {
                w.serialize(row).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Egp { scenario, json } => {
            let s = scenario.load()?;
            match commands::cmd_egp(&s) {
                Ok(dump) if json => println!("{}", serde_json::to_string_pretty(&dump).expect("dump serializes")),
                Ok(dump) => print!("{dump}"),
                Err(e) => {
                    println!("no EGP exists: {e}");
                    return Ok(ExitCode::FAILURE);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            scenario,
            bind,
            tick_rate,
            lockstep,
            repeat_idle,
            session_timeout,
        } => {
            let s = scenario.load()?;
            if !(session_timeout.is_finite() && session_timeout >= 0.0) {
                return Err("--session-timeout must be non-negative".into());
            }
            let opts = SessionOptions {
                tick_rate,
                lockstep,
                idle: if repeat_idle { IdlePolicy::RepeatLast } else { IdlePolicy::Zero },
                session_timeout: Duration::from_secs_f64(session_timeout),
            };
            if !(tick_rate.is_finite() && tick_rate > 0.0) {
                return Err("--tick-rate must be positive".into());
            }
            let mut channel = TcpChannel::bind(&bind).map_err(|e| format!("cannot bind {bind}: {e}"))?;
            eprintln!("listening on {}", channel.local_addr().map_err(|e| e.to_string())?);
            commands::cmd_serve(&s, &mut channel, &opts).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
