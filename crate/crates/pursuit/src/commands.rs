//! Subcommand bodies, kept out of `main` so tests can drive them.

use std::io;
use std::path::Path;

use pursuit_core::partition::PartitionError;
use pursuit_core::policy::EvaderKind;
use pursuit_core::sim::Game;

use crate::batch::{self, BatchPlan, SummaryRow};
use crate::egp::{self, EgpDump};
use crate::run::{self, RunReport};
use crate::scenario::{self, Scenario, ScenarioError};
use crate::service::channel::TcpChannel;
use crate::service::{self, SessionOptions};

/// A path to a scenario file, or the name of a bundled scenario.
pub fn load_scenario(spec: &str) -> Result<Scenario, ScenarioError> {
    let path = Path::new(spec);
    match scenario::bundled(spec) {
        Some(text) if !path.exists() => Scenario::parse(text),
        _ => Scenario::load(path),
    }
}

/// Plays one game and writes its files into `out` when given.
pub fn cmd_run(s: &Scenario, out: Option<&Path>) -> io::Result<RunReport> {
    let played = run::play(s);
    let report = RunReport::new(s, &played);
    if let Some(dir) = out {
        run::write_outputs(dir, &played, &report)?;
    }
    Ok(report)
}

pub fn cmd_batch(plan: &BatchPlan, out: Option<&Path>) -> io::Result<Vec<SummaryRow>> {
    let runs = batch::run_batch(plan);
    match out {
        Some(dir) => batch::write_batch(dir, &runs),
        None => Ok(batch::summarize(&runs)),
    }
}

pub fn cmd_egp(s: &Scenario) -> Result<EgpDump, PartitionError> {
    let c = &s.config;
    egp::inspect(&c.pursuers, c.evader, c.partitions, c.partition_eps)
}

/// Serves sessions on `channel` one client at a time, forever. Each session
/// starts from `s` with an external evader.
pub fn cmd_serve(s: &Scenario, channel: &mut TcpChannel, opts: &SessionOptions) -> anyhow::Result<()> {
    let mut cfg = s.config.clone();
    cfg.evader_policy = EvaderKind::External;
    Game::new(cfg.clone())?;
    loop {
        channel.accept(None)?;
        match service::session_loop(Game::new(cfg.clone())?, channel, opts) {
            Ok(summary) => log::info!("session over: {:?}", summary.outcome),
            Err(e) => log::warn!("session aborted: {e}"),
        }
        channel.hang_up();
    }
}
