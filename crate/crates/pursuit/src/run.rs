//! Single runs: play a scenario, summarize it, write the output files.

use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use pursuit_core::sim::{Game, Outcome, SimError, StepRecord};
use serde::{Deserialize, Serialize};

use crate::scenario::{evader_name, team_name, Scenario};

pub const TRAJECTORY_HEADER: [&str; 7] = ["t", "agent_id", "role", "x", "y", "ux", "uy"];
pub const METRICS_HEADER: [&str; 6] = [
    "t",
    "min_pursuer_dist",
    "hull_signed_dist_assigned",
    "hull_signed_dist_all",
    "encircled",
    "captured",
];

/// Records of a played game. `error` is set when a tick (or the setup)
/// failed; the records then stop at the last good state.
#[derive(Debug, Clone)]
pub struct Played {
    pub records: Vec<StepRecord>,
    pub outcome: Option<Outcome>,
    pub error: Option<SimError>,
    pub wall_time_s: f64,
}

pub fn play(scenario: &Scenario) -> Played {
    let start = Instant::now();
    let mut records = Vec::new();
    let result = (|| {
        let mut game = Game::new(scenario.config.clone())?;
        records.push(game.snapshot());
        while !game.is_over() {
            records.push(game.tick()?);
        }
        Ok::<_, SimError>(game.outcome())
    })();
    let (outcome, error) = match result {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e)),
    };
    Played {
        records,
        outcome,
        error,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Captured,
    Escaped,
    Timeout,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub last: f64,
}

impl SeriesStats {
    fn of(xs: impl Iterator<Item = f64>) -> Option<Self> {
        let (mut min, mut max, mut sum, mut n, mut last) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize, 0.0);
        for x in xs {
            min = min.min(x);
            max = max.max(x);
            sum += x;
            n += 1;
            last = x;
        }
        (n > 0).then(|| Self {
            min,
            max,
            mean: sum / n as f64,
            last,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub policy: String,
    pub evader: String,
    pub seed: u64,
    pub outcome: OutcomeKind,
    pub capture_time: Option<usize>,
    /// First tick at which the watched hull lost the evader.
    pub escape_time: Option<usize>,
    pub steps: usize,
    /// Ticks with a negative signed distance to the watched hull.
    pub encirclement_violations: usize,
    pub hull_signed_distance: Option<SeriesStats>,
    pub min_pursuer_distance: Option<SeriesStats>,
    pub error: Option<String>,
    /// The only field that differs between identical runs.
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(scenario: &Scenario, played: &Played) -> Self {
        let recs = &played.records;
        let (outcome, capture_time) = match (&played.error, played.outcome) {
            (Some(_), _) | (None, None) => (OutcomeKind::Error, None),
            (None, Some(Outcome::Captured(t))) => (OutcomeKind::Captured, Some(t)),
            (None, Some(Outcome::Escaped(_))) => (OutcomeKind::Escaped, None),
            (None, Some(Outcome::Timeout)) => (OutcomeKind::Timeout, None),
        };
        Self {
            scenario: scenario.name.clone(),
            policy: team_name(scenario.config.team).to_string(),
            evader: evader_name(scenario.config.evader_policy).to_string(),
            seed: scenario.config.seed,
            outcome,
            capture_time,
            escape_time: recs.iter().find(|r| r.hull_distance_assigned < 0.0).map(|r| r.t),
            steps: recs.last().map_or(0, |r| r.t),
            encirclement_violations: recs.iter().filter(|r| r.hull_distance_assigned < 0.0).count(),
            hull_signed_distance: SeriesStats::of(recs.iter().map(|r| r.hull_distance_assigned)),
            min_pursuer_distance: SeriesStats::of(recs.iter().map(|r| r.min_pursuer_distance)),
            error: played.error.as_ref().map(|e| e.to_string()),
            wall_time_s: played.wall_time_s,
        }
    }
}

pub fn write_trajectory<W: io::Write>(out: W, records: &[StepRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in records {
        let t = r.t.to_string();
        for (i, (p, u)) in r.pursuers.iter().zip(&r.pursuer_controls).enumerate() {
            w.write_record([&t, &i.to_string(), "pursuer", &fmt(p.x), &fmt(p.y), &fmt(u.x), &fmt(u.y)])?;
        }
        let (e, u) = (r.evader, r.evader_control);
        let id = r.pursuers.len().to_string();
        w.write_record([&t, &id, "evader", &fmt(e.x), &fmt(e.y), &fmt(u.x), &fmt(u.y)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics<W: io::Write>(out: W, records: &[StepRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            fmt(r.min_pursuer_distance),
            fmt(r.hull_distance_assigned),
            fmt(r.hull_distance_all),
            r.encircled.to_string(),
            r.captured.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal that reads back to the same `f64`.
fn fmt(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `trajectory.csv`, `metrics.csv` and `report.json` into `dir`.
pub fn write_outputs(dir: &Path, played: &Played, report: &RunReport) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_trajectory(fs::File::create(dir.join("trajectory.csv"))?, &played.records)?;
    write_metrics(fs::File::create(dir.join("metrics.csv"))?, &played.records)?;
    let json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    fs::write(dir.join("report.json"), json + "\n")
}
