//! Monte-Carlo runs over seeds, team policies and evader policies.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use pursuit_core::geom::Vec2;
use pursuit_core::policy::EvaderKind;
use pursuit_core::sim::TeamKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::egp;
use crate::run::{play, OutcomeKind, RunReport};
use crate::scenario::{evader_name, team_name, Scenario};

/// Where the start positions of each run come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSource {
    /// The scenario's own positions for every seed.
    Scenario,
    /// `pursuers` points uniform in `[-half_width, half_width]²` around an
    /// evader at the origin, redrawn per seed until the evader is encircled.
    RandomBox { pursuers: usize, half_width: f64 },
}

#[derive(Debug, Clone)]
pub struct BatchPlan {
    pub base: Scenario,
    pub teams: Vec<TeamKind>,
    pub evaders: Vec<EvaderKind>,
    /// Seeds `base.seed .. base.seed + seeds`.
    pub seeds: u64,
    pub init: InitSource,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRun {
    /// Whether a partition could be built for this start.
    pub egp_ok: bool,
    pub report: RunReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub seed: u64,
    pub policy: String,
    pub evader: String,
    pub outcome: OutcomeKind,
    pub capture_time: Option<usize>,
    pub escape_time: Option<usize>,
    pub steps: usize,
    pub violations: usize,
    pub min_hull_signed_dist: Option<f64>,
    pub min_pursuer_dist: Option<f64>,
    pub egp_ok: bool,
    pub error: Option<String>,
}

impl From<&BatchRun> for RunRow {
    fn from(b: &BatchRun) -> Self {
        let r = &b.report;
        Self {
            seed: r.seed,
            policy: r.policy.clone(),
            evader: r.evader.clone(),
            outcome: r.outcome,
            capture_time: r.capture_time,
            escape_time: r.escape_time,
            steps: r.steps,
            violations: r.encirclement_violations,
            min_hull_signed_dist: r.hull_signed_distance.map(|s| s.min),
            min_pursuer_dist: r.min_pursuer_distance.map(|s| s.min),
            egp_ok: b.egp_ok,
            error: r.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub policy: String,
    pub evader: String,
    pub runs: usize,
    pub capture_rate: f64,
    /// Share of runs with at least one encirclement violation.
    pub violation_rate: f64,
    pub mean_capture_time: Option<f64>,
    pub egp_success_rate: f64,
    pub errors: usize,
}

fn start_for(plan: &BatchPlan, seed: u64) -> Scenario {
    let mut s = plan.base.clone();
    s.config.seed = seed;
    if let InitSource::RandomBox { pursuers, half_width } = plan.init {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        s.config.pursuers = egp::sample_encircling(&mut rng, pursuers, half_width);
        s.config.evader = Vec2::ZERO;
    }
    s
}

/// Runs every (team, evader, seed) combination on a pool of `plan.workers`
/// threads. Results are ordered by team, evader, then seed.
pub fn run_batch(plan: &BatchPlan) -> Vec<BatchRun> {
    let mut jobs = Vec::new();
    for (ti, &team) in plan.teams.iter().enumerate() {
        for (ei, &evader) in plan.evaders.iter().enumerate() {
            for seed in plan.base.config.seed..plan.base.config.seed + plan.seeds {
                jobs.push((ti, ei, seed, team, evader));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(jobs.len()));
    thread::scope(|scope| {
        for _ in 0..plan.workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(ti, ei, seed, team, evader)) = jobs.get(k) else {
                    break;
                };
                let mut s = start_for(plan, seed);
                s.config.team = team;
                s.config.evader_policy = evader;
                let c = &s.config;
                let egp_ok = egp::inspect(&c.pursuers, c.evader, c.partitions, c.partition_eps).is_ok();
                let played = play(&s);
                log::debug!("{} vs {} seed {seed}: {:?}", team_name(team), evader_name(evader), played.outcome);
                let run = BatchRun {
                    egp_ok,
                    report: RunReport::new(&s, &played),
                };
                done.lock().unwrap().push(((ti, ei, seed), run));
            });
        }
    });
    let mut done = done.into_inner().unwrap();
    done.sort_by_key(|(key, _)| *key);
    done.into_iter().map(|(_, r)| r).collect()
}

pub fn summarize(runs: &[BatchRun]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut groups: Vec<Vec<&BatchRun>> = Vec::new();
    for r in runs {
        match groups
            .iter_mut()
            .find(|g| g[0].report.policy == r.report.policy && g[0].report.evader == r.report.evader)
        {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    for g in groups {
        let n = g.len();
        let rate = |k: usize| k as f64 / n as f64;
        let times: Vec<usize> = g.iter().filter_map(|r| r.report.capture_time).collect();
        out.push(SummaryRow {
            policy: g[0].report.policy.clone(),
            evader: g[0].report.evader.clone(),
            runs: n,
            capture_rate: rate(times.len()),
            violation_rate: rate(g.iter().filter(|r| r.report.encirclement_violations > 0).count()),
            mean_capture_time: (!times.is_empty()).then(|| times.iter().sum::<usize>() as f64 / times.len() as f64),
            egp_success_rate: rate(g.iter().filter(|r| r.egp_ok).count()),
            errors: g.iter().filter(|r| r.report.outcome == OutcomeKind::Error).count(),
        });
    }
    out
}

/// Writes `runs.csv` (one row per run) and `summary.csv` into `dir`.
pub fn write_batch(dir: &Path, runs: &[BatchRun]) -> io::Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("runs.csv"))?;
    for r in runs {
        w.serialize(RunRow::from(r))?;
    }
    w.flush()?;
    let summary = summarize(runs);
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for s in &summary {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(summary)
}
