//! Scenario runs and closed-loop checks shared by the integration tests and
//! the acceptance suite.

use pursuit_core::geom::Vec2;
use pursuit_core::policy::EvaderKind;
use pursuit_core::qp::QpOptions;
use pursuit_core::sim::{self, Game, GameRun, Outcome, ScenarioConfig, Team, TeamKind};
use pursuit_core::tmpc::{self, TubeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The five-pursuer scenario: evader at the origin, `u_e = 1`, `u_p = 1.1`,
/// `r_c = 5`, four sectors, horizon 10, `Q = I`, `R = 0`, `P = 3I`.
pub fn five_pursuers() -> ScenarioConfig {
    ScenarioConfig {
        pursuers: vec![
            Vec2::new(10.0, 90.0),
            Vec2::new(-60.0, 80.0),
            Vec2::new(-90.0, -90.0),
            Vec2::new(90.0, -10.0),
            Vec2::new(-90.0, 30.0),
        ],
        evader: Vec2::ZERO,
        ..ScenarioConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub label: String,
    pub outcome: Outcome,
    /// Ticks with the watched hull not containing the evader.
    pub violations: usize,
    pub min_hull_distance: f64,
}

impl RunSummary {
    fn from_run(label: String, run: &GameRun) -> Self {
        Self {
            label,
            outcome: run.outcome,
            violations: run.violations(),
            min_hull_distance: run
                .records
                .iter()
                .map(|r| r.hull_distance_assigned)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn captured_by(&self, limit: usize) -> bool {
        matches!(self.outcome, Outcome::Captured(t) if t <= limit)
    }
}

pub fn run_with(base: &ScenarioConfig, team: TeamKind, evader: EvaderKind, seed: u64) -> RunSummary {
    let cfg = ScenarioConfig {
        team,
        evader_policy: evader,
        seed,
        ..base.clone()
    };
    let run = sim::run_game(&cfg).expect("scenario runs");
    RunSummary::from_run(format!("{team:?} vs {evader:?} seed {seed}"), &run)
}

/// An externally driven evader that plays a uniformly random corner of its
/// input box every tick.
pub fn run_random_vertices(base: &ScenarioConfig, team: TeamKind, seed: u64) -> RunSummary {
    let cfg = ScenarioConfig {
        team,
        evader_policy: EvaderKind::External,
        seed,
        ..base.clone()
    };
    let r = cfg.evader_speed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut game = Game::new(cfg).expect("scenario initializes");
    let mut records = vec![game.snapshot()];
    while !game.is_over() {
        let u = Vec2::new(
            if rng.random_bool(0.5) { r } else { -r },
            if rng.random_bool(0.5) { r } else { -r },
        );
        records.push(game.tick_with(Some(u)).expect("tick"));
    }
    let run = GameRun {
        outcome: game.outcome(),
        records,
    };
    RunSummary::from_run(format!("{team:?} vs random vertices seed {seed}"), &run)
}

/// Tube team against every scripted evader: static, 50 seeds of uniform
/// random input, flee-nearest, boundary seeking, the one-step worst-vertex
/// adversary and 10 seeds of random vertex sequences.
pub fn encirclement_suite(base: &ScenarioConfig) -> Vec<RunSummary> {
    let team = TeamKind::Tmpc;
    let mut out = vec![run_with(base, team, EvaderKind::Static, 0)];
    out.extend((0..50).map(|s| run_with(base, team, EvaderKind::RandomInW, s)));
    out.push(run_with(base, team, EvaderKind::FleeNearest, 0));
    out.push(run_with(base, team, EvaderKind::BoundarySeek, 0));
    out.push(run_with(base, team, EvaderKind::WorstVertex, 0));
    out.extend((0..10).map(|s| run_random_vertices(base, team, s)));
    out
}

/// Tube specification of each sector the tube team builds for `cfg`, with
/// the sector's start angle and width.
pub fn tube_specs(cfg: &ScenarioConfig) -> Vec<SectorTube> {
    let game = Game::new(ScenarioConfig {
        team: TeamKind::Tmpc,
        ..cfg.clone()
    })
    .expect("scenario initializes");
    let Team::Tmpc(team) = game.team() else { unreachable!() };
    let p = team.sectors.partition();
    p.ray_angles()
        .iter()
        .zip(p.angles())
        .zip(&team.specs)
        .map(|((&start, &width), spec)| SectorTube {
            spec: spec.clone(),
            start,
            width,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SectorTube {
    pub spec: TubeSpec,
    pub start: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    pub starts: usize,
    /// Closed-loop steps over all starts.
    pub steps: usize,
    /// Sampled initial states rejected because the problem was infeasible.
    pub rejected_starts: usize,
    /// Steps at which a previously feasible problem became infeasible.
    pub infeasible_steps: usize,
    /// Steps whose state left `z_0 ⊕ 𝒮` or the sector.
    pub tube_escapes: usize,
    pub max_input: f64,
}

/// Closed-loop check of the tube controller in one sector's relative frame.
/// Initial states are drawn in the sector at radius up to `max_radius` and
/// kept when the problem is feasible. Even-numbered starts face the
/// disturbance vertex that pushes the next state furthest toward the sector
/// boundary, odd-numbered ones a random vertex.
pub fn recursive_feasibility(
    tube: &SectorTube,
    starts: usize,
    steps: usize,
    max_radius: f64,
    seed: u64,
) -> FeasibilityReport {
    let opts = QpOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FeasibilityReport::default();
    let spec = &tube.spec;
    let sector = spec.sector();
    let vertices = spec.disturbance().vertices().expect("bounded disturbance");
    while report.starts < starts {
        let x0 = Vec2::from_angle(tube.start + rng.random_range(0.0..tube.width)) * rng.random_range(0.0..max_radius);
        if tmpc::solve_plan(x0, spec, &opts).is_err() {
            report.rejected_starts += 1;
            continue;
        }
        let adversarial = report.starts % 2 == 0;
        report.starts += 1;
        let mut x = x0;
        for _ in 0..steps {
            report.steps += 1;
            let Ok(plan) = tmpc::solve_plan(x, spec, &opts) else {
                report.infeasible_steps += 1;
                break;
            };
            if !spec.invariant().translate(plan.nominal_states[0]).contains(x, 1e-9) {
                report.tube_escapes += 1;
            }
            let u = tmpc::control(x, &plan);
            report.max_input = report.max_input.max(u.norm_inf());
            let w = if adversarial {
                *vertices
                    .iter()
                    .max_by(|a, b| sector.max_violation(x + u + **a).total_cmp(&sector.max_violation(x + u + **b)))
                    .unwrap()
            } else {
                vertices[rng.random_range(0..vertices.len())]
            };
            x = tmpc::step_relative(x, u, w);
            if !sector.contains(x, 1e-9) {
                report.tube_escapes += 1;
            }
        }
    }
    report
}
