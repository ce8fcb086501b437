//! Discrete-time game loop and per-tick metrics.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geom::{self, ConvexHull, HPolyhedron, Vec2, TOL};
use crate::partition::{self, PartitionError, SectorSet};
use crate::policy::{
    self, EvaderController, EvaderKind, EvaderView, PolicyError, TmpcTeam, DEFAULT_VIRTUAL_MARGIN,
};
use crate::qp::QpOptions;
use crate::tmpc::{self, TmpcError, TubeSpec, Weights, DEFAULT_HORIZON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TeamKind {
    Tmpc,
    VoronoiCentroid,
    DirectCharge,
    /// Pursuers hold position; a reference for evader behaviour.
    Stationary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub pursuers: Vec<Vec2>,
    pub evader: Vec2,
    pub pursuer_speed: f64,
    pub evader_speed: f64,
    pub capture_radius: f64,
    /// Number of partition sectors `M`.
    pub partitions: usize,
    pub horizon: usize,
    pub weights: Weights,
    pub max_steps: usize,
    pub seed: u64,
    pub team: TeamKind,
    pub evader_policy: EvaderKind,
    pub virtual_margin: f64,
    /// Strict-inequality margin of the partition problem.
    pub partition_eps: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            pursuers: Vec::new(),
            evader: Vec2::ZERO,
            pursuer_speed: 1.1,
            evader_speed: 1.0,
            capture_radius: 5.0,
            partitions: 4,
            horizon: DEFAULT_HORIZON,
            weights: Weights::default(),
            max_steps: 500,
            seed: 0,
            team: TeamKind::Tmpc,
            evader_policy: EvaderKind::Static,
            virtual_margin: DEFAULT_VIRTUAL_MARGIN,
            partition_eps: partition::DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(&'static str),
    #[error("the evader is not inside the pursuers' convex hull at t = 0")]
    NotEncircled,
    #[error("no encirclement guaranteed partition exists for this start")]
    InfeasiblePartition,
    #[error("partition: {0}")]
    Partition(PartitionError),
    #[error("no pursuer in sector {0} starts with a feasible tube problem")]
    InitialTmpcInfeasible(usize),
    #[error("tube setup: {0}")]
    Tube(#[from] TmpcError),
    #[error("policy at t = {t}: {source}")]
    Policy { t: usize, source: PolicyError },
    #[error("game already finished")]
    Finished,
}

impl From<PartitionError> for SimError {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::InfeasiblePartition | PartitionError::NoEncirclingSubset => SimError::InfeasiblePartition,
            other => SimError::Partition(other),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = SimError::InvalidConfig;
        let finite = |x: f64| x.is_finite();
        if !self.pursuers.iter().all(|p| p.is_finite()) || !self.evader.is_finite() {
            return Err(bad("non-finite position"));
        }
        if !(finite(self.evader_speed) && self.evader_speed > 0.0) {
            return Err(bad("evader speed must be positive"));
        }
        if !(finite(self.pursuer_speed) && self.pursuer_speed >= self.evader_speed) {
            return Err(bad("pursuer speed must be at least the evader speed"));
        }
        if !(finite(self.capture_radius) && self.capture_radius > 0.0) {
            return Err(bad("capture radius must be positive"));
        }
        if self.partitions < partition::min_partition_size() {
            return Err(bad("at least 4 partitions are needed"));
        }
        if self.pursuers.len() < self.partitions {
            return Err(bad("fewer pursuers than partitions"));
        }
        if self.horizon == 0 {
            return Err(bad("horizon must be at least 1"));
        }
        if !(finite(self.virtual_margin) && self.virtual_margin > 0.0) {
            return Err(bad("virtual margin must be positive"));
        }
        if !(finite(self.partition_eps) && self.partition_eps > 0.0) {
            return Err(bad("partition margin must be positive"));
        }
        Ok(())
    }
}

/// Signed distance from `e` to the hull of `points` (positive inside).
/// Values within the geometric tolerance of zero are reported as zero.
pub fn hull_signed_distance(points: &[Vec2], e: Vec2) -> f64 {
    let d = geom::hull_signed_distance(points, e);
    if d < 0.0 && d > -TOL {
        0.0
    } else {
        d
    }
}

/// Whether `e` lies in the (closed) convex hull of `points`.
pub fn is_encircled(points: &[Vec2], e: Vec2) -> bool {
    match ConvexHull::new(points) {
        Ok(h) => h.contains(e).inside,
        Err(_) => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub t: usize,
    pub pursuers: Vec<Vec2>,
    pub evader: Vec2,
    pub captured: bool,
    /// Evader inside the hull of all pursuers.
    pub encircled: bool,
    /// `assignment[i]` is the sector pursuer `i` currently holds, if any.
    pub assignment: Vec<Option<usize>>,
}

impl GameState {
    /// Pursuers spanning the watched hull: the sector holders under the tube
    /// policy, everybody otherwise.
    pub fn hull_members(&self) -> Vec<usize> {
        let held: Vec<usize> = (0..self.pursuers.len()).filter(|&i| self.assignment[i].is_some()).collect();
        if held.is_empty() {
            (0..self.pursuers.len()).collect()
        } else {
            let mut by_sector = held;
            by_sector.sort_by_key(|&i| self.assignment[i]);
            by_sector
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub pursuers: Vec<Vec2>,
    pub evader: Vec2,
    /// Controls that produced this state (zero at `t = 0`).
    pub pursuer_controls: Vec<Vec2>,
    pub evader_control: Vec2,
    pub hull_members: Vec<usize>,
    pub min_pursuer_distance: f64,
    pub hull_distance_assigned: f64,
    pub hull_distance_all: f64,
    pub encircled: bool,
    pub captured: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Captured(usize),
    /// First tick at which the watched hull no longer contained the evader.
    Escaped(usize),
    Timeout,
}

#[derive(Debug, Clone)]
pub enum Team {
    Tmpc(TmpcTeam),
    VoronoiCentroid { margin: f64 },
    DirectCharge,
    Stationary,
}

#[derive(Debug, Clone)]
pub struct Game {
    cfg: ScenarioConfig,
    state: GameState,
    team: Team,
    evader: EvaderController,
    first_violation: Option<usize>,
}

fn build_tmpc_team(cfg: &ScenarioConfig) -> Result<(TmpcTeam, Vec<usize>), SimError> {
    let ra = partition::relative_angles(&cfg.pursuers, cfg.evader)?;
    let w = HPolyhedron::inf_ball(cfg.evader_speed);
    let u = HPolyhedron::inf_ball(cfg.pursuer_speed);
    let mut last = SimError::InfeasiblePartition;
    for subset in partition::ranked_subsets(&ra, cfg.partitions)? {
        let part = match partition::construct_egp(&ra, &subset, cfg.partition_eps) {
            Ok(p) => p,
            Err(PartitionError::InfeasiblePartition) => continue,
            Err(e) => return Err(e.into()),
        };
        let sectors = partition::sectors_from_partition(&part)?;
        let specs = sectors
            .elements()
            .iter()
            .map(|s| tmpc::tighten(s, &w, &u, cfg.horizon, cfg.weights))
            .collect::<Result<Vec<TubeSpec>, _>>();
        let specs = match specs {
            Ok(s) => s,
            Err(TmpcError::EmptyTightenedState) => {
                last = SimError::Tube(TmpcError::EmptyTightenedState);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let team = TmpcTeam {
            sectors,
            specs,
            qp_options: QpOptions::default(),
        };
        match policy::tmpc_team(&cfg.pursuers, cfg.evader, &team, cfg.pursuer_speed, None) {
            Ok(step) => return Ok((team, step.responsible)),
            Err(PolicyError::SectorVacated(m)) => last = SimError::InitialTmpcInfeasible(m),
            Err(source) => return Err(SimError::Policy { t: 0, source }),
        }
    }
    Err(last)
}

impl Game {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        if !is_encircled(&cfg.pursuers, cfg.evader) {
            return Err(SimError::NotEncircled);
        }
        let n = cfg.pursuers.len();
        let mut assignment = vec![None; n];
        let team = match cfg.team {
            TeamKind::Tmpc => {
                let (team, responsible) = build_tmpc_team(&cfg)?;
                for (m, &i) in responsible.iter().enumerate() {
                    assignment[i] = Some(m);
                }
                Team::Tmpc(team)
            }
            TeamKind::VoronoiCentroid => Team::VoronoiCentroid {
                margin: cfg.virtual_margin,
            },
            TeamKind::DirectCharge => Team::DirectCharge,
            TeamKind::Stationary => Team::Stationary,
        };
        let evader = EvaderController::new(cfg.evader_policy, cfg.evader_speed, cfg.seed);
        let state = GameState {
            t: 0,
            pursuers: cfg.pursuers.clone(),
            evader: cfg.evader,
            captured: false,
            encircled: true,
            assignment,
        };
        let mut game = Self {
            cfg,
            state,
            team,
            evader,
            first_violation: None,
        };
        game.state.captured = game.min_pursuer_distance() <= game.cfg.capture_radius;
        Ok(game)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn team(&self) -> &Team {
        &self.team
    }

    /// Sector layout when the tube policy is active.
    pub fn sectors(&self) -> Option<&SectorSet> {
        match &self.team {
            Team::Tmpc(t) => Some(&t.sectors),
            _ => None,
        }
    }

    pub fn is_over(&self) -> bool {
        self.state.captured || self.state.t >= self.cfg.max_steps
    }

    pub fn outcome(&self) -> Outcome {
        if self.state.captured {
            Outcome::Captured(self.state.t)
        } else if let Some(t) = self.first_violation {
            Outcome::Escaped(t)
        } else {
            Outcome::Timeout
        }
    }

    fn min_pursuer_distance(&self) -> f64 {
        self.state
            .pursuers
            .iter()
            .map(|p| p.distance(self.state.evader))
            .fold(f64::INFINITY, f64::min)
    }

    fn record(&self, pursuer_controls: Vec<Vec2>, evader_control: Vec2) -> StepRecord {
        let members = self.state.hull_members();
        let pts: Vec<Vec2> = members.iter().map(|&i| self.state.pursuers[i]).collect();
        StepRecord {
            t: self.state.t,
            pursuers: self.state.pursuers.clone(),
            evader: self.state.evader,
            pursuer_controls,
            evader_control,
            hull_members: members,
            min_pursuer_distance: self.min_pursuer_distance(),
            hull_distance_assigned: hull_signed_distance(&pts, self.state.evader),
            hull_distance_all: hull_signed_distance(&self.state.pursuers, self.state.evader),
            encircled: self.state.encircled,
            captured: self.state.captured,
        }
    }

    /// Record of the current state with zero controls.
    pub fn snapshot(&self) -> StepRecord {
        self.record(vec![Vec2::ZERO; self.state.pursuers.len()], Vec2::ZERO)
    }

    /// Advances one tick with the configured evader policy.
    pub fn tick(&mut self) -> Result<StepRecord, SimError> {
        self.tick_with(None)
    }

    /// Advances one tick; `external` is the pending action for an
    /// [`EvaderKind::External`] evader and ignored otherwise.
    pub fn tick_with(&mut self, external: Option<Vec2>) -> Result<StepRecord, SimError> {
        if self.is_over() {
            return Err(SimError::Finished);
        }
        let s = &self.state;
        let u_max = self.cfg.pursuer_speed;
        let (controls, responsible) = match &self.team {
            Team::Tmpc(team) => {
                let mut held: Vec<(usize, usize)> =
                    s.assignment.iter().enumerate().filter_map(|(i, a)| a.map(|m| (m, i))).collect();
                held.sort_unstable();
                let previous: Vec<usize> = held.into_iter().map(|(_, i)| i).collect();
                let step = policy::tmpc_team(&s.pursuers, s.evader, team, u_max, Some(&previous))
                    .map_err(|source| SimError::Policy { t: s.t, source })?;
                (step.controls, Some(step.responsible))
            }
            Team::VoronoiCentroid { margin } => (policy::voronoi_centroid(&s.pursuers, s.evader, u_max, *margin), None),
            Team::DirectCharge => (
                s.pursuers.iter().map(|&p| policy::direct_charge(p, s.evader, u_max)).collect(),
                None,
            ),
            Team::Stationary => (vec![Vec2::ZERO; s.pursuers.len()], None),
        };

        let mut assignment = vec![None; s.pursuers.len()];
        if let Some(r) = &responsible {
            for (m, &i) in r.iter().enumerate() {
                assignment[i] = Some(m);
            }
        }
        let members = match &responsible {
            Some(r) => r.clone(),
            None => (0..s.pursuers.len()).collect(),
        };
        let view = EvaderView {
            pursuers: &s.pursuers,
            evader: s.evader,
            hull_members: &members,
            pursuer_controls: &controls,
            external,
        };
        let ue = self.evader.step(&view);

        let state = &mut self.state;
        for (p, u) in state.pursuers.iter_mut().zip(&controls) {
            *p += *u;
        }
        state.evader += ue;
        state.t += 1;
        state.assignment = assignment;
        state.encircled = is_encircled(&state.pursuers, state.evader);
        self.state.captured = self.min_pursuer_distance() <= self.cfg.capture_radius;
        let rec = self.record(controls, ue);
        if rec.hull_distance_assigned < 0.0 && self.first_violation.is_none() {
            self.first_violation = Some(rec.t);
        }
        Ok(rec)
    }
}

/// Result of a full game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameRun {
    pub outcome: Outcome,
    /// Initial state at index 0, then one record per tick.
    pub records: Vec<StepRecord>,
}

impl GameRun {
    /// Ticks whose watched hull does not contain the evader.
    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| r.hull_distance_assigned < 0.0).count()
    }
}

/// Initializes and plays until capture or the step cap.
pub fn run_game(cfg: &ScenarioConfig) -> Result<GameRun, SimError> {
    let mut game = Game::new(cfg.clone())?;
    let mut records = vec![game.snapshot()];
    while !game.is_over() {
        records.push(game.tick()?);
    }
    Ok(GameRun {
        outcome: game.outcome(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn scenario() -> ScenarioConfig {
        ScenarioConfig {
            pursuers: vec![v(10.0, 90.0), v(-60.0, 80.0), v(-90.0, -90.0), v(90.0, -10.0), v(-90.0, 30.0)],
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn unit_square_metric() {
        let sq = [v(-1.0, -1.0), v(1.0, -1.0), v(1.0, 1.0), v(-1.0, 1.0)];
        assert_eq!(hull_signed_distance(&sq, Vec2::ZERO), 1.0);
        assert_eq!(hull_signed_distance(&sq, v(1.0, 0.0)), 0.0);
        assert!((hull_signed_distance(&sq, v(4.0, 5.0)) + 5.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = scenario();
        c.pursuers.truncate(3);
        assert!(matches!(Game::new(c), Err(SimError::InvalidConfig(_))));
        let mut c = scenario();
        c.evader = v(200.0, 0.0);
        assert_eq!(Game::new(c).unwrap_err(), SimError::NotEncircled);
        let mut c = scenario();
        c.pursuer_speed = 0.9;
        assert!(matches!(Game::new(c), Err(SimError::InvalidConfig(_))));
    }

    #[test]
    fn scenario_init_assigns_four() {
        let g = Game::new(scenario()).unwrap();
        assert_eq!(g.state().assignment.iter().filter(|a| a.is_some()).count(), 4);
        assert_eq!(g.state().hull_members().len(), 4);
    }

    #[test]
    fn static_agents_stay_put() {
        let mut c = scenario();
        c.team = TeamKind::DirectCharge;
        c.pursuer_speed = 1.0;
        let mut g = Game::new(c).unwrap();
        let before = g.state().pursuers.clone();
        let rec = g.tick().unwrap();
        assert_eq!(rec.t, 1);
        assert_ne!(rec.pursuers, before);
        assert_eq!(rec.evader, Vec2::ZERO);
    }

    #[test]
    fn direct_charge_captures_static_evader() {
        let ring: Vec<Vec2> = (0..4)
            .map(|k| Vec2::from_angle(k as f64 * core::f64::consts::FRAC_PI_2) * 20.0)
            .collect();
        let cfg = ScenarioConfig {
            pursuers: ring,
            team: TeamKind::DirectCharge,
            ..ScenarioConfig::default()
        };
        let run = run_game(&cfg).unwrap();
        let bound = libm::ceil((20.0 - 5.0) / 1.1) as usize + 1;
        match run.outcome {
            Outcome::Captured(t) => assert!(t <= bound),
            o => panic!("{o:?}"),
        }
        for w in run.records.windows(2) {
            assert!(w[1].min_pursuer_distance < w[0].min_pursuer_distance);
        }
    }

    #[test]
    fn tmpc_static_evader_captured() {
        let run = run_game(&scenario()).unwrap();
        assert!(matches!(run.outcome, Outcome::Captured(_)), "{:?}", run.outcome);
        assert_eq!(run.violations(), 0);
    }

    #[test]
    fn finished_game_refuses_ticks() {
        let mut c = scenario();
        c.max_steps = 1;
        let mut g = Game::new(c).unwrap();
        g.tick().unwrap();
        assert_eq!(g.tick(), Err(SimError::Finished));
    }
}
