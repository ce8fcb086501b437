use pursuit_core::geom::Vec2;
use pursuit_core::policy::EvaderKind;
use pursuit_core::sim::{run_game, Game, Outcome, ScenarioConfig, SimError, TeamKind};
use pursuit_testkit::harness::{encirclement_suite, five_pursuers, run_with};

#[test]
fn scenario_initializes_with_four_holders_and_one_free_chaser() {
    let game = Game::new(five_pursuers()).unwrap();
    let s = game.state();
    let held: Vec<usize> = s.assignment.iter().filter_map(|a| *a).collect();
    assert_eq!(held.len(), 4);
    let mut sectors = held.clone();
    sectors.sort();
    assert_eq!(sectors, vec![0, 1, 2, 3]);
    assert_eq!(s.assignment.iter().filter(|a| a.is_none()).count(), 1);
    assert!(s.encircled && !s.captured);
}

#[test]
fn evader_outside_hull_is_rejected() {
    let cfg = ScenarioConfig {
        evader: Vec2::new(500.0, 0.0),
        ..five_pursuers()
    };
    assert_eq!(Game::new(cfg).unwrap_err(), SimError::NotEncircled);
}

#[test]
fn three_pursuers_are_rejected() {
    let mut cfg = five_pursuers();
    cfg.pursuers.truncate(3);
    assert!(matches!(Game::new(cfg), Err(SimError::InvalidConfig(_))));
}

#[test]
fn static_evader_inside_tight_ring_is_caught_on_schedule() {
    let cfg = ScenarioConfig {
        pursuers: vec![
            Vec2::new(20.0, 0.0),
            Vec2::new(0.0, 20.0),
            Vec2::new(-20.0, 0.0),
            Vec2::new(0.0, -20.0),
        ],
        team: TeamKind::DirectCharge,
        ..ScenarioConfig::default()
    };
    let bound = ((20.0 - cfg.capture_radius) / cfg.pursuer_speed).ceil() as usize + 1;
    let run = run_game(&cfg).unwrap();
    match run.outcome {
        Outcome::Captured(t) => assert!(t <= bound, "{t} > {bound}"),
        other => panic!("{other:?}"),
    }
    // Direct charge at a static target shrinks the gap every tick.
    for w in run.records.windows(2) {
        assert!(w[1].min_pursuer_distance < w[0].min_pursuer_distance);
    }
}

#[test]
fn fleeing_evader_times_out_inside_a_distant_static_ring() {
    let cfg = ScenarioConfig {
        pursuers: vec![
            Vec2::new(1000.0, 0.0),
            Vec2::new(0.0, 1000.0),
            Vec2::new(-1000.0, 0.0),
            Vec2::new(0.0, -1000.0),
        ],
        team: TeamKind::Stationary,
        evader_policy: EvaderKind::FleeNearest,
        ..ScenarioConfig::default()
    };
    let run = run_game(&cfg).unwrap();
    assert_eq!(run.outcome, Outcome::Timeout);
    assert!(run.records.iter().all(|r| r.encircled));
    assert_eq!(run.records.len(), cfg.max_steps + 1);
}

#[test]
fn runs_are_reproducible() {
    let cfg = ScenarioConfig {
        evader_policy: EvaderKind::RandomInW,
        seed: 17,
        ..five_pursuers()
    };
    assert_eq!(run_game(&cfg).unwrap(), run_game(&cfg).unwrap());
}

#[test]
fn capture_flag_flips_at_first_close_approach() {
    let cfg = ScenarioConfig {
        evader_policy: EvaderKind::FleeNearest,
        ..five_pursuers()
    };
    let run = run_game(&cfg).unwrap();
    let first = run.records.iter().position(|r| r.min_pursuer_distance <= cfg.capture_radius).unwrap();
    for (k, r) in run.records.iter().enumerate() {
        assert_eq!(r.captured, k >= first);
    }
    assert_eq!(run.outcome, Outcome::Captured(run.records[first].t));
}

#[test]
fn tube_team_keeps_the_evader_encircled_and_captures() {
    let base = five_pursuers();
    for s in encirclement_suite(&base) {
        assert_eq!(s.violations, 0, "{}: min hull distance {}", s.label, s.min_hull_distance);
        assert!(s.captured_by(base.max_steps), "{}: {:?}", s.label, s.outcome);
    }
}

#[test]
fn baselines_lose_the_encirclement_against_boundary_seeking() {
    let base = five_pursuers();
    for team in [TeamKind::VoronoiCentroid, TeamKind::DirectCharge] {
        let s = run_with(&base, team, EvaderKind::BoundarySeek, 0);
        assert!(s.violations >= 1, "{}", s.label);
    }
    assert_eq!(run_with(&base, TeamKind::Tmpc, EvaderKind::BoundarySeek, 0).violations, 0);
}

#[test]
fn sector_holders_stay_fixed_from_initialization() {
    let mut cfg = five_pursuers();
    cfg.evader_policy = EvaderKind::External;
    let mut game = Game::new(cfg).unwrap();
    let initial = game.state().assignment.clone();
    // Alternate corners so holders drift onto shared sector rays.
    let mut k = 0;
    while !game.is_over() {
        let u = if k % 3 == 0 { Vec2::new(1.0, -1.0) } else { Vec2::new(-1.0, 1.0) };
        game.tick_with(Some(u)).unwrap();
        assert_eq!(game.state().assignment, initial, "t = {}", game.state().t);
        k += 1;
    }
}
