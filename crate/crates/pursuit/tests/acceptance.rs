//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs at full size; expect a minute or two with optimizations.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use pursuit::commands::cmd_egp;
use pursuit::egp::sample_encircling;
use pursuit::scenario::{Scenario, FIVE_PURSUERS};
use pursuit_core::geom::{HPolyhedron, HalfPlane, Vec2};
use pursuit_core::partition::{
    construct_egp, construct_egp_from_bearings, egp_oracle, egp_program, relative_angles, AnglePartition,
    PartitionError, DEFAULT_EPS,
};
use pursuit_core::policy::EvaderKind;
use pursuit_core::qp::{check_kkt, solve, QpOptions, QpStatus};
use pursuit_core::sim::TeamKind;
use pursuit_testkit::harness::{encirclement_suite, five_pursuers, recursive_feasibility, run_with, tube_specs};
use pursuit_testkit::{checks, generate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Adjacent-sum EGP test against the sampling oracle, 1000 partitions for
/// each M in {4, 5, 6}, under 30 s.
fn egp_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut counts = Vec::new();
    for m in [4usize, 5, 6] {
        let mut yes = 0;
        for i in 0..1000 {
            let p = generate::random_partition(&mut rng, m, i);
            let verdict = p.is_egp();
            ensure(verdict == egp_oracle(&p, 300, i as u64), || {
                format!("M={m} #{i}: test says {verdict} for {:?}", p.angles())
            })?;
            yes += verdict as usize;
        }
        counts.push(format!("M={m}: {yes} EGP / {} not", 1000 - yes));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("0 disagreements; {}; {secs:.1} s", counts.join(", ")))
}

/// No partition with three sectors on 100 random configurations or on a
/// 0.01 rad bearing sweep.
fn three_sectors_infeasible() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for k in 0..100 {
        let pts = generate::random_triple(&mut rng);
        let ra = relative_angles(&pts, Vec2::ZERO).map_err(|e| e.to_string())?;
        let r = construct_egp(&ra, &[0, 1, 2], DEFAULT_EPS);
        ensure(r == Err(PartitionError::InfeasiblePartition), || {
            format!("configuration {k} {pts:?}: {r:?}")
        })?;
    }
    // Rotation invariance lets the first bearing sit at 0.
    let steps = (TAU / 0.01) as usize;
    let mut cases = 0usize;
    for i in 1..steps {
        for j in i + 1..steps {
            let alpha = [0.0, i as f64 * 0.01, j as f64 * 0.01];
            let r = construct_egp_from_bearings(&alpha, DEFAULT_EPS);
            ensure(r == Err(PartitionError::InfeasiblePartition), || format!("{alpha:?}: {r:?}"))?;
            cases += 1;
        }
    }
    Ok(format!("0 feasible of 100 random + {cases} sweep configurations"))
}

/// Minkowski sum and Pontryagin difference against lattice oracles on 200
/// pairs each (spacing 0.05), cone minus box against the offset formula.
fn set_operations() -> Verdict {
    const SPACING: f64 = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for k in 0..200 {
        let x = generate::polygon(&mut rng, 1.0, 0.8..2.0, 9);
        let s = generate::polygon(&mut rng, 0.1, 0.05..0.4, 7);
        checks::pontryagin_pair(&x, &s, SPACING).map_err(|e| format!("difference pair {k}: {e}"))?;
        let a = generate::polygon(&mut rng, 1.0, 0.5..1.5, 9);
        let b = generate::polygon(&mut rng, 0.5, 0.1..0.5, 7);
        checks::minkowski_pair(&a, &b, SPACING).map_err(|e| format!("sum pair {k}: {e}"))?;
    }
    for k in 0..1000 {
        let cone = HPolyhedron::cone(rng.random_range(-4.0..4.0), rng.random_range(0.05..3.1));
        let r = rng.random_range(0.01..3.0);
        let got = cone.pontryagin_diff(&HPolyhedron::inf_ball(r)).map_err(|e| e.to_string())?;
        let expected = HPolyhedron::new(cone.halfplanes().iter().map(|h| {
            let a = h.normal();
            HalfPlane::new(a, h.offset() - r * (a.x.abs() + a.y.abs())).unwrap()
        }));
        ensure(got.approx_eq(&expected, 1e-9), || format!("cone {k}"))?;
    }
    Ok("200 + 200 lattice pairs agree to 0.05; 1000 cones exact to 1e-9".into())
}

/// Tube team against every scripted evader, 500-step cap: never outside the
/// hull of the four sector holders (criterion 4) and always captured
/// (criterion 6).
fn encirclement_and_capture() -> (Verdict, Verdict) {
    let start = Instant::now();
    let base = five_pursuers();
    let runs = encirclement_suite(&base);
    let secs = start.elapsed().as_secs_f64();
    let bad: Vec<String> = runs
        .iter()
        .filter(|r| r.violations > 0)
        .map(|r| format!("{} ({} ticks, min {:.3})", r.label, r.violations, r.min_hull_distance))
        .collect();
    let c4 = if !bad.is_empty() {
        Err(bad.join("; "))
    } else if secs >= 300.0 {
        Err(format!("took {secs:.0} s"))
    } else {
        let min = runs.iter().map(|r| r.min_hull_distance).fold(f64::INFINITY, f64::min);
        Ok(format!("{} runs, 0 violations, smallest hull distance {min:.3}; {secs:.1} s", runs.len()))
    };
    let missed: Vec<String> = runs
        .iter()
        .filter(|r| !r.captured_by(base.max_steps))
        .map(|r| format!("{}: {:?}", r.label, r.outcome))
        .collect();
    let c6 = if missed.is_empty() {
        let latest = runs
            .iter()
            .filter_map(|r| match r.outcome {
                pursuit_core::sim::Outcome::Captured(t) => Some(t),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        Ok(format!("all {} runs captured, latest at t = {latest}", runs.len()))
    } else {
        Err(missed.join("; "))
    };
    (c4, c6)
}

/// Against the boundary-seeking evader both baselines lose the hull at least
/// once; the tube team never does.
fn baseline_contrast() -> Verdict {
    let base = five_pursuers();
    let mut parts = Vec::new();
    for team in [TeamKind::Tmpc, TeamKind::VoronoiCentroid, TeamKind::DirectCharge] {
        let r = run_with(&base, team, EvaderKind::BoundarySeek, 0);
        match team {
            TeamKind::Tmpc => ensure(r.violations == 0, || format!("tube team: {} violations", r.violations))?,
            _ => ensure(r.violations >= 1, || format!("{team:?}: no violation ({:?})", r.outcome))?,
        }
        parts.push(format!("{team:?} {}", r.violations));
    }
    Ok(format!("violations: {}", parts.join(", ")))
}

/// 1000 starts per sector, 100 steps of vertex disturbances each.
fn recursive_feasibility_check() -> Verdict {
    let cfg = five_pursuers();
    let limit = cfg.pursuer_speed + 1e-9;
    let mut worst = 0.0f64;
    let mut total = 0;
    for (m, tube) in tube_specs(&cfg).iter().enumerate() {
        let r = recursive_feasibility(tube, 1000, 100, 200.0, 1000 + m as u64);
        ensure(r.starts == 1000 && r.infeasible_steps == 0 && r.tube_escapes == 0 && r.max_input <= limit, || {
            format!("sector {m}: {r:?}")
        })?;
        worst = worst.max(r.max_input);
        total += r.steps;
    }
    Ok(format!("4 x 1000 starts, {total} feasible steps, max |u| = {worst:.12}"))
}

/// KKT on 1000 random programs, planar programs against a 1e-3 lattice,
/// and the symmetric partition program.
fn qp_solver() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let qp = generate::any_feasible_qp(&mut rng);
        let sol = solve(&qp, &QpOptions::default()).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(sol.status == QpStatus::Optimal, || format!("instance {k}: {:?}", sol.status))?;
        let r = check_kkt(&qp, &sol.x, &sol.multipliers).max();
        ensure(r <= 1e-6, || format!("instance {k}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    let mut far = 0.0f64;
    for k in 0..100 {
        let qp = generate::planar_qp(&mut rng);
        far = far.max(checks::planar_argmin(&qp, 1e-3).map_err(|e| format!("planar {k}: {e}"))?);
    }
    let alpha: Vec<f64> = (0..4).map(|k| PI / 4.0 + k as f64 * PI / 2.0).collect();
    let sol = solve(&egp_program(&alpha, DEFAULT_EPS), &QpOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        sol.status == QpStatus::Optimal
            && sol.x[0].abs() <= 1e-9
            && (1..5).all(|i| (sol.x[i] - PI / 2.0).abs() <= 1e-9)
            && sol.objective.abs() <= 1e-9,
        || format!("symmetric program: {:?} cost {}", sol.x.as_slice(), sol.objective),
    )?;
    Ok(format!(
        "worst KKT residual {worst:.1e}; 100 planar within bounds (max offset {far:.1e}); symmetric cost {:.1e}",
        sol.objective.abs()
    ))
}

/// Seven pursuers uniform in [-5, 5]² around the evader: a partition for
/// M = 4, 5, 6 on at least 95% of 200 encircling starts, each one checked
/// like criterion 1 and holding its assigned pursuers.
fn random_start_partitions() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let starts: Vec<Vec<Vec2>> = (0..200).map(|_| sample_encircling(&mut rng, 7, 5.0)).collect();
    let mut rates = Vec::new();
    for m in [4usize, 5, 6] {
        let mut ok = 0;
        for (k, pts) in starts.iter().enumerate() {
            let mut s = Scenario::parse(FIVE_PURSUERS).unwrap();
            s.config.pursuers = pts.clone();
            s.config.evader = Vec2::ZERO;
            s.config.partitions = m;
            let Ok(d) = cmd_egp(&s) else { continue };
            let p = AnglePartition::new(d.start_angle, d.angles.clone()).map_err(|e| e.to_string())?;
            ensure(p.is_egp() && egp_oracle(&p, 300, k as u64), || {
                format!("M={m} start {k}: partition {:?} fails the checks", d.angles)
            })?;
            let mut held = d.assigned.clone();
            held.sort();
            held.dedup();
            ensure(held.len() == m && d.assigned.iter().enumerate().all(|(j, &i)| d.pursuer_sectors[i] == j), || {
                format!("M={m} start {k}: assignment {:?} vs sectors {:?}", d.assigned, d.pursuer_sectors)
            })?;
            ok += 1;
        }
        ensure(ok * 100 >= 95 * starts.len(), || format!("M={m}: {ok}/200"))?;
        rates.push(format!("M={m}: {ok}/200"));
    }
    Ok(rates.join(", "))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, v: Verdict| {
        match &v {
            Ok(msg) => println!("criterion {n} PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {msg}");
            }
        }
    };
    report(1, "adjacent-sum test matches the partition oracle", egp_equivalence());
    report(2, "three sectors never admit a partition", three_sectors_infeasible());
    report(3, "set operations match lattice oracles", set_operations());
    let (c4, c6) = encirclement_and_capture();
    report(4, "tube team keeps the evader encircled", c4);
    report(5, "baselines lose the hull, tube team does not", baseline_contrast());
    report(6, "tube team captures within 500 steps", c6);
    report(7, "tube problem stays feasible", recursive_feasibility_check());
    report(8, "QP solver", qp_solver());
    report(9, "partitions for random starts", random_start_partitions());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
