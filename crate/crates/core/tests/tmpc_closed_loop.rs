use pursuit_testkit::harness::{five_pursuers, recursive_feasibility, tube_specs};

#[test]
fn tube_controller_stays_feasible_under_vertex_disturbances() {
    let cfg = five_pursuers();
    let limit = cfg.pursuer_speed + 1e-9;
    for (m, tube) in tube_specs(&cfg).iter().enumerate() {
        let r = recursive_feasibility(tube, 100, 100, 200.0, m as u64);
        assert_eq!(r.infeasible_steps, 0, "sector {m}: {r:?}");
        assert_eq!(r.tube_escapes, 0, "sector {m}: {r:?}");
        assert!(r.max_input <= limit, "sector {m}: {r:?}");
    }
}
