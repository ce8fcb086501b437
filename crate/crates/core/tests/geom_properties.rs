use proptest::prelude::*;
use pursuit_core::geom::{HPolyhedron, Support, Vec2};

fn polygon(max_radius: f64) -> impl Strategy<Value = HPolyhedron> {
    (
        (-1.0..1.0f64, -1.0..1.0f64),
        prop::collection::vec((0.0..std::f64::consts::TAU, 0.2..1.0f64), 3..9),
    )
        .prop_filter_map("degenerate", move |((cx, cy), pts)| {
            let c = Vec2::new(cx, cy);
            let pts: Vec<Vec2> = pts.iter().map(|&(a, r)| c + Vec2::from_angle(a) * (r * max_radius)).collect();
            HPolyhedron::from_points(&pts).ok()
        })
}

fn direction() -> impl Strategy<Value = Vec2> {
    (0.0..std::f64::consts::TAU, 0.1..3.0f64).prop_map(|(a, r)| Vec2::from_angle(a) * r)
}

fn bounded(s: Support) -> f64 {
    match s {
        Support::Bounded(v) => v,
        Support::Unbounded => panic!("bounded polygon reported unbounded support"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn erosion_then_dilation_stays_inside(a in polygon(2.0), s in polygon(0.3)) {
        let eroded = a.pontryagin_diff(&s).unwrap();
        prop_assume!(!eroded.is_empty());
        let back = eroded.minkowski_sum(&s).unwrap();
        for v in back.vertices().unwrap() {
            prop_assert!(a.contains(v, 1e-9), "{v:?}");
        }
    }

    #[test]
    fn support_is_subadditive(a in polygon(2.0), d1 in direction(), d2 in direction()) {
        let lhs = bounded(a.support(d1 + d2).unwrap());
        let rhs = bounded(a.support(d1).unwrap()) + bounded(a.support(d2).unwrap());
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn support_is_attained_at_a_vertex(a in polygon(2.0), d in direction()) {
        let h = bounded(a.support(d).unwrap());
        let best = a.vertices().unwrap().iter().map(|v| v.dot(d)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((h - best).abs() <= 1e-9 * (1.0 + h.abs()));
    }
}
