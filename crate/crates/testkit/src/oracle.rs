//! Brute-force reference computations. Nothing here is fast or clever on
//! purpose: each function restates a definition directly.

use std::collections::HashMap;

use nalgebra::DVector;
use pursuit_core::geom::{ConvexHull, HPolyhedron, Vec2};
use pursuit_core::qp::QuadraticProgram;
use rand::Rng;

/// Membership tolerance used by all oracles.
pub const TOL: f64 = 1e-9;

/// Random convex polygon: the hull of `count` points drawn uniformly from a
/// disc. Retries until the hull covers at least 15% of the disc.
pub fn random_polygon<R: Rng>(rng: &mut R, center: Vec2, radius: f64, count: usize) -> HPolyhedron {
    loop {
        let pts: Vec<Vec2> = (0..count.max(3))
            .map(|_| {
                let r = radius * rng.random_range(0.0f64..1.0).sqrt();
                center + Vec2::from_angle(rng.random_range(0.0..std::f64::consts::TAU)) * r
            })
            .collect();
        if let Ok(p) = HPolyhedron::from_points(&pts) {
            if polygon_area(&p) >= 0.15 * std::f64::consts::PI * radius * radius {
                return p;
            }
        }
    }
}

pub fn polygon_area(p: &HPolyhedron) -> f64 {
    let v = p.vertices().unwrap_or_default();
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Lattice `hℤ²`.
#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    pub spacing: f64,
}

impl Lattice {
    pub fn point(&self, i: i64, j: i64) -> Vec2 {
        Vec2::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    /// Lattice points of the axis box `[lo, hi]`.
    pub fn points_in_box(&self, lo: Vec2, hi: Vec2) -> Vec<Vec2> {
        let h = self.spacing;
        let (i0, i1) = ((lo.x / h).floor() as i64, (hi.x / h).ceil() as i64);
        let (j0, j1) = ((lo.y / h).floor() as i64, (hi.y / h).ceil() as i64);
        let mut out = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                out.push(self.point(i, j));
            }
        }
        out
    }

    /// Lattice points inside a bounded polyhedron.
    pub fn points_in(&self, p: &HPolyhedron) -> Vec<Vec2> {
        let (lo, hi) = bounding_box(p);
        self.points_in_box(lo, hi)
            .into_iter()
            .filter(|q| p.contains(*q, TOL))
            .collect()
    }

    /// Vertices plus points every `spacing` along each edge.
    pub fn boundary_samples(&self, p: &HPolyhedron) -> Vec<Vec2> {
        let v = p.vertices().unwrap_or_default();
        let n = v.len();
        let mut out = Vec::new();
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let steps = ((b - a).norm() / self.spacing).ceil().max(1.0) as usize;
            for k in 0..steps {
                out.push(a + (b - a) * (k as f64 / steps as f64));
            }
        }
        out
    }

    /// Lattice points inside `p` together with its boundary samples.
    pub fn samples(&self, p: &HPolyhedron) -> Vec<Vec2> {
        let mut out = self.points_in(p);
        out.extend(self.boundary_samples(p));
        out
    }
}

pub fn bounding_box(p: &HPolyhedron) -> (Vec2, Vec2) {
    let v = p.vertices().expect("bounded polygon");
    let lo = v.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, q| {
        Vec2::new(m.x.min(q.x), m.y.min(q.y))
    });
    let hi = v.iter().fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, q| {
        Vec2::new(m.x.max(q.x), m.y.max(q.y))
    });
    (lo, hi)
}

/// `X ⊖ S` on the lattice: `q` is a member iff `q + s ∈ X` for every
/// sample `s` of `S`. Returns every lattice point of a box covering the
/// result with its verdict.
pub fn pontryagin_grid(x: &HPolyhedron, s: &HPolyhedron, lattice: Lattice) -> Vec<(Vec2, bool)> {
    let s_samples = lattice.samples(s);
    let (xl, xh) = bounding_box(x);
    let (sl, sh) = bounding_box(s);
    let pad = Vec2::new(lattice.spacing, lattice.spacing);
    lattice
        .points_in_box(xl - sh - pad, xh - sl + pad)
        .into_iter()
        .map(|q| (q, s_samples.iter().all(|p| x.contains(q + *p, TOL))))
        .collect()
}

/// `A ⊕ B` on the lattice: `q` is a member iff `A` and `q - B` intersect,
/// decided by a separating-axis test over all edge normals of both polygons.
pub fn minkowski_grid(a: &HPolyhedron, b: &HPolyhedron, lattice: Lattice) -> Vec<(Vec2, bool)> {
    let va = a.vertices().expect("bounded polygon");
    let vb = b.vertices().expect("bounded polygon");
    let (al, ah) = bounding_box(a);
    let (bl, bh) = bounding_box(b);
    let pad = Vec2::new(lattice.spacing, lattice.spacing);
    lattice
        .points_in_box(al + bl - pad, ah + bh + pad)
        .into_iter()
        .map(|q| {
            let moved: Vec<Vec2> = vb.iter().map(|v| q - *v).collect();
            (q, polygons_intersect(&va, &moved))
        })
        .collect()
}

/// Separating-axis test for two convex vertex lists.
pub fn polygons_intersect(a: &[Vec2], b: &[Vec2]) -> bool {
    let axes = |p: &[Vec2]| -> Vec<Vec2> {
        (0..p.len()).map(|i| (p[(i + 1) % p.len()] - p[i]).perp()).collect()
    };
    let span = |p: &[Vec2], n: Vec2| {
        p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let d = n.dot(*v);
            (lo.min(d), hi.max(d))
        })
    };
    axes(a).into_iter().chain(axes(b)).all(|n| {
        let Some(n) = n.normalized() else { return true };
        let (alo, ahi) = span(a, n);
        let (blo, bhi) = span(b, n);
        ahi >= blo - TOL && bhi >= alo - TOL
    })
}

/// Checks a computed bounded polygon against oracle verdicts: wherever they
/// disagree the point must lie within `band` of the polygon's boundary, so
/// the two sets differ by at most `band` in Hausdorff distance at lattice
/// resolution. Returns the first offending point.
pub fn agrees_within_band(verdicts: &[(Vec2, bool)], computed: &HPolyhedron, band: f64) -> Result<(), Vec2> {
    let hull = if computed.is_empty() {
        None
    } else {
        computed.vertices().ok().and_then(|v| ConvexHull::new(&v).ok())
    };
    for &(q, member) in verdicts {
        let inside = !computed.is_empty() && computed.contains(q, TOL);
        if inside == member {
            continue;
        }
        let near = match &hull {
            Some(h) => h.signed_distance(q).abs() <= band + TOL,
            // Degenerate result (point or segment): distance to its vertices.
            None => computed
                .vertices()
                .unwrap_or_default()
                .iter()
                .any(|v| v.distance(q) <= band + TOL),
        };
        if !near {
            return Err(q);
        }
    }
    Ok(())
}

/// Pairwise sums of samples of `A` and `B`; all of them belong to `A ⊕ B`.
pub fn minkowski_samples(a: &HPolyhedron, b: &HPolyhedron, lattice: Lattice) -> Vec<Vec2> {
    let sa = lattice.samples(a);
    let sb = lattice.samples(b);
    let mut out = Vec::with_capacity(sa.len() * sb.len());
    for p in &sa {
        for q in &sb {
            out.push(*p + *q);
        }
    }
    out
}

/// Point set bucketed on a square grid for radius queries up to the cell size.
pub struct PointIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<Vec2>>,
}

impl PointIndex {
    pub fn new(points: &[Vec2], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<Vec2>> = HashMap::new();
        for p in points {
            buckets.entry(Self::key(*p, cell)).or_default().push(*p);
        }
        Self { cell, buckets }
    }

    fn key(p: Vec2, cell: f64) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Whether some indexed point lies within `r <= cell` of `q`.
    pub fn any_within(&self, q: Vec2, r: f64) -> bool {
        assert!(r <= self.cell * (1.0 + 1e-12));
        let (i, j) = Self::key(q, self.cell);
        (i - 1..=i + 1).any(|a| {
            (j - 1..=j + 1).any(|b| {
                self.buckets
                    .get(&(a, b))
                    .is_some_and(|v| v.iter().any(|p| p.distance(q) <= r + TOL))
            })
        })
    }
}

/// Whether the discrete Hausdorff distance between two point sets is at
/// most `r`. Two empty sets agree; one empty set never does.
pub fn hausdorff_within(a: &[Vec2], b: &[Vec2], r: f64) -> bool {
    if a.is_empty() || b.is_empty() {
        return a.is_empty() && b.is_empty();
    }
    let ia = PointIndex::new(a, r);
    let ib = PointIndex::new(b, r);
    a.iter().all(|p| ib.any_within(*p, r)) && b.iter().all(|p| ia.any_within(*p, r))
}

/// Whether `q` lies in a triangle spanned by three of `points`
/// (Carathéodory), including the degenerate segment and point cases.
pub fn in_some_triangle(points: &[Vec2], q: Vec2) -> bool {
    let n = points.len();
    let on_segment = |a: Vec2, b: Vec2| {
        let ab = b - a;
        let len2 = ab.norm_sq();
        if len2 == 0.0 {
            return a.distance(q) <= TOL;
        }
        let t = ((q - a).dot(ab) / len2).clamp(0.0, 1.0);
        (a + ab * t).distance(q) <= TOL
    };
    for i in 0..n {
        for j in i + 1..n {
            if on_segment(points[i], points[j]) {
                return true;
            }
            for k in j + 1..n {
                let (a, b, c) = (points[i], points[j], points[k]);
                let d1 = (b - a).cross(q - a);
                let d2 = (c - b).cross(q - b);
                let d3 = (a - c).cross(q - c);
                let neg = d1 < -TOL || d2 < -TOL || d3 < -TOL;
                let pos = d1 > TOL || d2 > TOL || d3 > TOL;
                if !(neg && pos) && (b - a).cross(c - a).abs() > 0.0 {
                    return true;
                }
            }
        }
    }
    n == 1 && points[0].distance(q) <= TOL
}

/// Minimizer of a two-variable problem over the lattice points of the box
/// `[lo, hi]²` that satisfy every constraint to `TOL`. Equalities are not
/// supported. Returns the point and its objective value.
pub fn grid_argmin_2d(qp: &QuadraticProgram, lo: f64, hi: f64, spacing: f64) -> Option<([f64; 2], f64)> {
    assert_eq!(qp.num_vars(), 2);
    assert_eq!(qp.eq_rhs.len(), 0);
    let steps = ((hi - lo) / spacing).round() as i64;
    let rows: Vec<[f64; 3]> = (0..qp.in_rhs.len())
        .map(|r| [qp.in_matrix[(r, 0)], qp.in_matrix[(r, 1)], qp.in_rhs[r]])
        .collect();
    let (h, g) = (&qp.hessian, &qp.linear);
    let mut best: Option<([f64; 2], f64)> = None;
    for i in 0..=steps {
        let x = lo + i as f64 * spacing;
        for j in 0..=steps {
            let y = lo + j as f64 * spacing;
            if rows.iter().any(|r| r[0] * x + r[1] * y > r[2] + TOL) {
                continue;
            }
            let f = 0.5 * (h[(0, 0)] * x * x + 2.0 * h[(0, 1)] * x * y + h[(1, 1)] * y * y)
                + g[0] * x
                + g[1] * y
                + qp.constant;
            if best.is_none_or(|(_, b)| f < b) {
                best = Some(([x, y], f));
            }
        }
    }
    best
}

/// Feasible lattice point of `[lo, hi]²` closest to `x`, searched in growing
/// square rings around it.
pub fn nearest_feasible_grid_point(qp: &QuadraticProgram, lo: f64, hi: f64, spacing: f64, x: [f64; 2]) -> Option<[f64; 2]> {
    let steps = ((hi - lo) / spacing).round() as i64;
    let ci = ((x[0] - lo) / spacing).round() as i64;
    let cj = ((x[1] - lo) / spacing).round() as i64;
    let feasible = |p: [f64; 2]| {
        (0..qp.in_rhs.len()).all(|r| qp.in_matrix[(r, 0)] * p[0] + qp.in_matrix[(r, 1)] * p[1] <= qp.in_rhs[r] + TOL)
    };
    let mut best: Option<([f64; 2], f64)> = None;
    for ring in 0..=steps {
        // Anything in a later ring is at least `ring * spacing` away.
        if best.is_some_and(|(_, d)| d < (ring as f64 - 1.0) * spacing) {
            break;
        }
        for i in ci - ring..=ci + ring {
            for j in cj - ring..=cj + ring {
                if (i - ci).abs() != ring && (j - cj).abs() != ring {
                    continue;
                }
                if !(0..=steps).contains(&i) || !(0..=steps).contains(&j) {
                    continue;
                }
                let p = [lo + i as f64 * spacing, lo + j as f64 * spacing];
                if !feasible(p) {
                    continue;
                }
                let d = ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt();
                if best.is_none_or(|(_, b)| d < b) {
                    best = Some((p, d));
                }
            }
        }
    }
    best.map(|(p, _)| p)
}

/// Largest constraint violation of `x` (zero when feasible).
pub fn max_violation(qp: &QuadraticProgram, x: &DVector<f64>) -> f64 {
    let eq = (&qp.eq_matrix * x - &qp.eq_rhs).amax();
    let ineq = (&qp.in_matrix * x - &qp.in_rhs).iter().fold(0.0f64, |m, v| m.max(*v));
    eq.max(ineq)
}
