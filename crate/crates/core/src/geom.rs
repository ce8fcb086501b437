//! Planar convex geometry kernel.
//!
//! Sets live in H-representation `{q : a_i·q <= b_i}` with unit normals `a_i`.
//! Cones (partition sectors) are unbounded and never converted to vertices;
//! vertex lists are only produced for bounded sets. All predicates use the
//! absolute tolerance [`TOL`] on normalized constraints, which assumes scenario
//! coordinates of order 10².

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

use crate::math;

/// Absolute tolerance for membership and redundancy tests.
pub const TOL: f64 = 1e-9;

/// Below this `|det|` two boundary lines are treated as parallel.
const PARALLEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("degenerate point set: fewer than three distinct points or all collinear")]
    DegenerateInput,
    #[error("set is empty")]
    EmptySet,
    #[error("minkowski sum of two unbounded sets is not supported")]
    UnsupportedUnbounded,
    #[error("operation requires a bounded set")]
    Unbounded,
}

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `a` (radians, counterclockwise from +x).
    #[inline]
    pub fn from_angle(a: f64) -> Self {
        Self::new(math::cos(a), math::sin(a))
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    #[inline]
    pub fn norm_inf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Counterclockwise rotation by 90°.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Polar angle in `(-π, π]`.
    #[inline]
    pub fn angle(self) -> f64 {
        math::atan2(self.y, self.x)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > PARALLEL_TOL).then(|| self / n)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Componentwise clamp into `[-limit, limit]²`.
    #[inline]
    pub fn clamp_inf(self, limit: f64) -> Vec2 {
        Vec2::new(self.x.clamp(-limit, limit), self.y.clamp(-limit, limit))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Closed half-plane `{q : normal·q <= offset}` with `‖normal‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    normal: Vec2,
    offset: f64,
}

impl HalfPlane {
    /// Normalizes `(a, b)`; `None` when `a` is (numerically) zero.
    pub fn new(normal: Vec2, offset: f64) -> Option<Self> {
        let n = normal.norm();
        (n > PARALLEL_TOL && offset.is_finite()).then(|| Self {
            normal: normal / n,
            offset: offset / n,
        })
    }

    #[inline]
    pub fn normal(&self) -> Vec2 {
        self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed violation `a·q - b` (positive outside).
    #[inline]
    pub fn violation(&self, q: Vec2) -> f64 {
        self.normal.dot(q) - self.offset
    }

    #[inline]
    pub fn contains(&self, q: Vec2, tol: f64) -> bool {
        self.violation(q) <= tol
    }

    fn boundary_foot(&self) -> Vec2 {
        self.normal * self.offset
    }
}

/// Value of a support function `sup{a·q : q ∈ P}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Bounded(f64),
    Unbounded,
}

impl Support {
    /// The supremum, with `+∞` for unbounded directions.
    pub fn value(self) -> f64 {
        match self {
            Support::Bounded(h) => h,
            Support::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, Support::Bounded(_))
    }
}

/// Convex polyhedron in the plane, stored as an irredundant list of half-planes
/// ordered by normal angle.
///
/// Emptiness is a flag rather than an error so set differences can report an
/// empty result to the caller. Sets with empty interior (a point, a segment)
/// are valid and nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolyhedron {
    halfplanes: Vec<HalfPlane>,
    empty: bool,
    bounded: bool,
}

impl HPolyhedron {
    /// Builds and canonicalizes the intersection of `halfplanes`.
    pub fn new(halfplanes: impl IntoIterator<Item = HalfPlane>) -> Self {
        let raw: Vec<HalfPlane> = halfplanes.into_iter().collect();
        Self::canonical(raw, false)
    }

    /// Builds from raw `(a, b)` pairs. A zero `a` is either vacuous (`b >= 0`)
    /// or makes the set empty.
    pub fn from_constraints(constraints: impl IntoIterator<Item = (Vec2, f64)>) -> Self {
        let mut raw = Vec::new();
        let mut infeasible = false;
        for (a, b) in constraints {
            match HalfPlane::new(a, b) {
                Some(h) => raw.push(h),
                None => infeasible |= b < -TOL,
            }
        }
        Self::canonical(raw, infeasible)
    }

    /// The whole plane.
    pub fn whole_plane() -> Self {
        Self {
            halfplanes: Vec::new(),
            empty: false,
            bounded: false,
        }
    }

    /// Axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
    pub fn rect(min: Vec2, max: Vec2) -> Self {
        Self::from_constraints([
            (Vec2::new(1.0, 0.0), max.x),
            (Vec2::new(-1.0, 0.0), -min.x),
            (Vec2::new(0.0, 1.0), max.y),
            (Vec2::new(0.0, -1.0), -min.y),
        ])
    }

    /// The ∞-norm ball `{q : ‖q‖_∞ <= r}`.
    pub fn inf_ball(r: f64) -> Self {
        Self::rect(Vec2::new(-r, -r), Vec2::new(r, r))
    }

    /// The singleton `{p}`.
    pub fn point(p: Vec2) -> Self {
        Self::rect(p, p)
    }

    /// Closed cone apexed at the origin spanning counterclockwise from ray
    /// angle `start` to ray angle `start + width`, with `0 < width < π`.
    pub fn cone(start: f64, width: f64) -> Self {
        debug_assert!(width > 0.0 && width < math::PI);
        let d_start = Vec2::from_angle(start);
        let d_end = Vec2::from_angle(start + width);
        // Interior lies left of the start ray and right of the end ray.
        Self::from_constraints([(-d_start.perp(), 0.0), (d_end.perp(), 0.0)])
    }

    /// Convex hull of `points` as a bounded polyhedron.
    pub fn from_points(points: &[Vec2]) -> Result<Self, GeomError> {
        Ok(ConvexHull::new(points)?.to_polyhedron())
    }

    fn canonical(raw: Vec<HalfPlane>, infeasible: bool) -> Self {
        if infeasible || feasible_points(&raw).is_empty() && !raw.is_empty() {
            return Self {
                halfplanes: raw,
                empty: true,
                bounded: true,
            };
        }
        let mut kept = raw;
        let mut i = 0;
        let mut others = Vec::with_capacity(kept.len());
        while i < kept.len() {
            others.clear();
            others.extend(
                kept.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, h)| *h),
            );
            let h = kept[i];
            match raw_support(&others, h.normal) {
                Some(Support::Bounded(s)) if s <= h.offset + TOL => {
                    kept.remove(i);
                }
                _ => i += 1,
            }
        }
        kept.sort_by(|a, b| {
            math::wrap_angle(a.normal.angle())
                .total_cmp(&math::wrap_angle(b.normal.angle()))
                .then(a.offset.total_cmp(&b.offset))
        });
        let bounded = [
            Vec2::new(1.0, 0.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, -1.0),
        ]
        .iter()
        .all(|&d| matches!(raw_support(&kept, d), Some(Support::Bounded(_))));
        Self {
            halfplanes: kept,
            empty: false,
            bounded,
        }
    }

    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// `true` iff `a_i·q <= b_i + tol` for every half-plane.
    pub fn contains(&self, q: Vec2, tol: f64) -> bool {
        !self.empty && self.halfplanes.iter().all(|h| h.contains(q, tol))
    }

    /// Largest constraint violation at `q` (non-positive inside).
    pub fn max_violation(&self, q: Vec2) -> f64 {
        self.halfplanes
            .iter()
            .map(|h| h.violation(q))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Support function `h(a) = sup{a·q : q ∈ self}`.
    pub fn support(&self, direction: Vec2) -> Result<Support, GeomError> {
        if self.empty {
            return Err(GeomError::EmptySet);
        }
        raw_support(&self.halfplanes, direction).ok_or(GeomError::EmptySet)
    }

    /// Pontryagin difference `{q : q ⊕ s ⊆ self}`, computed as
    /// `b_i - h_s(a_i)` per half-plane. The result may be empty (flagged).
    pub fn pontryagin_diff(&self, s: &HPolyhedron) -> Result<HPolyhedron, GeomError> {
        if s.empty {
            return Err(GeomError::EmptySet);
        }
        if !s.bounded {
            return Err(GeomError::Unbounded);
        }
        if self.empty {
            return Ok(self.clone());
        }
        let mut tightened = Vec::with_capacity(self.halfplanes.len());
        for h in &self.halfplanes {
            let hs = s.support(h.normal)?.value();
            tightened.push(HalfPlane {
                normal: h.normal,
                offset: h.offset - hs,
            });
        }
        Ok(Self::canonical(tightened, false))
    }

    /// Minkowski sum `{a + b}`. Facet normals of the sum are among the facet
    /// normals of the operands, each carrying offset `h_self(n) + h_other(n)`.
    pub fn minkowski_sum(&self, other: &HPolyhedron) -> Result<HPolyhedron, GeomError> {
        if self.empty || other.empty {
            return Err(GeomError::EmptySet);
        }
        if !self.bounded && !other.bounded {
            return Err(GeomError::UnsupportedUnbounded);
        }
        let mut out = Vec::with_capacity(self.halfplanes.len() + other.halfplanes.len());
        for n in self
            .halfplanes
            .iter()
            .chain(other.halfplanes.iter())
            .map(|h| h.normal)
        {
            if let (Support::Bounded(a), Support::Bounded(b)) =
                (self.support(n)?, other.support(n)?)
            {
                out.push(HalfPlane {
                    normal: n,
                    offset: a + b,
                });
            }
        }
        Ok(Self::canonical(out, false))
    }

    /// Translation by `v`.
    pub fn translate(&self, v: Vec2) -> HPolyhedron {
        HPolyhedron {
            halfplanes: self
                .halfplanes
                .iter()
                .map(|h| HalfPlane {
                    normal: h.normal,
                    offset: h.offset + h.normal.dot(v),
                })
                .collect(),
            empty: self.empty,
            bounded: self.bounded,
        }
    }

    /// Point reflection `-self = {-q : q ∈ self}`.
    pub fn reflect(&self) -> HPolyhedron {
        Self::canonical(
            self.halfplanes
                .iter()
                .map(|h| HalfPlane {
                    normal: -h.normal,
                    offset: h.offset,
                })
                .collect(),
            self.empty,
        )
    }

    /// Set equality up to `tol`, decided on the support functions over the
    /// facet normals of both operands.
    pub fn approx_eq(&self, other: &HPolyhedron, tol: f64) -> bool {
        if self.empty || other.empty {
            return self.empty == other.empty;
        }
        self.halfplanes
            .iter()
            .chain(other.halfplanes.iter())
            .all(|h| {
                match (
                    raw_support(&self.halfplanes, h.normal),
                    raw_support(&other.halfplanes, h.normal),
                ) {
                    (Some(Support::Bounded(a)), Some(Support::Bounded(b))) => (a - b).abs() <= tol,
                    (Some(Support::Unbounded), Some(Support::Unbounded)) => true,
                    _ => false,
                }
            })
    }

    /// Vertices of a bounded set in counterclockwise order. Degenerate sets
    /// yield one (point) or two (segment) vertices.
    pub fn vertices(&self) -> Result<Vec<Vec2>, GeomError> {
        if self.empty {
            return Err(GeomError::EmptySet);
        }
        if !self.bounded {
            return Err(GeomError::Unbounded);
        }
        let mut pts = feasible_points(&self.halfplanes);
        dedup_points(&mut pts);
        match ConvexHull::new(&pts) {
            Ok(h) => Ok(h.vertices),
            Err(_) => {
                // Point or segment: keep the two extreme points.
                pts.sort_by(lex_cmp);
                if pts.len() > 2 {
                    let (first, last) = (pts[0], pts[pts.len() - 1]);
                    pts = alloc::vec![first, last];
                }
                Ok(pts)
            }
        }
    }
}

fn lex_cmp(a: &Vec2, b: &Vec2) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

fn dedup_points(pts: &mut Vec<Vec2>) {
    pts.sort_by(lex_cmp);
    let mut out: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter() {
        if !out.iter().any(|q| q.distance(p) <= TOL) {
            out.push(p);
        }
    }
    *pts = out;
}

fn line_intersection(a: &HalfPlane, b: &HalfPlane) -> Option<Vec2> {
    let det = a.normal.cross(b.normal);
    if det.abs() < PARALLEL_TOL {
        return None;
    }
    Some(Vec2::new(
        (a.offset * b.normal.y - b.offset * a.normal.y) / det,
        (a.normal.x * b.offset - b.normal.x * a.offset) / det,
    ))
}

/// Feasible candidate points: pairwise boundary intersections plus the foot
/// of the perpendicular from the origin onto each boundary line. Nonempty
/// whenever the set is nonempty and has at least one constraint.
fn feasible_points(hps: &[HalfPlane]) -> Vec<Vec2> {
    let feasible = |q: Vec2| hps.iter().all(|h| h.contains(q, TOL));
    let mut pts = Vec::new();
    for (i, a) in hps.iter().enumerate() {
        for b in &hps[i + 1..] {
            if let Some(q) = line_intersection(a, b) {
                if feasible(q) {
                    pts.push(q);
                }
            }
        }
        let q = a.boundary_foot();
        if feasible(q) {
            pts.push(q);
        }
    }
    pts
}

/// `true` when `direction` has positive inner product with some recession ray.
/// Maximizing a linear functional over an arc of the unit circle is attained
/// at an arc end (a ray on some boundary line) or at the direction itself.
fn recedes(hps: &[HalfPlane], direction: Vec2) -> bool {
    let in_recession = |r: Vec2| hps.iter().all(|h| h.normal.dot(r) <= PARALLEL_TOL);
    let mut candidates = Vec::with_capacity(2 * hps.len() + 1);
    if let Some(d) = direction.normalized() {
        candidates.push(d);
    }
    for h in hps {
        candidates.push(h.normal.perp());
        candidates.push(-h.normal.perp());
    }
    candidates
        .into_iter()
        .any(|r| in_recession(r) && direction.dot(r) > PARALLEL_TOL)
}

/// Support over a raw half-plane list; `None` when the list is infeasible.
fn raw_support(hps: &[HalfPlane], direction: Vec2) -> Option<Support> {
    if hps.is_empty() {
        return Some(if direction.norm() <= PARALLEL_TOL {
            Support::Bounded(0.0)
        } else {
            Support::Unbounded
        });
    }
    let pts = feasible_points(hps);
    if pts.is_empty() {
        return None;
    }
    if recedes(hps, direction) {
        return Some(Support::Unbounded);
    }
    Some(Support::Bounded(
        pts.iter()
            .map(|p| direction.dot(*p))
            .fold(f64::NEG_INFINITY, f64::max),
    ))
}

/// Result of a hull membership query. `weights[i]` multiplies vertex `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub inside: bool,
    pub weights: Option<Vec<f64>>,
}

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    vertices: Vec<Vec2>,
}

impl ConvexHull {
    /// Monotone-chain hull. Collinear boundary points are dropped.
    pub fn new(points: &[Vec2]) -> Result<Self, GeomError> {
        let mut pts: Vec<Vec2> = points.to_vec();
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(GeomError::DegenerateInput);
        }
        pts.sort_by(lex_cmp);
        pts.dedup_by(|a, b| a.distance(*b) <= PARALLEL_TOL);
        if pts.len() < 3 {
            return Err(GeomError::DegenerateInput);
        }

        let turns_left = |o: Vec2, a: Vec2, b: Vec2| {
            let (u, v) = (a - o, b - o);
            u.cross(v) > PARALLEL_TOL * u.norm() * v.norm()
        };
        let mut hull: Vec<Vec2> = Vec::with_capacity(pts.len() + 1);
        for &p in &pts {
            while hull.len() >= 2 && !turns_left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
                hull.pop();
            }
            hull.push(p);
        }
        let lower_len = hull.len() + 1;
        for &p in pts.iter().rev().skip(1) {
            while hull.len() >= lower_len
                && !turns_left(hull[hull.len() - 2], hull[hull.len() - 1], p)
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
        if hull.len() < 3 {
            return Err(GeomError::DegenerateInput);
        }
        Ok(Self { vertices: hull })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Directed edges `(v_i, v_{i+1})`, counterclockwise.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed distance from `q` to each edge line, positive on the inner side.
    fn edge_distances(&self, q: Vec2) -> impl Iterator<Item = f64> + '_ {
        self.edges().map(move |(a, b)| {
            let e = b - a;
            e.cross(q - a) / e.norm()
        })
    }

    /// Membership in the closed hull with tolerance [`TOL`]. When inside,
    /// returns convex weights over the vertices realizing `q`: the average of
    /// the barycentric witnesses from the fan triangulation at every vertex.
    pub fn contains(&self, q: Vec2) -> Containment {
        let inside = self.edge_distances(q).all(|d| d >= -TOL);
        if !inside {
            return Containment {
                inside,
                weights: None,
            };
        }
        let n = self.vertices.len();
        let mut weights = alloc::vec![0.0; n];
        for k in 0..n {
            let a = self.vertices[k];
            let mut best: Option<(f64, usize, [f64; 3])> = None;
            for j in 1..n - 1 {
                let (ib, ic) = ((k + j) % n, (k + j + 1) % n);
                let (b, c) = (self.vertices[ib], self.vertices[ic]);
                let det = (b - a).cross(c - a);
                let lb = (q - a).cross(c - a) / det;
                let lc = (b - a).cross(q - a) / det;
                let l = [1.0 - lb - lc, lb, lc];
                let worst = l[0].min(l[1]).min(l[2]);
                if best.is_none_or(|(w, _, _)| worst > w) {
                    best = Some((worst, j, l));
                }
            }
            let (_, j, l) = best.expect("hull has at least three vertices");
            let l = l.map(|x| x.max(0.0));
            let s = l[0] + l[1] + l[2];
            weights[k] += l[0] / s;
            weights[(k + j) % n] += l[1] / s;
            weights[(k + j + 1) % n] += l[2] / s;
        }
        for w in &mut weights {
            *w /= n as f64;
        }
        Containment {
            inside,
            weights: Some(weights),
        }
    }

    /// Distance to the boundary, positive inside and negative outside (where
    /// its magnitude is the Euclidean distance to the hull).
    pub fn signed_distance(&self, q: Vec2) -> f64 {
        let inner = self.edge_distances(q).fold(f64::INFINITY, f64::min);
        if inner >= 0.0 {
            inner
        } else {
            -self
                .edges()
                .map(|(a, b)| point_segment_distance(q, a, b))
                .fold(f64::INFINITY, f64::min)
        }
    }

    pub fn to_polyhedron(&self) -> HPolyhedron {
        HPolyhedron::from_constraints(self.edges().map(|(a, b)| {
            let n = -(b - a).perp();
            (n, n.dot(a))
        }))
    }
}

/// Euclidean distance from `q` to the segment `[a, b]`.
pub fn point_segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let len_sq = e.norm_sq();
    if len_sq == 0.0 {
        return q.distance(a);
    }
    let t = ((q - a).dot(e) / len_sq).clamp(0.0, 1.0);
    q.distance(a + e * t)
}

/// Signed distance of `q` to the convex hull of `points`, tolerating
/// degenerate inputs: a collinear set is treated as the segment between its
/// extreme points (distance ≤ 0 everywhere).
pub fn hull_signed_distance(points: &[Vec2], q: Vec2) -> f64 {
    match ConvexHull::new(points) {
        Ok(h) => h.signed_distance(q),
        Err(_) => {
            let mut pts = points.to_vec();
            pts.sort_by(lex_cmp);
            match (pts.first(), pts.last()) {
                (Some(&a), Some(&b)) => -point_segment_distance(q, a, b),
                _ => f64::NEG_INFINITY,
            }
        }
    }
}
