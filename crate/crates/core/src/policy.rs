//! Pursuer team strategies and evader behaviours.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{hull_signed_distance, ConvexHull, Vec2, TOL};
use crate::partition::SectorSet;
use crate::qp::QpOptions;
use crate::tmpc::{self, TmpcError, TubeSpec};

/// Default inflation of the Voronoi clipping box.
pub const DEFAULT_VIRTUAL_MARGIN: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("no pursuer in sector {0} can solve its tube problem")]
    SectorVacated(usize),
    #[error("tube problem for pursuer {pursuer}: {source}")]
    Tmpc { pursuer: usize, source: TmpcError },
}

/// Move from `p` toward `e`: the full step when it fits inside the
/// ∞-norm bound, otherwise `e - p` scaled to ∞-norm `u_max`.
pub fn direct_charge(p: Vec2, e: Vec2, u_max: f64) -> Vec2 {
    let d = e - p;
    let n = d.norm_inf();
    if n <= u_max {
        d
    } else {
        (d * (u_max / n)).clamp_inf(u_max)
    }
}

/// Direction-preserving step of ∞-norm exactly `u_max` (zero for `d = 0`).
fn full_speed(d: Vec2, u_max: f64) -> Vec2 {
    let n = d.norm_inf();
    if n == 0.0 || !n.is_finite() {
        Vec2::ZERO
    } else {
        (d * (u_max / n)).clamp_inf(u_max)
    }
}

/// Input in the box `[-u_max, u_max]²` making the most progress along `d`:
/// a corner, or an edge midpoint when `d` is axis-aligned.
fn greedy_box_step(d: Vec2, u_max: f64) -> Vec2 {
    let sgn = |c: f64| {
        if c > 0.0 {
            1.0
        } else if c < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    Vec2::new(sgn(d.x), sgn(d.y)) * u_max
}

/// Convex polygon with the source of each edge: `labels[k]` tags the edge
/// from `verts[k]` to `verts[k + 1]` (`None` for the clipping box).
struct LabelledPolygon {
    verts: Vec<Vec2>,
    labels: Vec<Option<usize>>,
}

impl LabelledPolygon {
    fn rect(min: Vec2, max: Vec2) -> Self {
        Self {
            verts: vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)],
            labels: vec![None; 4],
        }
    }

    /// Sutherland–Hodgman step against `a·q <= b`.
    fn clip(&mut self, a: Vec2, b: f64, label: usize) {
        let n = self.verts.len();
        let mut verts = Vec::with_capacity(n + 1);
        let mut labels = Vec::with_capacity(n + 1);
        for k in 0..n {
            let p = self.verts[k];
            let q = self.verts[(k + 1) % n];
            let fp = a.dot(p) - b;
            let fq = a.dot(q) - b;
            let cut = || p + (q - p) * (fp / (fp - fq));
            match (fp <= 0.0, fq <= 0.0) {
                (true, true) => {
                    verts.push(p);
                    labels.push(self.labels[k]);
                }
                (true, false) => {
                    verts.push(p);
                    labels.push(self.labels[k]);
                    verts.push(cut());
                    labels.push(Some(label));
                }
                (false, true) => {
                    verts.push(cut());
                    labels.push(self.labels[k]);
                }
                (false, false) => {}
            }
        }
        self.verts = verts;
        self.labels = labels;
    }
}

/// Each pursuer heads for the midpoint of the edge it shares with the
/// evader's Voronoi cell, moving at full speed; pursuers without a shared
/// edge charge the evader directly. The diagram is clipped to the bounding
/// box of all agents inflated by `margin`.
pub fn voronoi_centroid(pursuers: &[Vec2], evader: Vec2, u_max: f64, margin: f64) -> Vec<Vec2> {
    let mut lo = evader;
    let mut hi = evader;
    for p in pursuers {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = Vec2::new(margin, margin);
    let mut cell = LabelledPolygon::rect(lo - pad, hi + pad);
    for (i, &p) in pursuers.iter().enumerate() {
        let a = p - evader;
        if a.norm() < 1e-12 {
            continue;
        }
        // Points closer to the evader than to p.
        cell.clip(a, 0.5 * (p.norm_sq() - evader.norm_sq()), i);
    }

    let mut target: Vec<Option<Vec2>> = vec![None; pursuers.len()];
    let n = cell.verts.len();
    for k in 0..n {
        if let Some(i) = cell.labels[k] {
            let (s, t) = (cell.verts[k], cell.verts[(k + 1) % n]);
            if s.distance(t) > 1e-9 && target[i].is_none() {
                target[i] = Some((s + t) * 0.5);
            }
        }
    }
    pursuers
        .iter()
        .zip(&target)
        .map(|(&p, t)| match t {
            Some(m) => full_speed(*m - p, u_max),
            None => direct_charge(p, evader, u_max),
        })
        .collect()
}

/// Per-sector tube problems built at initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct TmpcTeam {
    pub sectors: SectorSet,
    pub specs: Vec<TubeSpec>,
    pub qp_options: QpOptions,
}

/// Controls for one tick plus the pursuer running the tube problem in each
/// sector.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamStep {
    pub controls: Vec<Vec2>,
    pub responsible: Vec<usize>,
}

/// One tick of the tube-MPC team.
///
/// `previous` is the holder of each sector from the last tick. A holder keeps
/// its sector while its tube problem stays feasible, so the assignment made at
/// initialization persists. Vacant sectors (and every sector when `previous`
/// is `None`) are filled from unclaimed pursuers lying in the closed sector,
/// farthest first, ties by lowest index. Everyone else charges directly.
pub fn tmpc_team(
    pursuers: &[Vec2],
    evader: Vec2,
    team: &TmpcTeam,
    u_max: f64,
    previous: Option<&[usize]>,
) -> Result<TeamStep, PolicyError> {
    let rel: Vec<Vec2> = pursuers.iter().map(|&p| p - evader).collect();
    let mut controls: Vec<Option<Vec2>> = vec![None; pursuers.len()];
    let mut holders: Vec<Option<usize>> = vec![None; team.specs.len()];

    let try_solve = |i: usize, spec: &TubeSpec| -> Result<Option<Vec2>, PolicyError> {
        match tmpc::solve_plan(rel[i], spec, &team.qp_options) {
            Ok(plan) => Ok(Some(tmpc::control(rel[i], &plan).clamp_inf(u_max))),
            Err(TmpcError::Infeasible) => Ok(None),
            Err(source) => Err(PolicyError::Tmpc { pursuer: i, source }),
        }
    };

    if let Some(prev) = previous {
        for (m, (&i, spec)) in prev.iter().zip(&team.specs).enumerate() {
            if i < pursuers.len() && controls[i].is_none() {
                if let Some(u) = try_solve(i, spec)? {
                    controls[i] = Some(u);
                    holders[m] = Some(i);
                }
            }
        }
    }

    for (m, spec) in team.specs.iter().enumerate() {
        if holders[m].is_some() {
            continue;
        }
        let mut cands: Vec<usize> = (0..pursuers.len())
            .filter(|&i| controls[i].is_none() && spec.sector().contains(rel[i], TOL * (1.0 + rel[i].norm())))
            .collect();
        cands.sort_by(|&a, &b| rel[b].norm().total_cmp(&rel[a].norm()).then(a.cmp(&b)));
        for i in cands {
            if let Some(u) = try_solve(i, spec)? {
                controls[i] = Some(u);
                holders[m] = Some(i);
                break;
            }
        }
        if holders[m].is_none() {
            return Err(PolicyError::SectorVacated(m));
        }
    }
    let responsible = holders.into_iter().flatten().collect();

    let controls = controls
        .iter()
        .zip(pursuers)
        .map(|(u, &p)| u.unwrap_or_else(|| direct_charge(p, evader, u_max)))
        .collect();
    Ok(TeamStep { controls, responsible })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvaderKind {
    /// Never moves.
    Static,
    /// Uniform in the input box, seeded.
    RandomInW,
    /// Full speed directly away from the nearest pursuer.
    FleeNearest,
    /// Heads for the midpoint of the watched hull's edge with the widest
    /// bearing gap between its two pursuers, taking the box input with the
    /// most progress toward it; flees the nearest pursuer once outside.
    BoundarySeek,
    /// Actions supplied from outside (a human or a scripted client).
    External,
    /// One-step lookahead adversary: knows the pursuers' controls for this
    /// tick and picks the input-box corner that leaves it closest to (or
    /// farthest outside) the watched hull.
    WorstVertex,
}

/// What the evader sees when choosing its move.
#[derive(Debug, Clone, Copy)]
pub struct EvaderView<'a> {
    pub pursuers: &'a [Vec2],
    pub evader: Vec2,
    /// Pursuers spanning the hull the evader is trying to leave.
    pub hull_members: &'a [usize],
    /// Pursuer controls for the current tick; only the lookahead adversary
    /// reads them.
    pub pursuer_controls: &'a [Vec2],
    /// Pending external action, if any.
    pub external: Option<Vec2>,
}

/// Overshoot past the target edge, so the evader does not stall on it.
const BOUNDARY_OVERSHOOT: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct EvaderController {
    kind: EvaderKind,
    u_max: f64,
    rng: ChaCha8Rng,
}

impl EvaderController {
    pub fn new(kind: EvaderKind, u_max: f64, seed: u64) -> Self {
        Self {
            kind,
            u_max,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn kind(&self) -> EvaderKind {
        self.kind
    }

    /// Next evader input, always inside the ∞-norm box.
    pub fn step(&mut self, view: &EvaderView) -> Vec2 {
        let u = match self.kind {
            EvaderKind::Static => Vec2::ZERO,
            EvaderKind::RandomInW => Vec2::new(
                self.rng.random_range(-self.u_max..=self.u_max),
                self.rng.random_range(-self.u_max..=self.u_max),
            ),
            EvaderKind::FleeNearest => self.flee_nearest(view),
            EvaderKind::BoundarySeek => self.boundary_seek(view),
            EvaderKind::External => view.external.filter(|u| u.is_finite()).unwrap_or(Vec2::ZERO),
            EvaderKind::WorstVertex => self.worst_vertex(view),
        };
        u.clamp_inf(self.u_max)
    }

    fn flee_nearest(&self, view: &EvaderView) -> Vec2 {
        let nearest = view
            .pursuers
            .iter()
            .min_by(|a, b| a.distance(view.evader).total_cmp(&b.distance(view.evader)));
        match nearest {
            Some(&p) => full_speed(view.evader - p, self.u_max),
            None => Vec2::ZERO,
        }
    }

    fn boundary_seek(&self, view: &EvaderView) -> Vec2 {
        let pts: Vec<Vec2> = view.hull_members.iter().map(|&i| view.pursuers[i]).collect();
        let Ok(hull) = ConvexHull::new(&pts) else {
            return self.flee_nearest(view);
        };
        if !hull.contains(view.evader).inside {
            return self.flee_nearest(view);
        }
        // Edge whose endpoints are farthest apart in bearing from the evader.
        let widest = hull.edges().fold(None::<(f64, Vec2, Vec2)>, |best, (a, b)| {
            let gap = crate::math::wrap_angle((b - view.evader).angle() - (a - view.evader).angle());
            match best {
                Some((g, _, _)) if g >= gap => best,
                _ => Some((gap, a, b)),
            }
        });
        let Some((_, a, b)) = widest else {
            return Vec2::ZERO;
        };
        // Hull vertices are counterclockwise, so the outward normal is to the right.
        let outward = (b - a).perp().normalized().map(|n| -n).unwrap_or(Vec2::ZERO);
        let target = (a + b) * 0.5 + outward * BOUNDARY_OVERSHOOT;
        greedy_box_step(target - view.evader, self.u_max)
    }

    fn worst_vertex(&self, view: &EvaderView) -> Vec2 {
        let next: Vec<Vec2> = view
            .hull_members
            .iter()
            .map(|&i| view.pursuers[i] + view.pursuer_controls.get(i).copied().unwrap_or(Vec2::ZERO))
            .collect();
        let r = self.u_max;
        let corners = [Vec2::new(r, r), Vec2::new(-r, r), Vec2::new(-r, -r), Vec2::new(r, -r)];
        let mut best = corners[0];
        let mut best_d = f64::INFINITY;
        for c in corners {
            let d = hull_signed_distance(&next, view.evader + c);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    }
}
