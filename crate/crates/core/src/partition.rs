//! Angle-based partitions of the evader-centered plane and their
//! encirclement guarantee.
//!
//! A partition is a start angle `θ̄` plus positive sector widths `θ_0..θ_{M-1}`
//! summing to `2π`. Sector `m` covers the half-open angular range
//! `[θ̄ + Σ_{j<m} θ_j, θ̄ + Σ_{j<=m} θ_j)`. It guarantees encirclement (one point
//! in every sector always has the origin in its convex hull) exactly when
//! every pair of adjacent widths sums to at most `π`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{hull_signed_distance, ConvexHull, HPolyhedron, Vec2, TOL};
use crate::math::{self, PI, TAU};
use crate::qp::{self, QpError, QpOptions, QpStatus, QuadraticProgram};

/// Strict-inequality margin for partition construction, in radians.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Tolerance on angle sums.
pub const ANGLE_TOL: f64 = 1e-9;

/// Subsets are searched exhaustively up to this many pursuers.
const EXHAUSTIVE_MAX_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("invalid angle partition: {0}")]
    InvalidPartition(&'static str),
    #[error("pursuer {0} coincides with the evader")]
    CoincidentAgent(usize),
    #[error("cannot pick {m} partitions from {n} pursuers (need 4 <= M <= N)")]
    InvalidSubsetSize { m: usize, n: usize },
    #[error("no subset of pursuers encircles the evader")]
    NoEncirclingSubset,
    #[error("no encirclement guaranteed partition separates the selected pursuers")]
    InfeasiblePartition,
    #[error("sector {0} spans at least π and is not convex")]
    NonConvexSector(usize),
    #[error("partition solver: {0}")]
    Solver(#[from] QpError),
}

/// `{θ̄, θ_0, .., θ_{M-1}}` with `θ_m > 0` and `Σ θ_m = 2π`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnglePartition {
    start_angle: f64,
    angles: Vec<f64>,
}

impl AnglePartition {
    pub fn new(start_angle: f64, angles: Vec<f64>) -> Result<Self, PartitionError> {
        if !start_angle.is_finite() || angles.iter().any(|a| !a.is_finite()) {
            return Err(PartitionError::InvalidPartition("non-finite angle"));
        }
        if angles.is_empty() {
            return Err(PartitionError::InvalidPartition("no sectors"));
        }
        if angles.iter().any(|&a| a <= 0.0) {
            return Err(PartitionError::InvalidPartition("non-positive sector width"));
        }
        if (angles.iter().sum::<f64>() - TAU).abs() > ANGLE_TOL {
            return Err(PartitionError::InvalidPartition("sector widths do not sum to 2π"));
        }
        Ok(Self {
            start_angle,
            angles,
        })
    }

    /// `M` equal sectors starting at `start_angle`.
    pub fn uniform(start_angle: f64, m: usize) -> Result<Self, PartitionError> {
        Self::new(start_angle, vec![TAU / m as f64; m])
    }

    pub fn start_angle(&self) -> f64 {
        self.start_angle
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Angle of the ray opening each sector (unwrapped, increasing).
    pub fn ray_angles(&self) -> Vec<f64> {
        let mut acc = self.start_angle;
        self.angles
            .iter()
            .map(|w| {
                let a = acc;
                acc += w;
                a
            })
            .collect()
    }

    /// Sector containing direction `angle` under the half-open convention.
    pub fn sector_of_angle(&self, angle: f64) -> usize {
        let rel = math::wrap_angle(angle - self.start_angle);
        let mut acc = 0.0;
        for (m, w) in self.angles.iter().enumerate() {
            acc += w;
            if rel < acc {
                return m;
            }
        }
        self.angles.len() - 1
    }

    pub fn is_egp(&self) -> bool {
        is_egp(self)
    }
}

/// Adjacent-sum test: `θ_m + θ_{m+1 mod M} <= π` for every `m`.
pub fn is_egp(p: &AnglePartition) -> bool {
    let m = p.angles.len();
    (0..m).all(|i| p.angles[i] + p.angles[(i + 1) % m] <= PI + ANGLE_TOL)
}

/// Fewest sectors any encirclement guaranteed partition can have.
pub const fn min_partition_size() -> usize {
    4
}

/// Relative bearings of the pursuers seen from the evader, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeAngles {
    angles: Vec<f64>,
    owners: Vec<usize>,
    positions: Vec<Vec2>,
}

impl RelativeAngles {
    /// Sorted bearings in `[0, 2π)`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Pursuer index for each sorted bearing.
    pub fn owners(&self) -> &[usize] {
        &self.owners
    }

    /// Relative position `p_i - e` for each sorted bearing.
    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    fn slot_of(&self, pursuer: usize) -> Option<usize> {
        self.owners.iter().position(|&o| o == pursuer)
    }

    pub fn angle_of(&self, pursuer: usize) -> Option<f64> {
        self.slot_of(pursuer).map(|s| self.angles[s])
    }

    pub fn position_of(&self, pursuer: usize) -> Option<Vec2> {
        self.slot_of(pursuer).map(|s| self.positions[s])
    }
}

pub fn relative_angles(pursuers: &[Vec2], evader: Vec2) -> Result<RelativeAngles, PartitionError> {
    let mut entries = Vec::with_capacity(pursuers.len());
    for (i, &p) in pursuers.iter().enumerate() {
        let d = p - evader;
        if d.norm() < 1e-12 {
            return Err(PartitionError::CoincidentAgent(i));
        }
        entries.push((math::wrap_angle(d.angle()), i, d));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(RelativeAngles {
        angles: entries.iter().map(|e| e.0).collect(),
        owners: entries.iter().map(|e| e.1).collect(),
        positions: entries.iter().map(|e| e.2).collect(),
    })
}

/// Smallest circular gap between consecutive bearings.
fn min_circular_gap(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                sorted[i + 1] - sorted[i]
            } else {
                sorted[0] + TAU - sorted[i]
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn encircles_origin(points: &[Vec2]) -> bool {
    ConvexHull::new(points).is_ok_and(|h| h.contains(Vec2::ZERO).inside)
}

fn subset_score(ra: &RelativeAngles, subset: &[usize]) -> Option<f64> {
    let pts: Vec<Vec2> = subset.iter().map(|&i| ra.position_of(i).unwrap()).collect();
    if !encircles_origin(&pts) {
        return None;
    }
    let mut angles: Vec<f64> = subset.iter().map(|&i| ra.angle_of(i).unwrap()).collect();
    angles.sort_by(f64::total_cmp);
    Some(min_circular_gap(&angles))
}

/// Visits every `m`-combination of `0..n` in lexicographic order.
fn for_each_combination(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let mut i = m;
        while i > 0 && idx[i - 1] == n - m + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for k in i..m {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn greedy_subset(ra: &RelativeAngles, m: usize) -> Vec<usize> {
    let n = ra.len();
    // Seed with the pair whose separation is closest to π.
    let mut best_pair = (0, 1);
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let sep = (ra.angles[j] - ra.angles[i]).abs();
            let sep = sep.min(TAU - sep);
            let dev = (PI - sep).abs();
            let key = (ra.owners[i].min(ra.owners[j]), ra.owners[i].max(ra.owners[j]));
            if dev < best || (dev == best && key < best_pair) {
                best = dev;
                best_pair = key;
            }
        }
    }
    let mut chosen = vec![best_pair.0, best_pair.1];
    while chosen.len() < m {
        let mut pick: Option<(f64, usize)> = None;
        for cand in 0..n {
            if chosen.contains(&cand) {
                continue;
            }
            let mut angles: Vec<f64> = chosen
                .iter()
                .chain(core::iter::once(&cand))
                .map(|&i| ra.angle_of(i).unwrap())
                .collect();
            angles.sort_by(f64::total_cmp);
            let gap = min_circular_gap(&angles);
            if pick.is_none_or(|(g, _)| gap > g) {
                pick = Some((gap, cand));
            }
        }
        chosen.push(pick.expect("n >= m").1);
    }
    chosen.sort_unstable();
    chosen
}

/// Encircling `m`-subsets of pursuers ranked by their smallest angular gap
/// (larger first), ties by lexicographic index tuple. Exhaustive for
/// `N <= 10`; otherwise the greedy spread pick, falling back to exhaustive
/// search when the combination count stays moderate.
pub fn ranked_subsets(ra: &RelativeAngles, m: usize) -> Result<Vec<Vec<usize>>, PartitionError> {
    let n = ra.len();
    if m < min_partition_size() || m > n {
        return Err(PartitionError::InvalidSubsetSize { m, n });
    }
    let mut scored: Vec<(f64, Vec<usize>)> = Vec::new();
    if n > EXHAUSTIVE_MAX_N {
        let g = greedy_subset(ra, m);
        if let Some(s) = subset_score(ra, &g) {
            scored.push((s, g));
        }
    }
    if scored.is_empty() && (n <= EXHAUSTIVE_MAX_N || binomial(n, m) <= 50_000) {
        for_each_combination(n, m, |c| {
            if let Some(s) = subset_score(ra, c) {
                scored.push((s, c.to_vec()));
            }
        });
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    }
    if scored.is_empty() {
        return Err(PartitionError::NoEncirclingSubset);
    }
    Ok(scored.into_iter().map(|(_, s)| s).collect())
}

/// Best encircling `m`-subset, as sorted pursuer indices.
pub fn select_subset(ra: &RelativeAngles, m: usize) -> Result<Vec<usize>, PartitionError> {
    Ok(ranked_subsets(ra, m)?.swap_remove(0))
}

/// Solves the partition QP for the selected pursuers:
///
/// ```text
/// min  Σ (2π/M - θ_m)² + θ̄²
/// s.t. α_M - 2π + ε <= θ̄ <= α_1 - ε
///      α_j + ε <= θ̄ + Σ_{m<j} θ_m <= α_{j+1} - ε,   j = 1..M-1
///      θ_m >= ε,  θ_m + θ_{m+1 mod M} <= π,  Σ θ_m = 2π
/// ```
///
/// where `α_1 <= .. <= α_M` are the selected bearings. Sector `m` then holds
/// exactly the pursuer with bearing `α_{m+1}`.
pub fn construct_egp(ra: &RelativeAngles, selected: &[usize], eps: f64) -> Result<AnglePartition, PartitionError> {
    let mut alpha: Vec<f64> = selected
        .iter()
        .map(|&i| ra.angle_of(i).ok_or(PartitionError::InvalidPartition("unknown pursuer")))
        .collect::<Result<_, _>>()?;
    alpha.sort_by(f64::total_cmp);
    construct_egp_from_bearings(&alpha, eps)
}

/// [`construct_egp`] on sorted bearings in `[0, 2π)`.
pub fn construct_egp_from_bearings(alpha: &[f64], eps: f64) -> Result<AnglePartition, PartitionError> {
    let m = alpha.len();
    if m == 0 || eps.is_nan() || eps <= 0.0 {
        return Err(PartitionError::InvalidPartition("empty selection or non-positive margin"));
    }
    let qp = egp_program(alpha, eps);
    let sol = qp::solve(&qp, &QpOptions::default())?;
    match sol.status {
        QpStatus::Infeasible => return Err(PartitionError::InfeasiblePartition),
        QpStatus::MaxIterations => return Err(PartitionError::Solver(QpError::NumericalFailure)),
        QpStatus::Optimal => {}
    }
    let widths: Vec<f64> = (0..m).map(|i| sol.x[1 + i]).collect();
    let p = AnglePartition::new(sol.x[0], widths)?;
    if !p.is_egp() {
        return Err(PartitionError::InfeasiblePartition);
    }
    Ok(p)
}

/// The partition QP in the variable order `[θ̄, θ_0, .., θ_{M-1}]`.
pub fn egp_program(alpha: &[f64], eps: f64) -> QuadraticProgram {
    let m = alpha.len();
    let n = m + 1;
    let target = TAU / m as f64;
    let h = DMatrix::identity(n, n) * 2.0;
    let mut g = DVector::from_element(n, -2.0 * target);
    g[0] = 0.0;
    let constant = m as f64 * target * target;

    let mut eq = DMatrix::zeros(1, n);
    for i in 0..m {
        eq[(0, 1 + i)] = 1.0;
    }

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut row = |coef: &[(usize, f64)], rhs: f64| {
        let mut r = vec![0.0; n];
        for &(i, c) in coef {
            r[i] += c;
        }
        rows.push((r, rhs));
    };
    row(&[(0, -1.0)], -(alpha[m - 1] - TAU + eps));
    row(&[(0, 1.0)], alpha[0] - eps);
    for j in 1..m {
        let mut coef: Vec<(usize, f64)> = vec![(0, 1.0)];
        coef.extend((0..j).map(|k| (1 + k, 1.0)));
        row(&coef, alpha[j] - eps);
        let neg: Vec<(usize, f64)> = coef.iter().map(|&(i, c)| (i, -c)).collect();
        row(&neg, -(alpha[j - 1] + eps));
    }
    for k in 0..m {
        row(&[(1 + k, -1.0)], -eps);
        row(&[(1 + k, 1.0), (1 + (k + 1) % m, 1.0)], PI);
    }
    let a_in = DMatrix::from_fn(rows.len(), n, |r, c| rows[r].0[c]);
    let b_in = DVector::from_fn(rows.len(), |r, _| rows[r].1);

    QuadraticProgram::new(h, g)
        .with_constant(constant)
        .with_equalities(eq, DVector::from_element(1, TAU))
        .with_inequalities(a_in, b_in)
}

/// Partition sectors as closed convex cones in the evader-centered frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSet {
    partition: AnglePartition,
    elements: Vec<HPolyhedron>,
}

impl SectorSet {
    pub fn partition(&self) -> &AnglePartition {
        &self.partition
    }

    pub fn elements(&self) -> &[HPolyhedron] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Sector holding relative position `q` (half-open); `None` at the apex.
    pub fn locate(&self, q: Vec2) -> Option<usize> {
        (q.norm() > 1e-12).then(|| self.partition.sector_of_angle(q.angle()))
    }
}

pub fn sectors_from_partition(p: &AnglePartition) -> Result<SectorSet, PartitionError> {
    if let Some(m) = p.angles.iter().position(|&w| w >= PI) {
        return Err(PartitionError::NonConvexSector(m));
    }
    let elements = p
        .ray_angles()
        .iter()
        .zip(&p.angles)
        .map(|(&start, &w)| HPolyhedron::cone(start, w))
        .collect();
    Ok(SectorSet {
        partition: p.clone(),
        elements,
    })
}

/// A constructed partition with one responsible pursuer per sector.
#[derive(Debug, Clone, PartialEq)]
pub struct Egp {
    pub partition: AnglePartition,
    pub sectors: SectorSet,
    /// `assigned[m]` is the pursuer placed in sector `m` at construction.
    pub assigned: Vec<usize>,
}

/// Full partition construction: bearings, subset choice, QP. Subsets are
/// tried in rank order and the first one admitting a partition is kept.
pub fn build_egp(pursuers: &[Vec2], evader: Vec2, m: usize, eps: f64) -> Result<Egp, PartitionError> {
    let ra = relative_angles(pursuers, evader)?;
    let mut last_err = PartitionError::NoEncirclingSubset;
    for subset in ranked_subsets(&ra, m)? {
        match construct_egp(&ra, &subset, eps) {
            Ok(partition) => {
                let sectors = sectors_from_partition(&partition)?;
                let mut assigned = vec![usize::MAX; m];
                for &i in &subset {
                    let s = sectors.locate(ra.position_of(i).unwrap()).unwrap();
                    assigned[s] = i;
                }
                if assigned.contains(&usize::MAX) {
                    last_err = PartitionError::InfeasiblePartition;
                    continue;
                }
                return Ok(Egp {
                    partition,
                    sectors,
                    assigned,
                });
            }
            Err(e @ PartitionError::InfeasiblePartition) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Sampling check of the defining property: draws one point per sector and
/// tests whether the origin lies in their convex hull. Random draws favour
/// points close to the bounding rays at radii from 10⁻² to 10³; afterwards,
/// for every adjacent pair it tries points hugging the two outer rays with the
/// rest at mid-sector, which exposes any pair spanning more than `π`.
/// Returns `false` as soon as a counterexample is found.
pub fn egp_oracle(p: &AnglePartition, trials: usize, seed: u64) -> bool {
    let starts = p.ray_angles();
    let widths = p.angles();
    let m = widths.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![Vec2::ZERO; m];

    for _ in 0..trials {
        for k in 0..m {
            let frac: f64 = match rng.random_range(0..3u8) {
                0 => rng.random_range(0.0..1.0),
                1 => libm::pow(10.0, -rng.random_range(1.0..9.0)),
                _ => 1.0 - libm::pow(10.0, -rng.random_range(1.0..9.0)),
            };
            let radius = libm::pow(10.0, rng.random_range(-2.0..3.0));
            pts[k] = Vec2::from_angle(starts[k] + frac * widths[k]) * radius;
        }
        if !origin_in_hull(&pts) {
            return false;
        }
    }

    const R: f64 = 1e3;
    for k in 0..m {
        let next = (k + 1) % m;
        let narrow = widths[k].min(widths[next]);
        for e in 1..=12 {
            let delta = narrow * libm::pow(10.0, -(e as f64));
            for (j, pt) in pts.iter_mut().enumerate() {
                let a = if j == k {
                    starts[k] + delta
                } else if j == next {
                    starts[next] + widths[next] - delta
                } else {
                    starts[j] + 0.5 * widths[j]
                };
                *pt = Vec2::from_angle(a) * R;
            }
            if !origin_in_hull(&pts) {
                return false;
            }
        }
    }
    true
}

fn origin_in_hull(pts: &[Vec2]) -> bool {
    match ConvexHull::new(pts) {
        Ok(h) => h.contains(Vec2::ZERO).inside,
        Err(_) => hull_signed_distance(pts, Vec2::ZERO) >= -TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn partition_validation() {
        assert!(AnglePartition::new(0.0, vec![PI, PI]).is_ok());
        assert!(AnglePartition::new(0.0, vec![PI, PI, 0.0]).is_err());
        assert!(AnglePartition::new(0.0, vec![PI, 0.5 * PI]).is_err());
        assert!(AnglePartition::new(f64::NAN, vec![TAU]).is_err());
    }

    #[test]
    fn bearings() {
        let ra = relative_angles(&[v(1.0, 1.0), v(-1.0, 0.0), v(0.0, -2.0)], Vec2::ZERO).unwrap();
        assert!((ra.angle_of(0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((ra.angle_of(1).unwrap() - PI).abs() < 1e-15);
        assert!((ra.angle_of(2).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(ra.owners(), &[0, 1, 2]);
        assert_eq!(
            relative_angles(&[v(1.0, 1.0), v(3.0, 3.0)], v(3.0, 3.0)),
            Err(PartitionError::CoincidentAgent(1))
        );
    }

    #[test]
    fn egp_condition_examples() {
        assert!(AnglePartition::uniform(0.0, 4).unwrap().is_egp());
        assert!(!AnglePartition::uniform(0.0, 3).unwrap().is_egp());
        let third = PI / 3.0;
        let p = AnglePartition::new(0.0, vec![PI / 2.0, PI / 2.0, third, third, TAU - PI - 2.0 * third]).unwrap();
        assert!(p.is_egp());
        assert!(egp_oracle(&p, 1000, 1));
    }

    #[test]
    fn oracle_matches_examples() {
        assert!(egp_oracle(&AnglePartition::uniform(0.3, 4).unwrap(), 1000, 3));
        assert!(!egp_oracle(&AnglePartition::uniform(0.0, 3).unwrap(), 0, 3));
    }

    #[test]
    fn min_size_is_four() {
        assert_eq!(min_partition_size(), 4);
        assert!(AnglePartition::uniform(0.0, 5).unwrap().is_egp());
    }

    #[test]
    fn symmetric_construction() {
        let alpha = [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0];
        let p = construct_egp_from_bearings(&alpha, 1e-3).unwrap();
        assert!(p.start_angle().abs() < 1e-9);
        for w in p.angles() {
            assert!((w - PI / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn clustered_bearings_infeasible() {
        assert_eq!(
            construct_egp_from_bearings(&[0.1, 0.2, 0.3, 0.4], 1e-3),
            Err(PartitionError::InfeasiblePartition)
        );
    }

    #[test]
    fn subset_drops_duplicate_direction() {
        let pursuers = [v(1.0, 0.0), v(0.0, 1.0), v(-1.0, 0.0), v(0.0, -1.0), Vec2::from_angle(0.01)];
        let ra = relative_angles(&pursuers, Vec2::ZERO).unwrap();
        assert_eq!(select_subset(&ra, 4).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn subset_identity_when_n_equals_m() {
        let pursuers = [v(2.0, 1.0), v(-1.0, 2.0), v(-2.0, -1.0), v(1.0, -2.0)];
        let ra = relative_angles(&pursuers, Vec2::ZERO).unwrap();
        assert_eq!(select_subset(&ra, 4).unwrap(), vec![0, 1, 2, 3]);
        assert!(matches!(select_subset(&ra, 3), Err(PartitionError::InvalidSubsetSize { .. })));
    }

    #[test]
    fn no_encircling_subset() {
        let pursuers = [v(1.0, 0.1), v(1.0, 0.2), v(1.0, 0.3), v(1.0, 0.4)];
        let ra = relative_angles(&pursuers, Vec2::ZERO).unwrap();
        assert_eq!(select_subset(&ra, 4), Err(PartitionError::NoEncirclingSubset));
    }

    #[test]
    fn quadrant_sectors_half_open() {
        let s = sectors_from_partition(&AnglePartition::uniform(0.0, 4).unwrap()).unwrap();
        assert_eq!(s.locate(v(1.0, 0.0)), Some(0));
        assert_eq!(s.locate(v(0.0, 1.0)), Some(1));
        assert_eq!(s.locate(v(-1.0, 0.0)), Some(2));
        assert_eq!(s.locate(v(0.0, -1.0)), Some(3));
        assert_eq!(s.locate(v(1.0, -1e-9)), Some(3));
        assert_eq!(s.locate(Vec2::ZERO), None);
        assert!(s.elements()[0].contains(v(1.0, 1.0), 0.0));
        assert!(!s.elements()[0].contains(v(-1.0, 1.0), TOL));
    }

    #[test]
    fn non_convex_sector_rejected() {
        let p = AnglePartition::new(0.0, vec![1.2 * PI, 0.4 * PI, 0.4 * PI]).unwrap();
        assert_eq!(sectors_from_partition(&p), Err(PartitionError::NonConvexSector(0)));
    }

    #[test]
    fn build_on_scenario() {
        let pursuers = [v(10.0, 90.0), v(-60.0, 80.0), v(-90.0, -90.0), v(90.0, -10.0), v(-90.0, 30.0)];
        let egp = build_egp(&pursuers, Vec2::ZERO, 4, DEFAULT_EPS).unwrap();
        assert!(egp.partition.is_egp());
        let mut a = egp.assigned.clone();
        a.sort_unstable();
        a.dedup();
        assert_eq!(a.len(), 4);
        for (s, &i) in egp.assigned.iter().enumerate() {
            assert_eq!(egp.sectors.locate(pursuers[i]), Some(s));
        }
    }

    #[test]
    fn combinations_lexicographic() {
        let mut all = Vec::new();
        for_each_combination(4, 2, |c| all.push(c.to_vec()));
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(binomial(10, 4), 210);
    }
}
