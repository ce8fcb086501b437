//! Random instance generators shared by the test suites.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use pursuit_core::geom::{HPolyhedron, Vec2};
use pursuit_core::partition::AnglePartition;
use pursuit_core::qp::QuadraticProgram;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::oracle;

/// Random widths summing to 2π, each at least `min`.
pub fn random_widths(rng: &mut ChaCha8Rng, m: usize, min: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| -rng.random_range(1e-12..1.0f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    let free = TAU - min * m as f64;
    let mut w: Vec<f64> = raw.iter().map(|r| min + free * r / total).collect();
    let err = TAU - w.iter().sum::<f64>();
    w[m - 1] += err;
    w
}

pub fn max_adjacent(w: &[f64]) -> f64 {
    (0..w.len()).map(|k| w[k] + w[(k + 1) % w.len()]).fold(f64::NEG_INFINITY, f64::max)
}

/// The `i`-th draw of a mix of unconstrained partitions, partitions
/// conditioned on the adjacent-sum test, and partitions with one adjacent
/// pair pushed to `π ± δ`.
pub fn random_partition(rng: &mut ChaCha8Rng, m: usize, i: usize) -> AnglePartition {
    let start = rng.random_range(-PI..PI);
    let mut w = random_widths(rng, m, 0.02);
    match i % 3 {
        0 => {}
        // With four sectors the opposite pairs must each sum to exactly π.
        1 if m == 4 => {
            let a = rng.random_range(0.02..PI - 0.02);
            w = vec![a, PI - a, a, PI - a];
        }
        1 => {
            while max_adjacent(&w) > PI {
                w = random_widths(rng, m, 0.02);
            }
        }
        _ => {
            let k = rng.random_range(0..m);
            let next = (k + 1) % m;
            let delta = 10f64.powf(-rng.random_range(2.0..6.0)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            // Pair (k, next) gets π + δ; the rest share the remainder.
            let pair = PI + delta;
            let split = rng.random_range(0.2..0.8);
            let rest = random_widths(rng, m - 2, 0.0);
            let scale = (TAU - pair) / TAU;
            let mut out = vec![0.0; m];
            out[k] = pair * split;
            out[next] = pair * (1.0 - split);
            let mut it = rest.iter();
            for (j, slot) in out.iter_mut().enumerate() {
                if j != k && j != next {
                    *slot = it.next().unwrap() * scale;
                }
            }
            w = out;
        }
    }
    AnglePartition::new(start, w).unwrap()
}

/// Three pursuers at random bearings and radii around the origin.
pub fn random_triple(rng: &mut ChaCha8Rng) -> Vec<Vec2> {
    (0..3)
        .map(|_| Vec2::from_angle(rng.random_range(0.0..TAU)) * rng.random_range(1.0..100.0))
        .collect()
}

/// Random polygon whose centre is within `spread` of the origin.
pub fn polygon(rng: &mut ChaCha8Rng, spread: f64, radius: std::ops::Range<f64>, max_points: usize) -> HPolyhedron {
    let c = if spread > 0.0 {
        Vec2::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread))
    } else {
        Vec2::ZERO
    };
    let r = rng.random_range(radius);
    let n = rng.random_range(3..max_points);
    oracle::random_polygon(rng, c, r, n)
}

/// Feasible convex program with `n` variables, a Hessian of rank `rank`,
/// `m_eq` equalities and `m_in` random inequalities through a known point
/// (30% of them active there), plus the box `|x_i| <= 10`.
pub fn feasible_qp(rng: &mut ChaCha8Rng, n: usize, rank: usize, m_eq: usize, m_in: usize) -> QuadraticProgram {
    let m = DMatrix::from_fn(rank, n, |_, _| rng.random_range(-1.0..1.0));
    let h = m.transpose() * m;
    let g = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
    let x0 = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    let a_eq = DMatrix::from_fn(m_eq, n, |_, _| rng.random_range(-1.0..1.0));
    let b_eq = &a_eq * &x0;
    let mut a_in = DMatrix::zeros(m_in + 2 * n, n);
    let mut b_in = DVector::zeros(m_in + 2 * n);
    for i in 0..m_in {
        for j in 0..n {
            a_in[(i, j)] = rng.random_range(-1.0..1.0);
        }
        let slack: f64 = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) };
        b_in[i] = a_in.row(i).transpose().dot(&x0) + slack;
    }
    for j in 0..n {
        a_in[(m_in + 2 * j, j)] = 1.0;
        a_in[(m_in + 2 * j + 1, j)] = -1.0;
        b_in[m_in + 2 * j] = 10.0;
        b_in[m_in + 2 * j + 1] = 10.0;
    }
    QuadraticProgram::new(h, g).with_equalities(a_eq, b_eq).with_inequalities(a_in, b_in)
}

/// A [`feasible_qp`] of random shape: up to 11 variables, any Hessian rank,
/// fewer equalities than variables and up to 14 extra inequalities.
pub fn any_feasible_qp(rng: &mut ChaCha8Rng) -> QuadraticProgram {
    let n = rng.random_range(1..12);
    let rank = rng.random_range(0..=n);
    let m_eq = rng.random_range(0..n);
    let m_in = rng.random_range(0..15);
    feasible_qp(rng, n, rank, m_eq, m_in)
}

/// Strictly convex two-variable problem on `[-1, 1]²` with up to three
/// extra cuts through a known feasible point.
pub fn planar_qp(rng: &mut ChaCha8Rng) -> QuadraticProgram {
    let m = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
    let h = m.transpose() * m + DMatrix::identity(2, 2) * 0.5;
    let g = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
    let x0 = DVector::from_fn(2, |_, _| rng.random_range(-0.8..0.8));
    let cuts = rng.random_range(0..4);
    let rows = 4 + cuts;
    let mut a = DMatrix::zeros(rows, 2);
    let mut b = DVector::zeros(rows);
    for j in 0..2 {
        a[(2 * j, j)] = 1.0;
        a[(2 * j + 1, j)] = -1.0;
        b[2 * j] = 1.0;
        b[2 * j + 1] = 1.0;
    }
    for r in 4..rows {
        let t: f64 = rng.random_range(0.0..TAU);
        a[(r, 0)] = t.cos();
        a[(r, 1)] = t.sin();
        b[r] = a[(r, 0)] * x0[0] + a[(r, 1)] * x0[1] + rng.random_range(0.05..0.5);
    }
    QuadraticProgram::new(h, g).with_inequalities(a, b)
}
