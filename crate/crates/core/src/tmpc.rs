//! Tube MPC for one pursuer in the evader-centered frame.
//!
//! Relative dynamics are `x⁺ = x + u + w` with `u ∈ 𝒰` the pursuer input and
//! `w = -u_e ∈ 𝒲` the evader's move. Splitting `x = z + s` into a nominal part
//! `z⁺ = z + v` and an error `s⁺ = w` gives the invariant set `𝒮 = 𝒲`. The
//! nominal problem runs on tightened sets `X̄ = 𝒳 ⊖ 𝒮`, `Ū = 𝒰 ⊖ 𝒮`, and the
//! applied input `u = v_0 + z_0 - x` keeps `x` inside `z ⊕ 𝒮`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix2};
use thiserror::Error;

use crate::geom::{GeomError, HPolyhedron, Vec2, TOL};
use crate::qp::{PreparedQp, QpError, QpOptions, QpStatus, QuadraticProgram};

pub type Mat2 = Matrix2<f64>;

/// Default prediction horizon.
pub const DEFAULT_HORIZON: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmpcError {
    #[error("tightened input set is empty (pursuer speed below evader speed)")]
    EmptyTightenedInput,
    #[error("tightened state set is empty (sector too thin for the disturbance)")]
    EmptyTightenedState,
    #[error("tightening against 𝒮 and -𝒮 disagree")]
    AsymmetricInvariant,
    #[error("horizon must be at least 1")]
    InvalidHorizon,
    #[error("weight matrices must be finite, symmetric and positive semidefinite")]
    InvalidWeights,
    #[error("no nominal trajectory satisfies the tightened constraints from this state")]
    Infeasible,
    #[error("input and disturbance sets must be bounded and nonempty")]
    InvalidSets,
    #[error("geometry: {0}")]
    Geom(#[from] GeomError),
    #[error("solver: {0}")]
    Solver(#[from] QpError),
}

/// Stage, input and terminal weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub q: Mat2,
    pub r: Mat2,
    pub p: Mat2,
}

impl Default for Weights {
    /// `Q = I`, `R = 0`, `P = 3I`.
    fn default() -> Self {
        Self {
            q: Mat2::identity(),
            r: Mat2::zeros(),
            p: Mat2::identity() * 3.0,
        }
    }
}

impl Weights {
    fn validate(&self) -> Result<(), TmpcError> {
        for m in [&self.q, &self.r, &self.p] {
            let ok = m.iter().all(|v| v.is_finite())
                && (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * (1.0 + m.abs().max())
                && m[(0, 0)] >= -1e-12
                && m[(1, 1)] >= -1e-12
                && m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] >= -1e-12;
            if !ok {
                return Err(TmpcError::InvalidWeights);
            }
        }
        Ok(())
    }
}

/// Tightened constraint sets and weights for one sector. Immutable once
/// built; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeSpec {
    sector: HPolyhedron,
    tightened_state: HPolyhedron,
    tightened_input: HPolyhedron,
    disturbance: HPolyhedron,
    input: HPolyhedron,
    horizon: usize,
    weights: Weights,
    /// Nominal problem at `x = 0`; only the `x - z_0 ∈ 𝒮` rows change with `x`.
    prepared: PreparedQp,
}

impl TubeSpec {
    pub fn sector(&self) -> &HPolyhedron {
        &self.sector
    }

    pub fn tightened_state(&self) -> &HPolyhedron {
        &self.tightened_state
    }

    pub fn tightened_input(&self) -> &HPolyhedron {
        &self.tightened_input
    }

    pub fn disturbance(&self) -> &HPolyhedron {
        &self.disturbance
    }

    /// The error set `𝒮`, equal to the disturbance set.
    pub fn invariant(&self) -> &HPolyhedron {
        &self.disturbance
    }

    pub fn input(&self) -> &HPolyhedron {
        &self.input
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }
}

/// Builds the tube for `sector` given the disturbance box `w` and the input
/// box `u`.
pub fn tighten(
    sector: &HPolyhedron,
    w: &HPolyhedron,
    u: &HPolyhedron,
    horizon: usize,
    weights: Weights,
) -> Result<TubeSpec, TmpcError> {
    if horizon == 0 {
        return Err(TmpcError::InvalidHorizon);
    }
    weights.validate()?;
    if w.is_empty() || !w.is_bounded() || u.is_empty() || !u.is_bounded() {
        return Err(TmpcError::InvalidSets);
    }
    let tightened_input = u.pontryagin_diff(w)?;
    if tightened_input.is_empty() {
        return Err(TmpcError::EmptyTightenedInput);
    }
    let mirrored = u.pontryagin_diff(&w.reflect())?;
    if mirrored.is_empty() || !mirrored.approx_eq(&tightened_input, TOL) {
        return Err(TmpcError::AsymmetricInvariant);
    }
    let tightened_state = sector.pontryagin_diff(w)?;
    if tightened_state.is_empty() {
        return Err(TmpcError::EmptyTightenedState);
    }
    let prepared = PreparedQp::new(assemble_qp(
        Vec2::ZERO,
        &tightened_state,
        &tightened_input,
        w,
        horizon,
        &weights,
    ))?;
    Ok(TubeSpec {
        sector: sector.clone(),
        tightened_state,
        tightened_input,
        disturbance: w.clone(),
        input: u.clone(),
        horizon,
        weights,
        prepared,
    })
}

/// Nominal trajectory `z_0..z_K` and inputs `v_0..v_{K-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TmpcPlan {
    pub nominal_states: Vec<Vec2>,
    pub nominal_inputs: Vec<Vec2>,
    pub objective: f64,
}

fn state_col(k: usize) -> usize {
    2 * k
}

fn input_col(horizon: usize, k: usize) -> usize {
    2 * (horizon + 1) + 2 * k
}

/// Nominal-trajectory QP from relative state `x`. Variables are
/// `[z_0, .., z_K, v_0, .., v_{K-1}]`, each a 2-vector; the cost is
/// `Σ_{k<K} (z_kᵀQz_k + v_kᵀRv_k) + z_KᵀPz_K`.
pub fn build_qp(x: Vec2, spec: &TubeSpec) -> QuadraticProgram {
    assemble_qp(
        x,
        &spec.tightened_state,
        &spec.tightened_input,
        &spec.disturbance,
        spec.horizon,
        &spec.weights,
    )
}

fn assemble_qp(
    x: Vec2,
    tightened_state: &HPolyhedron,
    tightened_input: &HPolyhedron,
    disturbance: &HPolyhedron,
    k_h: usize,
    w: &Weights,
) -> QuadraticProgram {
    let n = 4 * k_h + 2;

    let mut h = DMatrix::zeros(n, n);
    let mut put = |col: usize, m: &Mat2| {
        for r in 0..2 {
            for c in 0..2 {
                h[(col + r, col + c)] = 2.0 * m[(r, c)];
            }
        }
    };
    for k in 0..k_h {
        put(state_col(k), &w.q);
        put(input_col(k_h, k), &w.r);
    }
    put(state_col(k_h), &w.p);

    let mut eq = DMatrix::zeros(2 * k_h, n);
    for k in 0..k_h {
        for d in 0..2 {
            let r = 2 * k + d;
            eq[(r, state_col(k + 1) + d)] = 1.0;
            eq[(r, state_col(k) + d)] = -1.0;
            eq[(r, input_col(k_h, k) + d)] = -1.0;
        }
    }

    let xs = tightened_state.halfplanes();
    let us = tightened_input.halfplanes();
    let ss = disturbance.halfplanes();
    let rows = xs.len() * (k_h + 1) + us.len() * k_h + ss.len();
    let mut a = DMatrix::zeros(rows, n);
    let mut b = DVector::zeros(rows);
    let mut r = 0;
    for k in 0..=k_h {
        for hp in xs {
            a[(r, state_col(k))] = hp.normal().x;
            a[(r, state_col(k) + 1)] = hp.normal().y;
            b[r] = hp.offset();
            r += 1;
        }
    }
    for k in 0..k_h {
        for hp in us {
            a[(r, input_col(k_h, k))] = hp.normal().x;
            a[(r, input_col(k_h, k) + 1)] = hp.normal().y;
            b[r] = hp.offset();
            r += 1;
        }
    }
    // x - z_0 ∈ 𝒮  ⇔  -a·z_0 <= b - a·x
    for hp in ss {
        a[(r, state_col(0))] = -hp.normal().x;
        a[(r, state_col(0) + 1)] = -hp.normal().y;
        b[r] = hp.offset() - hp.normal().dot(x);
        r += 1;
    }

    QuadraticProgram::new(h, DVector::zeros(n))
        .with_equalities(eq, DVector::zeros(2 * k_h))
        .with_inequalities(a, b)
}

/// Solves the nominal problem. Nominal states are rebuilt from `z_0` and the
/// inputs so that `z_{k+1} = z_k + v_k` holds exactly.
pub fn solve_plan(x: Vec2, spec: &TubeSpec, opts: &QpOptions) -> Result<TmpcPlan, TmpcError> {
    let base = &spec.prepared.problem().in_rhs;
    let ss = spec.disturbance.halfplanes();
    let mut rhs = base.clone();
    let first = base.len() - ss.len();
    for (i, hp) in ss.iter().enumerate() {
        rhs[first + i] = hp.offset() - hp.normal().dot(x);
    }
    let sol = spec.prepared.solve_with_rhs(&rhs, opts)?;
    match sol.status {
        QpStatus::Optimal => {}
        QpStatus::Infeasible => return Err(TmpcError::Infeasible),
        QpStatus::MaxIterations => return Err(TmpcError::Solver(QpError::NumericalFailure)),
    }
    let k_h = spec.horizon;
    let at = |c: usize| Vec2::new(sol.x[c], sol.x[c + 1]);
    let nominal_inputs: Vec<Vec2> = (0..k_h).map(|k| at(input_col(k_h, k))).collect();
    let mut nominal_states = Vec::with_capacity(k_h + 1);
    let mut z = at(state_col(0));
    nominal_states.push(z);
    for v in &nominal_inputs {
        z += *v;
        nominal_states.push(z);
    }
    Ok(TmpcPlan {
        nominal_states,
        nominal_inputs,
        objective: sol.objective,
    })
}

/// Ancillary law `u = v_0 + z_0 - x`.
pub fn control(x: Vec2, plan: &TmpcPlan) -> Vec2 {
    plan.nominal_inputs[0] + plan.nominal_states[0] - x
}

/// One step of the relative dynamics.
pub fn step_relative(x: Vec2, u: Vec2, w: Vec2) -> Vec2 {
    x + u + w
}
