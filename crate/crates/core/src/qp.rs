//! Small dense convex quadratic programs.
//!
//! Solves
//!
//! ```text
//! minimize    ½ xᵀHx + gᵀx + c
//! subject to  A_eq x  = b_eq
//!             A_in x <= b_in
//! ```
//!
//! Equalities are eliminated exactly through an orthonormal null-space basis
//! `x = x_p + Z y`. The reduced inequality problem is solved with the
//! Goldfarb–Idnani dual active-set method. When the reduced Hessian is only
//! semidefinite (e.g. zero input weights), the dual method runs inside a
//! proximal-point loop `min f(y) + ρ/2‖y - y_k‖²`, which converges to a
//! minimizer of the original problem.
//!
//! Infeasibility is only reported with a verified Farkas certificate.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QpError {
    #[error("ill-formed problem: {0}")]
    IllFormed(&'static str),
    #[error("numerical breakdown in the active-set iteration")]
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpOptions {
    /// Budget on active-set changes (summed over proximal rounds).
    pub max_iter: usize,
    /// Target KKT residual.
    pub tol: f64,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: 1e-9,
        }
    }
}

/// Dense convex QP; see the module docs for the sign conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub in_matrix: DMatrix<f64>,
    pub in_rhs: DVector<f64>,
}

/// Lagrange multipliers; `ineq` are non-negative at a KKT point.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub eq: DVector<f64>,
    pub ineq: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub status: QpStatus,
    /// Largest of the four KKT residuals at `x` (`∞` when infeasible).
    pub kkt_residual: f64,
    pub multipliers: Multipliers,
}

impl QuadraticProgram {
    /// Unconstrained problem `½ xᵀHx + gᵀx`.
    pub fn new(hessian: DMatrix<f64>, linear: DVector<f64>) -> Self {
        let n = linear.len();
        Self {
            hessian,
            linear,
            constant: 0.0,
            eq_matrix: DMatrix::zeros(0, n),
            eq_rhs: DVector::zeros(0),
            in_matrix: DMatrix::zeros(0, n),
            in_rhs: DVector::zeros(0),
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        self.eq_matrix = a;
        self.eq_rhs = b;
        self
    }

    pub fn with_inequalities(mut self, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        self.in_matrix = a;
        self.in_rhs = b;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x) + self.constant
    }

    pub fn validate(&self) -> Result<(), QpError> {
        let n = self.num_vars();
        if self.hessian.nrows() != n || self.hessian.ncols() != n {
            return Err(QpError::IllFormed("hessian dimensions"));
        }
        if self.eq_matrix.ncols() != n || self.eq_matrix.nrows() != self.eq_rhs.len() {
            return Err(QpError::IllFormed("equality dimensions"));
        }
        if self.in_matrix.ncols() != n || self.in_matrix.nrows() != self.in_rhs.len() {
            return Err(QpError::IllFormed("inequality dimensions"));
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
        if !finite(&self.hessian)
            || !finite(&self.eq_matrix)
            || !finite(&self.in_matrix)
            || !self.linear.iter().all(|v| v.is_finite())
            || !self.eq_rhs.iter().all(|v| v.is_finite())
            || !self.in_rhs.iter().all(|v| v.is_finite())
        {
            return Err(QpError::IllFormed("non-finite data"));
        }
        let scale = self.hessian.amax().max(1.0);
        if (&self.hessian - self.hessian.transpose()).amax() > 1e-12 * scale {
            return Err(QpError::IllFormed("hessian not symmetric"));
        }
        if n > 0 {
            let eig = SymmetricEigen::new(self.hessian.clone());
            if eig.eigenvalues.min() < -1e-9 * scale {
                return Err(QpError::IllFormed("hessian not positive semidefinite"));
            }
        }
        Ok(())
    }
}

/// Residuals of the KKT conditions
/// `Hx + g + A_eqᵀν + A_inᵀλ = 0`, feasibility, `λ >= 0`, `λ_i s_i = 0`.
pub fn check_kkt(qp: &QuadraticProgram, x: &DVector<f64>, m: &Multipliers) -> KktResiduals {
    kkt_residuals(qp, &qp.in_rhs, x, m)
}

fn kkt_residuals(
    qp: &QuadraticProgram,
    in_rhs: &DVector<f64>,
    x: &DVector<f64>,
    m: &Multipliers,
) -> KktResiduals {
    let grad = &qp.hessian * x + &qp.linear + qp.eq_matrix.tr_mul(&m.eq) + qp.in_matrix.tr_mul(&m.ineq);
    let eq_res = &qp.eq_matrix * x - &qp.eq_rhs;
    let slack = &qp.in_matrix * x - in_rhs;
    let primal = eq_res
        .iter()
        .map(|v| v.abs())
        .chain(slack.iter().map(|v| v.max(0.0)))
        .fold(0.0, f64::max);
    let dual = m.ineq.iter().map(|l| (-l).max(0.0)).fold(0.0, f64::max);
    let complementarity = m
        .ineq
        .iter()
        .zip(slack.iter())
        .map(|(l, s)| (l * s).abs())
        .fold(0.0, f64::max);
    KktResiduals {
        stationarity: grad.amax(),
        primal,
        dual,
        complementarity,
    }
}

/// Solves `qp`. Deterministic for identical inputs.
pub fn solve(qp: &QuadraticProgram, opts: &QpOptions) -> Result<QpSolution, QpError> {
    PreparedQp::new(qp.clone())?.solve(opts)
}

/// A validated problem with its equality elimination and reduced-Hessian
/// factors computed once. Re-solving with a different inequality
/// right-hand side reuses all of them.
#[derive(Debug, Clone)]
pub struct PreparedQp {
    qp: QuadraticProgram,
    eq: EqualityElimination,
    c_red: DVector<f64>,
    /// `A_in x_p`.
    offset: DVector<f64>,
    rows: NormalizedRows,
    reduced: Reduced,
}

#[derive(Debug, Clone)]
enum Reduced {
    /// The equalities pin down a single point.
    Fixed,
    Strict { j0: DMatrix<f64> },
    /// Semidefinite reduced Hessian, solved by proximal rounds.
    Proximal { j0: DMatrix<f64>, rho: f64 },
}

impl PartialEq for PreparedQp {
    /// Everything else is derived deterministically from the problem.
    fn eq(&self, other: &Self) -> bool {
        self.qp == other.qp
    }
}

impl PreparedQp {
    pub fn new(qp: QuadraticProgram) -> Result<Self, QpError> {
        qp.validate()?;
        let eq = EqualityElimination::new(&qp.eq_matrix, &qp.eq_rhs);
        let z = &eq.null_basis;
        let dim = z.ncols();

        // Reduced inequality problem: min ½yᵀGy + cᵀy  s.t.  C y <= d.
        let g_red = z.transpose() * (&qp.hessian * z);
        let g_red = (&g_red + g_red.transpose()) * 0.5;
        let c_red = z.transpose() * (&qp.hessian * &eq.particular + &qp.linear);
        let c_mat = &qp.in_matrix * z;
        let offset = &qp.in_matrix * &eq.particular;
        let rows = NormalizedRows::new(&c_mat);

        let reduced = if dim == 0 {
            Reduced::Fixed
        } else {
            let eig = SymmetricEigen::new(g_red.clone());
            let lmax = eig.eigenvalues.max().max(0.0);
            let lmin = eig.eigenvalues.min();
            if lmin > 1e-8 * lmax.max(1.0) {
                Reduced::Strict {
                    j0: inverse_factor(g_red)?,
                }
            } else {
                let rho = 1e-2 * lmax.max(1.0);
                let g_prox = g_red + DMatrix::identity(dim, dim) * rho;
                Reduced::Proximal {
                    j0: inverse_factor(g_prox)?,
                    rho,
                }
            }
        };
        Ok(Self {
            qp,
            eq,
            c_red,
            offset,
            rows,
            reduced,
        })
    }

    pub fn problem(&self) -> &QuadraticProgram {
        &self.qp
    }

    pub fn solve(&self, opts: &QpOptions) -> Result<QpSolution, QpError> {
        self.solve_with_rhs(&self.qp.in_rhs, opts)
    }

    /// Solves with `in_rhs` in place of the stored inequality right-hand side.
    pub fn solve_with_rhs(&self, in_rhs: &DVector<f64>, opts: &QpOptions) -> Result<QpSolution, QpError> {
        let qp = &self.qp;
        if in_rhs.len() != qp.in_rhs.len() {
            return Err(QpError::IllFormed("inequality dimensions"));
        }
        if !in_rhs.iter().all(|v| v.is_finite()) {
            return Err(QpError::IllFormed("non-finite data"));
        }
        let eq = &self.eq;
        if !eq.consistent {
            return Ok(infeasible(qp));
        }
        let d = in_rhs - &self.offset;
        if self.rows.vanished.iter().any(|&i| d[i] < -1e-9) {
            return Ok(infeasible(qp));
        }
        let rhs = self.rows.rhs(&d);
        let normals = &self.rows.normals;
        let z = &eq.null_basis;
        let recover = |y: &DVector<f64>| &eq.particular + z * y;
        let m = in_rhs.len();
        let done = |x, lambda: &DVector<f64>, status| {
            finish(qp, in_rhs, eq, x, self.rows.unscale(lambda, m), status)
        };

        let mut budget = opts.max_iter;
        match &self.reduced {
            Reduced::Fixed => {
                let x = eq.particular.clone();
                let slack = &qp.in_matrix * &x - in_rhs;
                if slack.iter().any(|&s| s > 1e-9 * (1.0 + x.amax())) {
                    return Ok(infeasible(qp));
                }
                Ok(finish(qp, in_rhs, eq, x, DVector::zeros(m), QpStatus::Optimal))
            }
            Reduced::Strict { j0 } => Ok(
                match dual_active_set(j0, &self.c_red, normals, &rhs, &mut budget)? {
                    DualOutcome::Optimal { y, lambda } => done(recover(&y), &lambda, QpStatus::Optimal),
                    DualOutcome::Infeasible => infeasible(qp),
                    DualOutcome::Budget { y, lambda } => {
                        done(recover(&y), &lambda, QpStatus::MaxIterations)
                    }
                },
            ),
            Reduced::Proximal { j0, rho } => {
                let mut y = DVector::zeros(z.ncols());
                loop {
                    let c_prox = &self.c_red - &y * *rho;
                    match dual_active_set(j0, &c_prox, normals, &rhs, &mut budget)? {
                        DualOutcome::Infeasible => return Ok(infeasible(qp)),
                        DualOutcome::Budget { y: y_new, lambda } => {
                            return Ok(done(recover(&y_new), &lambda, QpStatus::MaxIterations));
                        }
                        DualOutcome::Optimal { y: y_new, lambda } => {
                            let step = (&y_new - &y).amax();
                            y = y_new;
                            let mut sol = done(recover(&y), &lambda, QpStatus::Optimal);
                            let scale = 1.0 + sol.x.amax();
                            if sol.kkt_residual <= opts.tol * scale || step <= 1e-15 * scale {
                                return Ok(sol);
                            }
                            if budget == 0 {
                                sol.status = QpStatus::MaxIterations;
                                return Ok(sol);
                            }
                            budget -= 1;
                        }
                    }
                }
            }
        }
    }
}

/// `L⁻ᵀ` for `G = LLᵀ`; then `G⁻¹ = JJᵀ`.
fn inverse_factor(g: DMatrix<f64>) -> Result<DMatrix<f64>, QpError> {
    let l = g.cholesky().ok_or(QpError::NumericalFailure)?.unpack();
    let l_inv = l.try_inverse().ok_or(QpError::NumericalFailure)?;
    Ok(l_inv.transpose())
}

fn infeasible(qp: &QuadraticProgram) -> QpSolution {
    let n = qp.num_vars();
    QpSolution {
        x: DVector::from_element(n, f64::NAN),
        objective: f64::INFINITY,
        status: QpStatus::Infeasible,
        kkt_residual: f64::INFINITY,
        multipliers: Multipliers {
            eq: DVector::zeros(qp.eq_rhs.len()),
            ineq: DVector::zeros(qp.in_rhs.len()),
        },
    }
}

fn finish(
    qp: &QuadraticProgram,
    in_rhs: &DVector<f64>,
    eq: &EqualityElimination,
    x: DVector<f64>,
    lambda: DVector<f64>,
    status: QpStatus,
) -> QpSolution {
    let r = &qp.hessian * &x + &qp.linear + qp.in_matrix.tr_mul(&lambda);
    let nu = eq.multipliers(&r);
    let multipliers = Multipliers { eq: nu, ineq: lambda };
    let kkt = kkt_residuals(qp, in_rhs, &x, &multipliers);
    QpSolution {
        objective: qp.objective(&x),
        x,
        status,
        kkt_residual: kkt.max(),
        multipliers,
    }
}

/// Orthonormal null-space parametrization of `{x : A x = b}`.
#[derive(Debug, Clone)]
struct EqualityElimination {
    particular: DVector<f64>,
    null_basis: DMatrix<f64>,
    /// Orthonormal basis of the row space of `A` (`n×k`).
    range_q: DMatrix<f64>,
    /// Leading `k×k` upper-triangular block of the pivoted factorization.
    r11: DMatrix<f64>,
    /// Column order of `Aᵀ` chosen by pivoting.
    perm: Vec<usize>,
    consistent: bool,
}

impl EqualityElimination {
    /// Householder QR of `Aᵀ` with column pivoting by norm, `Aᵀ P = Q R`.
    /// The first `rank` columns of `Q` span the row space of `A`, the rest
    /// its null space.
    fn new(a: &DMatrix<f64>, b: &DVector<f64>) -> Self {
        let (m, n) = a.shape();
        let mut r = a.transpose();
        let mut q = DMatrix::<f64>::identity(n, n);
        let mut perm: Vec<usize> = (0..m).collect();
        let scale = a.amax().max(1.0);
        let thresh = 1e-12 * scale * (m.max(n) as f64);
        let mut rank = 0;
        let mut v = DVector::<f64>::zeros(n);
        for j in 0..m.min(n) {
            let norm_of = |r: &DMatrix<f64>, c: usize| r.view((j, c), (n - j, 1)).norm();
            let (p, best) = (j..m)
                .map(|c| (c, norm_of(&r, c)))
                .fold((j, -1.0), |acc, (c, x)| if x > acc.1 { (c, x) } else { acc });
            if best <= thresh {
                break;
            }
            r.swap_columns(j, p);
            perm.swap(j, p);
            // Reflector mapping r[j.., j] onto a multiple of e_j.
            let x0 = r[(j, j)];
            let alpha = if x0 >= 0.0 { -best } else { best };
            v.fill(0.0);
            for i in j..n {
                v[i] = r[(i, j)];
            }
            v[j] -= alpha;
            let vn = v.rows(j, n - j).norm();
            if vn > 0.0 {
                v /= vn;
                for c in j..m {
                    let d: f64 = (j..n).map(|i| v[i] * r[(i, c)]).sum();
                    for i in j..n {
                        r[(i, c)] -= 2.0 * d * v[i];
                    }
                }
                for row in 0..n {
                    let d: f64 = (j..n).map(|i| q[(row, i)] * v[i]).sum();
                    for i in j..n {
                        q[(row, i)] -= 2.0 * d * v[i];
                    }
                }
            }
            rank = j + 1;
        }

        let range_q = q.columns(0, rank).into_owned();
        let null_basis = q.columns(rank, n - rank).into_owned();
        let r11 = r.view((0, 0), (rank, rank)).upper_triangle();
        // Pᵀ A = R₁ᵀ Q₁ᵀ: forward-substitute R₁₁ᵀ y = (Pᵀ b)[..k], x_p = Q₁ y.
        let mut y = DVector::zeros(rank);
        for i in 0..rank {
            let mut acc = b[perm[i]];
            for k in 0..i {
                acc -= r11[(k, i)] * y[k];
            }
            y[i] = acc / r11[(i, i)];
        }
        let particular = &range_q * y;
        let residual = a * &particular - b;
        let consistent = residual.amax() <= 1e-9 * (1.0 + b.amax());
        Self {
            particular,
            null_basis,
            range_q,
            r11,
            perm,
            consistent,
        }
    }

    /// Least-squares `ν` with `Aᵀν ≈ -r`.
    fn multipliers(&self, r: &DVector<f64>) -> DVector<f64> {
        let k = self.r11.nrows();
        let rhs = -(self.range_q.transpose() * r);
        let mut mu = DVector::zeros(k);
        for i in (0..k).rev() {
            let mut acc = rhs[i];
            for c in i + 1..k {
                acc -= self.r11[(i, c)] * mu[c];
            }
            mu[i] = acc / self.r11[(i, i)];
        }
        let mut nu = DVector::zeros(self.perm.len());
        for i in 0..k {
            nu[self.perm[i]] = mu[i];
        }
        nu
    }
}

/// Inequality rows `C y <= d` rescaled to unit norm. Rows that vanish in the
/// reduced space become constant checks on `d`.
#[derive(Debug, Clone)]
struct NormalizedRows {
    /// Row `k` is `-C_i / ‖C_i‖` so constraints read `n·y >= b`.
    normals: DMatrix<f64>,
    scale: Vec<f64>,
    original: Vec<usize>,
    vanished: Vec<usize>,
}

impl NormalizedRows {
    fn new(c: &DMatrix<f64>) -> Self {
        let (m, dim) = c.shape();
        let tiny = 1e-13 * (1.0 + c.amax());
        let mut normals = Vec::new();
        let mut scale = Vec::new();
        let mut original = Vec::new();
        let mut vanished = Vec::new();
        for i in 0..m {
            let row = c.row(i);
            let norm = row.norm();
            if norm <= tiny {
                vanished.push(i);
                continue;
            }
            normals.extend(row.iter().map(|v| -v / norm));
            scale.push(norm);
            original.push(i);
        }
        Self {
            normals: DMatrix::from_row_slice(original.len(), dim, &normals),
            scale,
            original,
            vanished,
        }
    }

    fn rhs(&self, d: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.original.len(),
            self.original.iter().zip(&self.scale).map(|(&i, s)| -d[i] / s),
        )
    }

    fn unscale(&self, lambda: &DVector<f64>, m: usize) -> DVector<f64> {
        let mut out = DVector::zeros(m);
        for (k, &i) in self.original.iter().enumerate() {
            out[i] = lambda[k] / self.scale[k];
        }
        out
    }
}

enum DualOutcome {
    Optimal { y: DVector<f64>, lambda: DVector<f64> },
    Infeasible,
    Budget { y: DVector<f64>, lambda: DVector<f64> },
}

/// Goldfarb–Idnani dual active-set method for
/// `min ½yᵀGy + cᵀy  s.t.  n_i·y >= b_i`, `G` positive definite and given
/// through `j0 = L⁻ᵀ`.
///
/// Maintains `J = L⁻ᵀ Q` and upper-triangular `R` with `JᵀN_A = [R; 0]` for
/// the active normals `N_A`. `budget` is decremented per step.
fn dual_active_set(
    j0: &DMatrix<f64>,
    c: &DVector<f64>,
    normals: &DMatrix<f64>,
    rhs: &DVector<f64>,
    budget: &mut usize,
) -> Result<DualOutcome, QpError> {
    let dim = j0.nrows();
    let m = rhs.len();
    let mut j = j0.clone();
    let mut r = DMatrix::<f64>::zeros(dim, dim);
    let mut r_norm = 1.0f64;

    let mut y = -(j0 * j0.tr_mul(c));
    let mut active: Vec<usize> = Vec::with_capacity(dim);
    let mut u: Vec<f64> = Vec::with_capacity(dim + 1);
    let mut is_active = vec![false; m];
    let mut slack = DVector::<f64>::zeros(m);

    let collect = |active: &[usize], u: &[f64]| {
        let mut lambda = DVector::zeros(m);
        for (k, &i) in active.iter().enumerate() {
            lambda[i] = u[k];
        }
        lambda
    };

    loop {
        // Most violated constraint (lowest index on ties).
        let ytol = 1e-11 * (1.0 + y.amax());
        slack.copy_from(rhs);
        slack.gemv(1.0, normals, &y, -1.0);
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..m {
            let s = slack[i];
            if !is_active[i] && s < -ytol && worst.is_none_or(|(_, w)| s < w) {
                worst = Some((i, s));
            }
        }
        let Some((p, _)) = worst else {
            let lambda = collect(&active, &u);
            return Ok(DualOutcome::Optimal { y, lambda });
        };
        let np = normals.row(p).transpose();
        u.push(0.0);

        loop {
            if *budget == 0 {
                u.pop();
                let lambda = collect(&active, &u);
                return Ok(DualOutcome::Budget { y, lambda });
            }
            *budget -= 1;

            let q = active.len();
            let d = j.tr_mul(&np);
            // Primal direction z = J₂ d₂, dual direction r = R⁻¹ d₁.
            let z = j.columns(q, dim - q) * d.rows(q, dim - q);
            let rdir = back_substitute(&r, &d, q);

            let mut t1 = f64::INFINITY;
            let mut drop: Option<usize> = None;
            for k in 0..q {
                if rdir[k] > 0.0 {
                    let ratio = u[k] / rdir[k];
                    if ratio < t1 {
                        t1 = ratio;
                        drop = Some(k);
                    }
                }
            }
            let zn = z.dot(&np);
            let sp = np.dot(&y) - rhs[p];
            let t2 = if zn > 1e-14 * d.norm_squared() {
                -sp / zn
            } else {
                f64::INFINITY
            };
            let t = t1.min(t2);

            if !t.is_finite() {
                return if certificate_holds(normals, rhs, &active, &rdir, p) {
                    Ok(DualOutcome::Infeasible)
                } else {
                    Err(QpError::NumericalFailure)
                };
            }

            if !t2.is_finite() {
                // Dual-only step, then drop a blocking constraint.
                for k in 0..q {
                    u[k] -= t * rdir[k];
                }
                u[q] += t;
                let k = drop.expect("finite t1 has an index");
                is_active[active[k]] = false;
                delete_constraint(&mut j, &mut r, &mut active, &mut u, k);
                continue;
            }

            y.axpy(t, &z, 1.0);
            for k in 0..q {
                u[k] -= t * rdir[k];
            }
            u[q] += t;

            if t2 <= t1 {
                if !add_constraint(&mut j, &mut r, &mut r_norm, &d, q) {
                    return Err(QpError::NumericalFailure);
                }
                active.push(p);
                is_active[p] = true;
                break;
            }
            let k = drop.expect("partial step has an index");
            is_active[active[k]] = false;
            delete_constraint(&mut j, &mut r, &mut active, &mut u, k);
        }
    }
}

/// Solves `R[..q, ..q] x = d[..q]`.
fn back_substitute(r: &DMatrix<f64>, d: &DVector<f64>, q: usize) -> DVector<f64> {
    let mut x = DVector::zeros(q);
    for i in (0..q).rev() {
        let mut s = d[i];
        for k in i + 1..q {
            s -= r[(i, k)] * x[k];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

/// `n_p = Σ r_j n_j` with all `r_j <= 0` proves infeasibility: multipliers
/// `λ_p = 1, λ_j = -r_j` combine the normals to zero while the right-hand
/// sides combine to `-s_p > 0`.
fn certificate_holds(
    normals: &DMatrix<f64>,
    rhs: &DVector<f64>,
    active: &[usize],
    rdir: &DVector<f64>,
    p: usize,
) -> bool {
    if rdir.iter().any(|&v| v > 1e-12) {
        return false;
    }
    let mut combo = normals.row(p).transpose();
    let mut b = rhs[p];
    let mut weight = 1.0;
    for (k, &i) in active.iter().enumerate() {
        combo -= normals.row(i).transpose() * rdir[k];
        b -= rhs[i] * rdir[k];
        weight += rdir[k].abs();
    }
    combo.amax() <= 1e-9 * weight && b > 1e-9 * weight.max(1.0) * (1.0 + rhs.amax())
}

fn givens(a: f64, b: f64) -> Option<(f64, f64, f64)> {
    let h = libm::hypot(a, b);
    if h == 0.0 {
        return None;
    }
    Some((a / h, b / h, h))
}

fn add_constraint(
    j: &mut DMatrix<f64>,
    r: &mut DMatrix<f64>,
    r_norm: &mut f64,
    d: &DVector<f64>,
    q: usize,
) -> bool {
    let dim = j.nrows();
    let mut d = d.clone();
    for col in (q + 1..dim).rev() {
        let Some((mut cc, mut ss, h)) = givens(d[col - 1], d[col]) else {
            continue;
        };
        d[col] = 0.0;
        if cc < 0.0 {
            cc = -cc;
            ss = -ss;
            d[col - 1] = -h;
        } else {
            d[col - 1] = h;
        }
        let xny = ss / (1.0 + cc);
        for k in 0..dim {
            let t1 = j[(k, col - 1)];
            let t2 = j[(k, col)];
            j[(k, col - 1)] = t1 * cc + t2 * ss;
            j[(k, col)] = xny * (t1 + j[(k, col - 1)]) - t2;
        }
    }
    for i in 0..=q {
        r[(i, q)] = d[i];
    }
    if d[q].abs() <= f64::EPSILON * *r_norm {
        return false;
    }
    *r_norm = r_norm.max(d[q].abs());
    true
}

fn delete_constraint(
    j: &mut DMatrix<f64>,
    r: &mut DMatrix<f64>,
    active: &mut Vec<usize>,
    u: &mut Vec<f64>,
    k: usize,
) {
    let dim = j.nrows();
    let q = active.len();
    active.remove(k);
    u.remove(k);
    for col in k..q - 1 {
        for i in 0..dim {
            r[(i, col)] = r[(i, col + 1)];
        }
    }
    for i in 0..dim {
        r[(i, q - 1)] = 0.0;
    }
    let q = q - 1;
    for row in k..q {
        let Some((mut cc, mut ss, h)) = givens(r[(row, row)], r[(row + 1, row)]) else {
            continue;
        };
        r[(row + 1, row)] = 0.0;
        if cc < 0.0 {
            r[(row, row)] = -h;
            cc = -cc;
            ss = -ss;
        } else {
            r[(row, row)] = h;
        }
        let xny = ss / (1.0 + cc);
        for col in row + 1..q {
            let t1 = r[(row, col)];
            let t2 = r[(row + 1, col)];
            r[(row, col)] = t1 * cc + t2 * ss;
            r[(row + 1, col)] = xny * (t1 + r[(row, col)]) - t2;
        }
        for i in 0..dim {
            let t1 = j[(i, row)];
            let t2 = j[(i, row + 1)];
            j[(i, row)] = t1 * cc + t2 * ss;
            j[(i, row + 1)] = xny * (j[(i, row)] + t1) - t2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_qp() -> QuadraticProgram {
        // min x² s.t. x >= 1
        QuadraticProgram::new(DMatrix::from_element(1, 1, 2.0), DVector::zeros(1))
            .with_inequalities(DMatrix::from_element(1, 1, -1.0), DVector::from_element(1, -1.0))
    }

    #[test]
    fn bound_constrained_scalar() {
        let sol = solve(&scalar_qp(), &QpOptions::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert!((sol.multipliers.ineq[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kkt_at_optimum_and_perturbed() {
        let qp = scalar_qp();
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        let res = check_kkt(&qp, &sol.x, &sol.multipliers);
        assert!(res.max() <= 1e-10, "{res:?}");
        let perturbed = DVector::from_element(1, 1.1);
        let res = check_kkt(&qp, &perturbed, &sol.multipliers);
        assert!(res.stationarity > 0.0);
    }

    #[test]
    fn unconstrained_quadratic() {
        // (x-1)² + (y-2)² = x² + y² - 2x - 4y + 5
        let qp = QuadraticProgram::new(DMatrix::identity(2, 2) * 2.0, DVector::from_vec(vec![-2.0, -4.0]))
            .with_constant(5.0);
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 2.0).abs() < 1e-12);
        assert!(sol.objective.abs() < 1e-12);
    }

    #[test]
    fn equality_and_semidefinite_hessian() {
        // min x² s.t. x - y = 0, y >= 2 ; y carries no curvature.
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let qp = QuadraticProgram::new(h, DVector::zeros(2))
            .with_equalities(DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), DVector::zeros(1))
            .with_inequalities(DMatrix::from_row_slice(1, 2, &[0.0, -1.0]), DVector::from_element(1, -2.0));
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 2.0).abs() < 1e-9);
        assert!(sol.kkt_residual < 1e-8);
    }

    #[test]
    fn linear_program_via_proximal_loop() {
        // min -x - y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0  → (1.6, 1.2)
        let qp = QuadraticProgram::new(DMatrix::zeros(2, 2), DVector::from_vec(vec![-1.0, -1.0]))
            .with_inequalities(
                DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 3.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
                DVector::from_vec(vec![4.0, 6.0, 0.0, 0.0]),
            );
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.x[0] - 1.6).abs() < 1e-7, "{}", sol.x);
        assert!((sol.x[1] - 1.2).abs() < 1e-7);
    }

    #[test]
    fn infeasible_bounds() {
        // x <= 0 and x >= 1
        let qp = QuadraticProgram::new(DMatrix::identity(1, 1), DVector::zeros(1)).with_inequalities(
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            DVector::from_vec(vec![0.0, -1.0]),
        );
        assert_eq!(solve(&qp, &QpOptions::default()).unwrap().status, QpStatus::Infeasible);
    }

    #[test]
    fn inconsistent_equalities() {
        let qp = QuadraticProgram::new(DMatrix::identity(2, 2), DVector::zeros(2)).with_equalities(
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]),
            DVector::from_vec(vec![1.0, 3.0]),
        );
        assert_eq!(solve(&qp, &QpOptions::default()).unwrap().status, QpStatus::Infeasible);
    }

    #[test]
    fn ill_formed_rejected() {
        let qp = QuadraticProgram::new(DMatrix::identity(2, 2), DVector::zeros(3));
        assert!(matches!(solve(&qp, &QpOptions::default()), Err(QpError::IllFormed(_))));
        let qp = QuadraticProgram::new(DMatrix::identity(1, 1) * -1.0, DVector::zeros(1));
        assert!(matches!(solve(&qp, &QpOptions::default()), Err(QpError::IllFormed(_))));
    }

    #[test]
    fn degenerate_duplicate_constraints() {
        // Same constraint twice plus its mirror pinning x = 0 exactly.
        let qp = QuadraticProgram::new(DMatrix::identity(2, 2) * 2.0, DVector::from_vec(vec![-2.0, -2.0]))
            .with_inequalities(
                DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, -1.0, 0.0]),
                DVector::from_vec(vec![0.0, 0.0, 0.0]),
            );
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.x[0].abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    }
}
