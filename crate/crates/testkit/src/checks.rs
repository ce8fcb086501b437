//! Pass/fail verdicts comparing a computed answer with an oracle.

use pursuit_core::geom::HPolyhedron;
use pursuit_core::qp::{solve, QpOptions, QpStatus, QuadraticProgram};

use crate::oracle::{self, Lattice};

/// Solves a [`crate::generate::planar_qp`] instance and compares it with a
/// brute-force search over the lattice of spacing `h` on `[-1, 1]²`.
///
/// No feasible lattice point may beat the solver. The lattice optimum may
/// trail it by at most what the feasible lattice point nearest to `x*`
/// (at distance δ) allows, `‖∇f(x*)‖δ + λ_max δ²/2`. By strong convexity,
/// `f(y) - f* >= μ/2 ‖y - x*‖²` on the feasible set, so the lattice
/// minimizer lies within `sqrt(2 gap / μ)` of `x*`. Returns that distance.
pub fn planar_argmin(qp: &QuadraticProgram, h: f64) -> Result<f64, String> {
    let sol = solve(qp, &QpOptions::default()).map_err(|e| e.to_string())?;
    if sol.status != QpStatus::Optimal {
        return Err(format!("status {:?}", sol.status));
    }
    let viol = oracle::max_violation(qp, &sol.x);
    if viol > 1e-9 {
        return Err(format!("solution violates constraints by {viol:e}"));
    }
    let (xg, fg) = oracle::grid_argmin_2d(qp, -1.0, 1.0, h).ok_or("no feasible lattice point")?;
    if sol.objective > fg + 1e-9 {
        return Err(format!("lattice point beats the solver: {fg} < {}", sol.objective));
    }
    let eig = nalgebra::SymmetricEigen::new(qp.hessian.clone()).eigenvalues;
    let (mu, lmax) = (eig.min(), eig.max());
    let near = oracle::nearest_feasible_grid_point(qp, -1.0, 1.0, h, [sol.x[0], sol.x[1]]).ok_or("no nearby lattice point")?;
    let delta = ((near[0] - sol.x[0]).powi(2) + (near[1] - sol.x[1]).powi(2)).sqrt();
    let grad = (&qp.hessian * &sol.x + &qp.linear).norm();
    let gap = fg - sol.objective;
    if gap > grad * delta + 0.5 * lmax * delta * delta + 1e-9 {
        return Err(format!("lattice optimum trails by {gap}"));
    }
    let dist = ((sol.x[0] - xg[0]).powi(2) + (sol.x[1] - xg[1]).powi(2)).sqrt();
    let radius = (2.0 * gap.max(0.0) / mu).sqrt();
    if dist > radius + 1e-6 {
        return Err(format!("lattice minimizer {dist} from x*, bound {radius}"));
    }
    Ok(dist)
}

/// `x ⊖ s` against the lattice membership oracle.
pub fn pontryagin_pair(x: &HPolyhedron, s: &HPolyhedron, spacing: f64) -> Result<(), String> {
    let diff = x.pontryagin_diff(s).map_err(|e| e.to_string())?;
    let verdicts = oracle::pontryagin_grid(x, s, Lattice { spacing });
    oracle::agrees_within_band(&verdicts, &diff, spacing).map_err(|q| format!("disagreement at {q:?}"))
}

/// `a ⊕ b` against sampled sums and the lattice membership oracle.
pub fn minkowski_pair(a: &HPolyhedron, b: &HPolyhedron, spacing: f64) -> Result<(), String> {
    let sum = a.minkowski_sum(b).map_err(|e| e.to_string())?;
    let lattice = Lattice { spacing };
    if let Some(p) = oracle::minkowski_samples(a, b, lattice).into_iter().find(|p| !sum.contains(*p, 1e-9)) {
        return Err(format!("{p:?} missing from the sum"));
    }
    let verdicts = oracle::minkowski_grid(a, b, lattice);
    oracle::agrees_within_band(&verdicts, &sum, spacing).map_err(|q| format!("disagreement at {q:?}"))
}
