use std::collections::VecDeque;
use std::sync::Arc;

use super::multigrid::{pcg, Multigrid};
use super::{build_mesh, check_args, dot, dual_norm, is_quadratic, Mesh, TorsionResult};
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::grid::GridField;
use crate::norms::MinkowskiNorm;

const MAX_NEWTON: usize = 200;
/// Newton iterations over which a relative decrease below `tol` counts as
/// stagnation.
const WINDOW: usize = 25;

/// Torsion function of `-Q_p v = 1` with zero boundary values.
pub fn solve_torsion(domain: &ConvexPolygon, norm: &MinkowskiNorm, p: f64, h: f64, tol: f64) -> Result<TorsionResult> {
    check_args(p, tol)?;
    let mesh = build_mesh(domain, h)?;
    solve_torsion_on(mesh, domain.provenance(), norm, p, tol)
}

/// As [`solve_torsion`] on a prebuilt mesh.
///
/// Minimizes `J(v) = E(v)/p - ∫v` by damped Newton iterations whose linear
/// systems are solved by multigrid-preconditioned conjugate gradients. The
/// start is the solution of the quadratic problem for the metric of `F`.
/// Every iterate is rescaled to the optimal multiple for `J`, which makes
/// `E(v) = ∫v`. Stops when the Newton decrement falls below `tol` (relative),
/// or when `J` decreases by less than `tol` (relative) over 25 iterations;
/// the second rule covers `Lq` norms with `q` near one, whose nearly
/// non-smooth energy keeps Newton convergence linear.
pub fn solve_torsion_on(mesh: Arc<Mesh>, domain: &str, norm: &MinkowskiNorm, p: f64, tol: f64) -> Result<TorsionResult> {
    check_args(p, tol)?;
    let n = mesh.len();
    let rhs: Vec<f64> = mesh.mass.clone();
    let total_mass: f64 = rhs.iter().sum();

    let metric_op = mesh.quadratic_operator(norm.metric2());
    let metric_mg = Multigrid::new(metric_op.clone());
    let mut v = vec![0.0; n];
    let linear_tol = if is_quadratic(norm, p) { 1e-3 * tol } else { 1e-8 };
    let first = pcg(&metric_op, &metric_mg, &rhs, &mut v, linear_tol, 500);
    let mut iterations = first.iterations;

    let mut grad = vec![0.0; n];
    if !is_quadratic(norm, p) {
        // On the ray through v, J is minimized where E(tv) = ∫tv.
        let rescale = |v: &mut [f64]| {
            let t = (dot(&rhs, v) / mesh.energy(norm, p, v)).powf(1.0 / (p - 1.0));
            v.iter_mut().for_each(|x| *x *= t);
        };
        rescale(&mut v);

        let objective = |v: &[f64]| mesh.energy(norm, p, v) / p - dot(&rhs, v);
        let mut j = objective(&v);
        let mut history = VecDeque::from([j]);
        let mut converged = false;
        let mut newton = 0;
        while newton < MAX_NEWTON {
            newton += 1;
            let e = mesh.energy_grad(norm, p, &v, &mut grad);
            for k in 0..n {
                grad[k] = if mesh.grid.mask[k] { grad[k] / p - rhs[k] } else { 0.0 };
            }
            let floor = 1e-3 * mesh.max_gradient(norm, &v);
            let hess = mesh.hessian(norm, p, &v, floor);
            let mg = Multigrid::new(hess.clone());
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let mut d = vec![0.0; n];
            let cg = pcg(&hess, &mg, &neg, &mut d, 1e-4, 200);
            iterations += cg.iterations;
            let decrement = -dot(&grad, &d);
            let integral = dot(&rhs, &v);
            let gap = ((e - integral) / integral).abs();
            log::debug!(
                "torsion newton {newton}: J = {j:.12e}, decrement = {decrement:.3e}, dual gap = {gap:.3e}, \
                 {} CG iterations to {:.1e}",
                cg.iterations,
                cg.relative_residual
            );
            if decrement <= 0.0 || (0.5 * decrement <= tol * j.abs() && gap <= tol) {
                converged = true;
                break;
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
                let jt = objective(&trial);
                if jt <= j - 1e-4 * alpha * decrement {
                    v = trial;
                    rescale(&mut v);
                    j = objective(&v);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if accepted {
                history.push_back(j);
                if history.len() > WINDOW {
                    let old = history.pop_front().unwrap_or(j);
                    if old - j <= tol * j.abs() {
                        converged = true;
                        break;
                    }
                }
            } else {
                // No further decrease is representable: accept if the
                // predicted decrease is already near the tolerance.
                converged = 0.5 * decrement <= 100.0 * tol * j.abs();
                break;
            }
        }
        if !converged {
            mesh.energy_grad(norm, p, &v, &mut grad);
            for k in 0..n {
                grad[k] = if mesh.grid.mask[k] { grad[k] / p - rhs[k] } else { 0.0 };
            }
            return Err(Error::NotConverged {
                solver: "torsion",
                iterations: newton,
                residual: dual_norm(&mesh, &grad) / total_mass.sqrt(),
            });
        }
    }

    let e = mesh.energy_grad(norm, p, &v, &mut grad);
    for k in 0..n {
        grad[k] = if mesh.grid.mask[k] { grad[k] / p - rhs[k] } else { 0.0 };
    }
    let residual = dual_norm(&mesh, &grad) / total_mass.sqrt();
    let torsion = dot(&rhs, &v);
    let max = v.iter().copied().fold(0.0, f64::max);
    Ok(TorsionResult {
        v: GridField::new(mesh.grid.clone(), v),
        torsion,
        dual: e,
        max,
        iterations,
        residual,
        p,
        norm: norm.to_string(),
        domain: domain.to_string(),
        mesh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn disk_torsion_p2() {
        let norm = MinkowskiNorm::lq(2.0).unwrap();
        let disk = ConvexPolygon::regular(512, 1.0).unwrap();
        let t = solve_torsion(&disk, &norm, 2.0, 1.0 / 64.0, 1e-8).unwrap();
        assert_relative_eq!(t.max, 0.25, max_relative = 1e-2);
        assert_relative_eq!(t.torsion, PI / 8.0, max_relative = 1e-2);
        assert!((t.dual - t.torsion).abs() / t.torsion < 1e-7);
    }

    #[test]
    fn nearly_crystalline_norm_converges() {
        let norm = MinkowskiNorm::lq(1.1).unwrap();
        let sq = ConvexPolygon::rectangle(1.0, 1.0).unwrap();
        let t = solve_torsion(&sq, &norm, 1.5, 1.0 / 32.0, 1e-8).unwrap();
        assert!((t.dual - t.torsion).abs() / t.torsion < 1e-6);
        let (rf, _) = sq.inradius(&norm);
        let q = 3.0;
        assert!(t.max <= rf.powf(q) / q && t.max >= rf.powf(q) / (q * 4.0));
    }

    #[test]
    fn square_torsion_p2() {
        let norm = MinkowskiNorm::lq(2.0).unwrap();
        let sq = ConvexPolygon::rectangle(1.0, 1.0).unwrap();
        let t = solve_torsion(&sq, &norm, 2.0, 1.0 / 64.0, 1e-8).unwrap();
        assert_relative_eq!(t.max, 0.294685, max_relative = 2e-3);
        assert_relative_eq!(t.torsion, 0.562325, max_relative = 2e-3);
    }

    #[test]
    fn wulff_torsion_matches_radial_profile() {
        // On the Wulff shape of radius R the torsion function is
        // (R^q - F°(x)^q)/(q N^{q-1}).
        for (s, p) in [("lq:2", 3.0), ("lq:4", 2.0), ("ellipse:4,0,1", 1.5), ("lq:4", 3.0)] {
            let norm: MinkowskiNorm = s.parse().unwrap();
            let w = ConvexPolygon::wulff(&norm, 1.0, 512).unwrap();
            let q = p / (p - 1.0);
            let t = solve_torsion(&w, &norm, p, 1.0 / 48.0, 1e-8).unwrap();
            let expected = 1.0 / (q * 2f64.powf(q - 1.0));
            assert_relative_eq!(t.max, expected, max_relative = 2e-2);
            assert!((t.dual - t.torsion).abs() / t.torsion < 1e-6, "{s} p={p}: {} vs {}", t.dual, t.torsion);
        }
    }
}
