use std::collections::VecDeque;
use std::sync::Arc;

use super::multigrid::{Multigrid, Stencil};
use super::{build_mesh, check_args, dot, dual_norm, is_quadratic, EigenResult, Mesh, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::grid::GridField;
use crate::norms::MinkowskiNorm;

/// Quotient history length used by the stopping rule.
const WINDOW: usize = 25;
const MEMORY: usize = 8;
/// Iterations between Hessian refreshes of the preconditioner when `p ≠ 2`.
const REFRESH: usize = 10;

/// First eigenvalue and eigenfunction.
pub fn solve_eigen(domain: &ConvexPolygon, norm: &MinkowskiNorm, p: f64, h: f64, tol: f64) -> Result<EigenResult> {
    check_args(p, tol)?;
    let mesh = build_mesh(domain, h)?;
    solve_eigen_on(mesh, domain.provenance(), norm, p, tol)
}

/// Preconditioner `z = c A⁻¹ r` with `A⁻¹` approximated by two V-cycles.
struct Preconditioner {
    op: Stencil,
    mg: Multigrid,
    scale: f64,
}

impl Preconditioner {
    fn new(op: Stencil, scale: f64) -> Self {
        let mg = Multigrid::new(op.clone());
        Self { op, mg, scale }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        self.mg.vcycle(r, z);
        let mut az = vec![0.0; n];
        self.op.apply(z, &mut az);
        let res: Vec<f64> = (0..n).map(|k| if self.op.active[k] { r[k] - az[k] } else { 0.0 }).collect();
        let mut dz = vec![0.0; n];
        self.mg.vcycle(&res, &mut dz);
        for k in 0..n {
            z[k] = self.scale * (z[k] + dz[k]);
        }
    }
}

/// As [`solve_eigen`] on a prebuilt mesh.
///
/// Minimizes the quotient `R(u) = E(u) / Σ m|u|^p` by preconditioned L-BFGS
/// with a backtracking line search, clamping `u ≥ 0` and renormalizing after
/// every step. The preconditioner is `((p-1)/p) H⁻¹` with `H` the Hessian of
/// `E/p`; with a unit step and no memory this is the nonlinear inverse
/// iteration `u ← H⁻¹(M u^{p-1})`. Stops when the quotient decreases by less
/// than `tol` (relative) over 25 iterations, or when the predicted decrease of
/// a full step falls below `tol/100` (relative). Nodes left clamped at zero
/// where the quotient still decreases upward are released afterwards.
pub fn solve_eigen_on(mesh: Arc<Mesh>, domain: &str, norm: &MinkowskiNorm, p: f64, tol: f64) -> Result<EigenResult> {
    check_args(p, tol)?;
    let n = mesh.len();
    let mask = &mesh.grid.mask;
    let quadratic = is_quadratic(norm, p);

    let normalize = |u: &mut Vec<f64>| {
        let d = mesh.integrate(u, |x| x.abs().powf(p));
        let s = d.powf(-1.0 / p);
        u.iter_mut().for_each(|x| *x *= s);
    };
    // Quotient and gradient at a normalized field.
    let evaluate = |u: &[f64], g: &mut [f64]| -> f64 {
        let e = mesh.energy_grad(norm, p, u, g);
        let d = mesh.integrate(u, |x| x.abs().powf(p));
        let r = e / d;
        for k in 0..n {
            if mask[k] {
                let du = p * mesh.mass[k] * u[k].abs().powf(p - 1.0) * u[k].signum();
                g[k] = (g[k] - r * du) / d;
            }
        }
        r
    };
    let quotient = |u: &[f64]| mesh.energy(norm, p, u) / mesh.integrate(u, |x| x.abs().powf(p));

    let (lo, hi) = mesh.grid.mask.iter().enumerate().filter(|(_, &m)| m).fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), (k, _)| {
            let x = mesh.pos[k];
            ([lo[0].min(x[0]), lo[1].min(x[1])], [hi[0].max(x[0]), hi[1].max(x[1])])
        },
    );
    let (lo, hi) = ([lo[0] - mesh.grid.h, lo[1] - mesh.grid.h], [hi[0] + mesh.grid.h, hi[1] + mesh.grid.h]);
    let mut u: Vec<f64> = (0..n)
        .map(|k| {
            if !mask[k] {
                return 0.0;
            }
            let x = mesh.pos[k];
            (x[0] - lo[0]) * (hi[0] - x[0]) * (x[1] - lo[1]) * (hi[1] - x[1])
        })
        .collect();
    normalize(&mut u);

    let hessian = |u: &[f64]| -> Stencil {
        if quadratic {
            mesh.quadratic_operator(norm.metric2())
        } else {
            let floor = 1e-3 * mesh.max_gradient(norm, u);
            mesh.hessian(norm, p, u, floor)
        }
    };
    let mut pre = Preconditioner::new(hessian(&u), (p - 1.0) / p);

    let mut g = vec![0.0; n];
    let mut r = evaluate(&u, &mut g);
    let mut history: VecDeque<f64> = VecDeque::from([r]);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut z = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        if !quadratic && iterations % REFRESH == 0 {
            pre = Preconditioner::new(hessian(&u), (p - 1.0) / p);
            pairs.clear();
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        pre.apply(&q, &mut z);
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &z);
            z.iter_mut().zip(s).for_each(|(zi, si)| *zi += (a - b) * si);
        }
        let mut slope = -dot(&g, &z);
        if slope >= 0.0 {
            pairs.clear();
            pre.apply(&g, &mut z);
            slope = -dot(&g, &z);
        }

        // The predicted decrease bounds the remaining error in the quotient.
        if -slope <= 1e-2 * tol * r {
            converged = true;
            break;
        }
        let mut step = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let mut trial: Vec<f64> = (0..n).map(|k| if mask[k] { (u[k] - step * z[k]).max(0.0) } else { 0.0 }).collect();
            normalize(&mut trial);
            let rt = quotient(&trial);
            if rt.is_finite() && rt <= r + 1e-4 * step * slope {
                next = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(u_new) = next else {
            if pairs.is_empty() {
                // Even the plain preconditioned direction cannot decrease the
                // quotient: it is stationary to round-off.
                converged = true;
                break;
            }
            pairs.clear();
            continue;
        };
        let r_new = evaluate(&u_new, &mut g_new);
        let s: Vec<f64> = u_new.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > MEMORY {
                pairs.pop_front();
            }
        }
        u = u_new;
        std::mem::swap(&mut g, &mut g_new);
        r = r_new;
        history.push_back(r);
        if history.len() > WINDOW + 1 {
            history.pop_front();
        }
        if history.len() == WINDOW + 1 && (history[0] - r) / r < tol {
            converged = true;
            break;
        }
        log::trace!("eigen iteration {iterations}: quotient {r:.12e}");
    }

    if converged {
        release_pinned(&mut u, &mut g, r, &evaluate, &normalize, &quotient, mask);
    }

    // Residual of the Euler-Lagrange equation, relative to the operator term.
    let mut ge = vec![0.0; n];
    mesh.energy_grad(norm, p, &u, &mut ge);
    let lambda = quotient(&u);
    let res: Vec<f64> = (0..n)
        .map(|k| if mask[k] { ge[k] / p - lambda * mesh.mass[k] * u[k].powf(p - 1.0) } else { 0.0 })
        .collect();
    let residual = dual_norm(&mesh, &res) / dual_norm(&mesh, &ge.iter().map(|x| x / p).collect::<Vec<_>>());
    if !converged {
        return Err(Error::NotConverged { solver: "eigen", iterations, residual });
    }
    let top = u.iter().copied().fold(0.0, f64::max);
    u.iter_mut().for_each(|x| *x /= top);
    Ok(EigenResult {
        lambda,
        u: GridField::new(mesh.grid.clone(), u),
        iterations,
        residual,
        p,
        norm: norm.to_string(),
        domain: domain.to_string(),
        mesh,
    })
}

/// Nodes clamped to zero where the quotient still decreases upward are an
/// artifact of projecting preconditioned steps. Frees them by projected
/// gradient steps restricted to those nodes.
fn release_pinned(
    u: &mut Vec<f64>,
    g: &mut [f64],
    mut r: f64,
    evaluate: &impl Fn(&[f64], &mut [f64]) -> f64,
    normalize: &impl Fn(&mut Vec<f64>),
    quotient: &impl Fn(&[f64]) -> f64,
    mask: &[bool],
) {
    for _ in 0..100 {
        let pinned: Vec<usize> = (0..u.len()).filter(|&k| mask[k] && u[k] <= 0.0 && g[k] < 0.0).collect();
        if pinned.is_empty() {
            break;
        }
        let gmax = pinned.iter().map(|&k| -g[k]).fold(0.0, f64::max);
        let top = u.iter().copied().fold(0.0, f64::max);
        let slope = -pinned.iter().map(|&k| g[k] * g[k]).sum::<f64>();
        let mut step = 1e-2 * top / gmax;
        let mut moved = false;
        for _ in 0..40 {
            let mut trial = u.clone();
            for &k in &pinned {
                trial[k] = -step * g[k];
            }
            normalize(&mut trial);
            if quotient(&trial) <= r + 1e-4 * step * slope {
                *u = trial;
                r = evaluate(u, g);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
}
