use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EigenResult, TorsionResult};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::norms::{conjugate, pi_p, MinkowskiNorm};
use crate::quad::arc_tail;

/// The P-function `(p-1)F(∇u)^p + λ(u^p - 1)` of a normalized eigenfunction.
#[derive(Debug, Clone)]
pub struct PFunction {
    /// Nodal values; zero on the boundary collar, where it is not evaluated.
    pub field: GridField,
    /// Nodes where `P` was evaluated: interior nodes whose eight neighbours
    /// are interior too.
    pub evaluated: Vec<bool>,
    /// Largest evaluated value and its position.
    pub max: f64,
    pub argmax: [f64; 2],
    /// Largest evaluated `|P|`.
    pub max_abs: f64,
}

impl PFunction {
    /// Largest `P` and `|P|` over evaluated nodes satisfying `keep`.
    pub fn extrema_where(&self, keep: impl Fn([f64; 2]) -> bool) -> (f64, f64) {
        let g = &self.field.grid;
        let mut out = (f64::NEG_INFINITY, 0.0_f64);
        for k in 0..g.len() {
            if self.evaluated[k] && keep(g.position(k % g.nx, k / g.nx)) {
                let v = self.field.values[k];
                out = (out.0.max(v), out.1.max(v.abs()));
            }
        }
        out
    }
}

/// Evaluates `P` with central differences away from the boundary collar.
pub fn p_function(e: &EigenResult, norm: &MinkowskiNorm) -> PFunction {
    let g = &e.u.grid;
    let u = &e.u.values;
    let p = e.p;
    let h2 = 2.0 * g.h;
    let mut values = vec![0.0; g.len()];
    let mut evaluated = vec![false; g.len()];
    let (mut max, mut argmax, mut max_abs) = (f64::NEG_INFINITY, [0.0, 0.0], 0.0_f64);
    for j in 1..g.ny.saturating_sub(1) {
        for i in 1..g.nx - 1 {
            if !g.is_deep(i, j) {
                continue;
            }
            let k = g.index(i, j);
            let gx = (u[k + 1] - u[k - 1]) / h2;
            let gy = (u[k + g.nx] - u[k - g.nx]) / h2;
            let v = (p - 1.0) * norm.eval2(gx, gy).powf(p) + e.lambda * (u[k].powf(p) - 1.0);
            values[k] = v;
            evaluated[k] = true;
            max_abs = max_abs.max(v.abs());
            if v > max {
                max = v;
                argmax = g.position(i, j);
            }
        }
    }
    PFunction { field: GridField::new(g.clone(), values), evaluated, max, argmax, max_abs }
}

/// `Φ(s) = (π_p/2)^q - φ(s)^q` with `φ(s) = (p-1)^{1/p} ∫_s^1 (1 - τ^p)^{-1/p} dτ`
/// and `q = p/(p-1)`, for an eigenfunction normalized to `max u = 1`.
pub fn phi(p: f64, s: f64) -> Result<f64> {
    let q = conjugate(p);
    let half = pi_p(p)? / 2.0;
    let inner = (p - 1.0).powf(1.0 / p) * arc_tail(p, s.clamp(0.0, 1.0))?;
    Ok(half.powf(q) - inner.powf(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiCheck {
    /// `max_x Φ(u(x)) - q λ^{1/(p-1)} v(x)`, nonpositive in the continuum.
    pub max_violation: f64,
    /// The same maximum divided by `max_x q λ^{1/(p-1)} v(x)`.
    pub relative_violation: f64,
    /// `((p-1)/p)^{p-1} (π_p/2)^p`.
    pub payne_lhs: f64,
    /// `λ M_v^{p-1}`.
    pub payne_rhs: f64,
}

/// Compares `Φ(u)` with `q λ^{1/(p-1)} v` node by node.
pub fn phi_check(e: &EigenResult, t: &TorsionResult) -> Result<PhiCheck> {
    let p = e.p;
    if t.p != p || t.v.grid != e.u.grid {
        return Err(Error::InvalidArgument("eigenfunction and torsion function live on different problems".into()));
    }
    let q = conjugate(p);
    let c = q * e.lambda.powf(1.0 / (p - 1.0));
    let mask = &e.u.grid.mask;
    let gaps: Vec<(f64, f64)> = (0..mask.len())
        .into_par_iter()
        .filter(|&k| mask[k])
        .map(|k| phi(p, e.u.values[k]).map(|f| (f - c * t.v.values[k], c * t.v.values[k])))
        .collect::<Result<_>>()?;
    let max_violation = gaps.iter().map(|g| g.0).fold(f64::NEG_INFINITY, f64::max);
    let scale = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    let half = pi_p(p)? / 2.0;
    Ok(PhiCheck {
        max_violation,
        relative_violation: max_violation / scale,
        payne_lhs: ((p - 1.0) / p).powf(p - 1.0) * half.powf(p),
        payne_rhs: e.lambda * t.max.powf(p - 1.0),
    })
}

/// `E = (∫u^{p-1})^{1/(p-1)} / (|Ω|^{1/(p-1)} max u)`.
pub fn efficiency_ratio(e: &EigenResult, area: f64) -> f64 {
    let p = e.p;
    let integral = e.mesh.integrate(&e.u.values, |x| x.max(0.0).powf(p - 1.0));
    (integral / area).powf(1.0 / (p - 1.0)) / e.u.max()
}

/// `p ∫u^p / (M^p |Ω|)`, at most one for convex domains.
pub fn mass_bound_check(e: &EigenResult, area: f64) -> f64 {
    let p = e.p;
    let integral = e.mesh.integrate(&e.u.values, |x| x.max(0.0).powf(p));
    p * integral / (e.u.max().powf(p) * area)
}
