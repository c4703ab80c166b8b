//! Grid solvers for the first eigenvalue and the torsion problem of the
//! anisotropic p-Laplacian, and the pointwise checks built on them.
//!
//! Both problems are solved variationally on the discrete energy of
//! [`Mesh`]: the torsion function minimizes `E(v)/p - ∫v` and the first
//! eigenfunction minimizes `E(u)/∫|u|^p`.

mod checks;
mod eigen;
mod mesh;
mod multigrid;
mod torsion;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::grid::{Grid, GridField};
use crate::norms::{MinkowskiNorm, NormFamily};

pub use checks::{efficiency_ratio, mass_bound_check, p_function, phi, phi_check, PFunction, PhiCheck};
pub use eigen::{solve_eigen, solve_eigen_on};
pub use mesh::Mesh;
pub use torsion::{solve_torsion, solve_torsion_on};

/// Default relative tolerance of both solvers.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Iteration cap of the eigenvalue descent.
pub const MAX_ITERATIONS: usize = 50_000;

/// First Dirichlet eigenpair.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda: f64,
    /// First eigenfunction, positive inside and normalized to `max u = 1`.
    pub u: GridField,
    pub iterations: usize,
    pub residual: f64,
    pub p: f64,
    pub norm: String,
    pub domain: String,
    pub mesh: Arc<Mesh>,
}

/// Torsion function and its functionals.
#[derive(Debug, Clone)]
pub struct TorsionResult {
    pub v: GridField,
    /// `T = ∫v`.
    pub torsion: f64,
    /// `∫F(∇v)^p`, equal to `T` at the solution.
    pub dual: f64,
    /// `max v`.
    pub max: f64,
    pub iterations: usize,
    pub residual: f64,
    pub p: f64,
    pub norm: String,
    pub domain: String,
    pub mesh: Arc<Mesh>,
}

/// Solver metadata for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    pub iterations: usize,
    pub residual: f64,
    pub h: f64,
}

impl EigenResult {
    pub fn info(&self) -> SolveInfo {
        SolveInfo { iterations: self.iterations, residual: self.residual, h: self.mesh.grid.h }
    }
}

impl TorsionResult {
    pub fn info(&self) -> SolveInfo {
        SolveInfo { iterations: self.iterations, residual: self.residual, h: self.mesh.grid.h }
    }
}

/// Builds the grid and mesh used by both solvers.
pub fn build_mesh(domain: &ConvexPolygon, h: f64) -> Result<Arc<Mesh>> {
    Ok(Arc::new(Mesh::new(domain, Grid::new(domain, h)?)))
}

fn check_args(p: f64, tol: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

/// Whether `F^p` is a quadratic form, making the Euler–Lagrange operator linear.
fn is_quadratic(norm: &MinkowskiNorm, p: f64) -> bool {
    p == 2.0
        && match norm.family() {
            NormFamily::Ellipse { .. } => true,
            NormFamily::Lq { q } => *q == 2.0,
        }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(Σ r_i² / m_i)^{1/2}` over interior nodes, the dual norm of a residual.
fn dual_norm(mesh: &Mesh, r: &[f64]) -> f64 {
    r.iter()
        .zip(&mesh.mass)
        .zip(&mesh.grid.mask)
        .filter(|(_, &inside)| inside)
        .map(|((v, m), _)| v * v / m)
        .sum::<f64>()
        .sqrt()
}
