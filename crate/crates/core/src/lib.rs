//! Anisotropic p-Laplacian spectral geometry on planar convex domains.
//!
//! The crate computes first Dirichlet eigenvalues and torsion functions of
//! `-div(F^{p-1}(∇u) F_ξ(∇u))` for Minkowski norms `F`, the anisotropic
//! geometric functionals that bound them (perimeter, inradius, Cheeger
//! constant, Wulff shapes), and evaluates the inequalities linking the two.
//!
//! Module map:
//!
//! * [`norms`]: Minkowski norms, polars, Wulff polygons and `π_p`.
//! * [`geometry`]: convex polygons, anisotropic perimeter, erosion and
//!   rolling bodies, plus the anisotropic distance field.
//! * [`grid`]: uniform node grids and nodal fields.
//! * [`pde`]: finite-element style grid solvers for the eigenvalue and
//!   torsion problems and the derived pointwise checks.
//! * [`cheeger`]: Cheeger bounds and the rolling-Wulff estimate.
//! * [`harness`]: case catalogs, inequality reports, slab sweeps and
//!   convergence studies.

pub mod cheeger;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod norms;
pub mod pde;
pub mod quad;

pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, DistanceField, DomainSpec};
pub use grid::{Grid, GridField};
pub use norms::{pi_p, MinkowskiNorm, WulffPolygon};
