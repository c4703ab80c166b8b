//! Minkowski norms `F`, their polars `F°`, Wulff shapes and `π_p`.
//!
//! Two families are supported, both with closed-form polars:
//!
//! * `Lq(q)`: `F(ξ) = (Σ|ξ_i|^q)^{1/q}`, polar `Lq(q/(q-1))`;
//! * `Ellipse(A)`: `F(ξ) = sqrt(ξᵀAξ)` for symmetric positive-definite `A`,
//!   polar `Ellipse(A⁻¹)`.
//!
//! Evaluation is dimension-generic; the `*2` methods are the planar hot paths
//! used by the grid solvers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `F°(e_i)F(e_i) = 1` before a norm is reported as misaligned.
pub const ALIGNMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum NormFamily {
    Lq { q: f64 },
    /// Row-major symmetric positive-definite matrix.
    Ellipse { matrix: Vec<f64> },
}

/// A convex, even, 1-homogeneous gauge on `R^N`.
///
/// Serializes as its textual form, e.g. `"lq:4"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MinkowskiNorm {
    family: NormFamily,
    dim: usize,
    /// `A⁻¹` for the ellipse family.
    inverse: Option<Vec<f64>>,
}

impl MinkowskiNorm {
    pub fn lq(q: f64) -> Result<Self> {
        Self::lq_n(q, 2)
    }

    pub fn lq_n(q: f64, dim: usize) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::InvalidArgument(format!("Lq exponent must be > 1, got {q}")));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self {
            family: NormFamily::Lq { q },
            dim,
            inverse: None,
        })
    }

    /// `F(ξ) = sqrt(a11 ξ1² + 2 a12 ξ1 ξ2 + a22 ξ2²)`.
    pub fn ellipse(a11: f64, a12: f64, a22: f64) -> Result<Self> {
        Self::ellipse_n(DMatrix::from_row_slice(2, 2, &[a11, a12, a12, a22]))
    }

    pub fn ellipse_n(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || matrix.ncols() != dim {
            return Err(Error::InvalidArgument("ellipse matrix must be square".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("ellipse matrix has non-finite entries".into()));
        }
        if (&matrix - matrix.transpose()).amax() > 1e-12 * matrix.amax() {
            return Err(Error::InvalidArgument("ellipse matrix must be symmetric".into()));
        }
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidArgument("ellipse matrix must be positive definite".into()))?;
        let inverse = chol.inverse();
        let row_major = |m: &DMatrix<f64>| m.transpose().iter().copied().collect::<Vec<_>>();
        Ok(Self {
            family: NormFamily::Ellipse {
                matrix: row_major(&matrix),
            },
            dim,
            inverse: Some(row_major(&inverse)),
        })
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim);
        match &self.family {
            NormFamily::Lq { q } => lq_eval(*q, xi),
            NormFamily::Ellipse { matrix } => quad_form(matrix, xi).max(0.0).sqrt(),
        }
    }

    /// Gradient `F_ξ(ξ)`; rejects `ξ = 0`.
    pub fn grad(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let f = self.eval(xi);
        if f == 0.0 {
            return Err(Error::InvalidArgument("norm gradient is undefined at the origin".into()));
        }
        Ok(match &self.family {
            NormFamily::Lq { q } => lq_grad(*q, xi, f),
            NormFamily::Ellipse { matrix } => mat_vec(matrix, xi).into_iter().map(|v| v / f).collect(),
        })
    }

    pub fn polar_eval(&self, eta: &[f64]) -> f64 {
        debug_assert_eq!(eta.len(), self.dim);
        match &self.family {
            NormFamily::Lq { q } => lq_eval(conjugate(*q), eta),
            NormFamily::Ellipse { .. } => {
                quad_form(self.inverse.as_ref().expect("ellipse inverse"), eta).max(0.0).sqrt()
            }
        }
    }

    /// Gradient of the polar `F°_ξ(η)`; rejects `η = 0`.
    pub fn polar_grad(&self, eta: &[f64]) -> Result<Vec<f64>> {
        self.polar().grad(eta)
    }

    /// The polar norm as a norm of the same family.
    pub fn polar(&self) -> MinkowskiNorm {
        match &self.family {
            NormFamily::Lq { q } => MinkowskiNorm {
                family: NormFamily::Lq { q: conjugate(*q) },
                dim: self.dim,
                inverse: None,
            },
            NormFamily::Ellipse { matrix } => MinkowskiNorm {
                family: NormFamily::Ellipse {
                    matrix: self.inverse.clone().expect("ellipse inverse"),
                },
                dim: self.dim,
                inverse: Some(matrix.clone()),
            },
        }
    }

    /// Constants `(a, b)` with `a|ξ| ≤ F(ξ) ≤ b|ξ|`.
    pub fn coercivity(&self) -> (f64, f64) {
        match &self.family {
            NormFamily::Lq { q } => {
                // ℓq vs ℓ2 in R^N: the dimension factor sits on the side
                // where q crosses 2.
                let factor = (self.dim as f64).powf(1.0 / q - 0.5);
                if *q >= 2.0 {
                    (factor, 1.0)
                } else {
                    (1.0, factor)
                }
            }
            NormFamily::Ellipse { matrix } => {
                let m = DMatrix::from_row_slice(self.dim, self.dim, matrix);
                let eig = m.symmetric_eigenvalues();
                (eig.min().sqrt(), eig.max().sqrt())
            }
        }
    }

    /// `κ_N = |W|`, the volume of the unit Wulff shape `{F° < 1}`.
    pub fn wulff_volume(&self) -> f64 {
        let n = self.dim as f64;
        match &self.family {
            NormFamily::Lq { q } => {
                let r = conjugate(*q);
                (2.0 * libm::tgamma(1.0 + 1.0 / r)).powf(n) / libm::tgamma(1.0 + n / r)
            }
            NormFamily::Ellipse { matrix } => {
                let det = DMatrix::from_row_slice(self.dim, self.dim, matrix).determinant();
                let unit_ball = PI.powf(n / 2.0) / libm::tgamma(n / 2.0 + 1.0);
                unit_ball * det.sqrt()
            }
        }
    }

    /// `|F°(e_i)F(e_i) - 1|` for the `axis`-th coordinate vector.
    pub fn alignment_defect(&self, axis: usize) -> f64 {
        let mut e = vec![0.0; self.dim];
        e[axis] = 1.0;
        (self.polar_eval(&e) * self.eval(&e) - 1.0).abs()
    }

    /// Whether `F°(e_i)F(e_i) = 1` holds on every axis. Logs a warning when it
    /// does not, since the slab-limit formulas rely on it.
    pub fn check_axis_alignment(&self) -> bool {
        let worst = (0..self.dim).map(|i| self.alignment_defect(i)).fold(0.0, f64::max);
        if worst > ALIGNMENT_TOLERANCE {
            log::warn!("norm {self} is not axis aligned: |F°(e)F(e) - 1| = {worst:.3e}");
            false
        } else {
            true
        }
    }

    #[inline]
    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        match &self.family {
            NormFamily::Lq { q } => lq_eval2(*q, x, y),
            NormFamily::Ellipse { matrix } => {
                (matrix[0] * x * x + 2.0 * matrix[1] * x * y + matrix[3] * y * y).max(0.0).sqrt()
            }
        }
    }

    #[inline]
    pub fn polar_eval2(&self, x: f64, y: f64) -> f64 {
        match &self.family {
            NormFamily::Lq { q } => lq_eval2(conjugate(*q), x, y),
            NormFamily::Ellipse { .. } => {
                let m = self.inverse.as_ref().expect("ellipse inverse");
                (m[0] * x * x + 2.0 * m[1] * x * y + m[3] * y * y).max(0.0).sqrt()
            }
        }
    }

    /// Value and gradient of `F` at a nonzero planar vector.
    #[inline]
    pub fn eval_grad2(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        match &self.family {
            NormFamily::Lq { q } => {
                let f = lq_eval2(*q, x, y);
                if f == 0.0 {
                    return (0.0, [0.0, 0.0]);
                }
                (f, [lq_component(*q, x / f), lq_component(*q, y / f)])
            }
            NormFamily::Ellipse { matrix } => {
                let ax = matrix[0] * x + matrix[1] * y;
                let ay = matrix[1] * x + matrix[3] * y;
                let f = (x * ax + y * ay).max(0.0).sqrt();
                if f == 0.0 {
                    return (0.0, [0.0, 0.0]);
                }
                (f, [ax / f, ay / f])
            }
        }
    }

    /// Value, gradient and Hessian of `F` at a nonzero planar vector.
    ///
    /// For `Lq` with `q < 2` the Hessian is unbounded on the axes; the
    /// singular factor is smoothed at relative scale `1e-6`.
    pub fn eval_grad_hess2(&self, x: f64, y: f64) -> (f64, [f64; 2], [f64; 3]) {
        let (f, g) = self.eval_grad2(x, y);
        if f == 0.0 {
            return (0.0, g, [0.0; 3]);
        }
        // Hessian stored as [hxx, hxy, hyy].
        let h = match &self.family {
            NormFamily::Lq { q } => {
                let sx = smoothed_ratio(x / f, *q);
                let sy = smoothed_ratio(y / f, *q);
                let c = (q - 1.0) / f;
                [c * (sx - g[0] * g[0]), -c * g[0] * g[1], c * (sy - g[1] * g[1])]
            }
            NormFamily::Ellipse { matrix } => [
                (matrix[0] - g[0] * g[0]) / f,
                (matrix[1] - g[0] * g[1]) / f,
                (matrix[3] - g[1] * g[1]) / f,
            ],
        };
        (f, g, h)
    }

    /// A symmetric positive-definite 2×2 metric `[bxx, bxy, byy]` with
    /// `F(ξ)² ≈ ξᵀBξ`, exact for the ellipse family.
    pub fn metric2(&self) -> [f64; 3] {
        match &self.family {
            NormFamily::Lq { .. } => {
                let (a, b) = self.coercivity();
                let s = a * b;
                [s, 0.0, s]
            }
            NormFamily::Ellipse { matrix } => [matrix[0], matrix[1], matrix[3]],
        }
    }
}

impl fmt::Display for MinkowskiNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            NormFamily::Lq { q } if self.dim == 2 => write!(f, "lq:{q}"),
            NormFamily::Lq { q } => write!(f, "lq{}:{q}", self.dim),
            NormFamily::Ellipse { matrix } if self.dim == 2 => {
                write!(f, "ellipse:{},{},{}", matrix[0], matrix[1], matrix[3])
            }
            NormFamily::Ellipse { matrix } => {
                let entries: Vec<String> = matrix.iter().map(|v| v.to_string()).collect();
                write!(f, "ellipse{}:{}", self.dim, entries.join(","))
            }
        }
    }
}

/// Parses `lq:<q>` or `ellipse:<a11>,<a12>,<a22>`.
impl FromStr for MinkowskiNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::parse("norm", s, "expected `lq:<q>` or `ellipse:<a11>,<a12>,<a22>`"))?;
        let numbers = parse_numbers(args).map_err(|r| Error::parse("norm", s, r))?;
        let norm = match (kind.trim(), numbers.as_slice()) {
            ("lq", [q]) => MinkowskiNorm::lq(*q),
            ("ellipse", [a11, a12, a22]) => MinkowskiNorm::ellipse(*a11, *a12, *a22),
            ("lq", _) => return Err(Error::parse("norm", s, "lq takes exactly one exponent")),
            ("ellipse", _) => return Err(Error::parse("norm", s, "ellipse takes three entries")),
            (other, _) => return Err(Error::parse("norm", s, format!("unknown norm family `{other}`"))),
        };
        norm.map_err(|e| Error::parse("norm", s, e.to_string()))
    }
}

impl TryFrom<String> for MinkowskiNorm {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MinkowskiNorm> for String {
    fn from(n: MinkowskiNorm) -> String {
        n.to_string()
    }
}

pub(crate) fn parse_numbers(args: &str) -> std::result::Result<Vec<f64>, String> {
    args.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
                .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("`{t}` is not finite")) })
        })
        .collect()
}

/// The generalized `π_p = 2π (p-1)^{1/p} / (p sin(π/p))`.
///
/// Symmetric under `p ↔ p/(p-1)`; `π_2 = π`.
pub fn pi_p(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidArgument(format!("π_p needs p > 1, got {p}")));
    }
    Ok(2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin()))
}

/// Hölder conjugate `q/(q-1)`.
#[inline]
pub fn conjugate(q: f64) -> f64 {
    q / (q - 1.0)
}

/// Polygonal sample of the Wulff shape `W_r(center) = {x : F°(x - center) < r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WulffPolygon {
    pub vertices: Vec<[f64; 2]>,
    pub radius: f64,
    pub center: [f64; 2],
}

impl WulffPolygon {
    /// Vertices along the directions `θ_i = 2πi/n`, scaled onto `F°(x - c) = r`.
    pub fn new(norm: &MinkowskiNorm, radius: f64, center: [f64; 2], n: usize) -> Result<Self> {
        if norm.dim() != 2 {
            return Err(Error::InvalidArgument("Wulff polygons are planar".into()));
        }
        if n < 16 {
            return Err(Error::InvalidArgument(format!("Wulff polygon needs n >= 16, got {n}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("Wulff radius must be positive, got {radius}")));
        }
        let vertices = (0..n)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / n as f64;
                let (s, c) = theta.sin_cos();
                let scale = radius / norm.polar_eval2(c, s);
                [center[0] + scale * c, center[1] + scale * s]
            })
            .collect();
        Ok(Self { vertices, radius, center })
    }

    pub fn area(&self) -> f64 {
        crate::geometry::shoelace(&self.vertices)
    }
}

fn lq_eval(q: f64, xi: &[f64]) -> f64 {
    let m = xi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if q == 2.0 {
        return m * xi.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt();
    }
    m * xi.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
}

fn lq_grad(q: f64, xi: &[f64], f: f64) -> Vec<f64> {
    xi.iter().map(|v| lq_component(q, v / f)).collect()
}

#[inline]
fn lq_eval2(q: f64, x: f64, y: f64) -> f64 {
    if q == 2.0 {
        return x.hypot(y);
    }
    let (ax, ay) = (x.abs(), y.abs());
    let m = ax.max(ay);
    if m == 0.0 {
        return 0.0;
    }
    let (rx, ry) = (ax / m, ay / m);
    if q == 4.0 {
        let (x2, y2) = (rx * rx, ry * ry);
        return m * (x2 * x2 + y2 * y2).sqrt().sqrt();
    }
    m * (rx.powf(q) + ry.powf(q)).powf(1.0 / q)
}

/// `sign(t)|t|^{q-1}` for `t = ξ_i / F(ξ)`.
#[inline]
fn lq_component(q: f64, t: f64) -> f64 {
    if q == 2.0 {
        t
    } else if q == 4.0 {
        t * t * t
    } else {
        t.signum() * t.abs().powf(q - 1.0)
    }
}

/// `|t|^{q-2}`, smoothed near `t = 0` when `q < 2`.
#[inline]
fn smoothed_ratio(t: f64, q: f64) -> f64 {
    if q == 2.0 {
        1.0
    } else if q == 4.0 {
        t * t
    } else if q > 2.0 {
        t.abs().powf(q - 2.0)
    } else {
        (t * t + 1e-12).sqrt().powf(q - 2.0)
    }
}

fn mat_vec(matrix: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| matrix[i * n + j] * x[j]).sum())
        .collect()
}

fn quad_form(matrix: &[f64], x: &[f64]) -> f64 {
    mat_vec(matrix, x).iter().zip(x).map(|(a, b)| a * b).sum()
}
