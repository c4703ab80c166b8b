use rayon::prelude::*;

use super::{ConvexPolygon, Edge};
use crate::error::Result;
use crate::grid::{Grid, GridField};
use crate::norms::MinkowskiNorm;

/// The anisotropic distance `d_F(x) = min_{y ∈ ∂Ω} F°(x - y)` sampled on a grid.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub field: GridField,
    /// Exact `sup d_F` over the domain.
    pub inradius: f64,
    /// A point where the exact supremum is attained.
    pub center: [f64; 2],
    /// Largest sampled value and where it sits.
    pub grid_max: f64,
    pub argmax: [f64; 2],
    /// Nodes where two edges are within `2h` of being closest.
    pub ridge: Vec<bool>,
}

impl DistanceField {
    pub fn compute(domain: &ConvexPolygon, norm: &MinkowskiNorm, h: f64) -> Result<Self> {
        let grid = Grid::new(domain, h)?;
        let edges: Vec<Edge> = domain.edges().collect();
        let support: Vec<f64> = edges.iter().map(|e| norm.eval2(e.normal[0], e.normal[1])).collect();
        let band = 2.0 * h;
        let (nx, ny) = (grid.nx, grid.ny);
        let rows: Vec<Vec<(f64, bool)>> = (0..ny)
            .into_par_iter()
            .map(|j| {
                (0..nx)
                    .map(|i| {
                        if !grid.mask[grid.index(i, j)] {
                            return (0.0, false);
                        }
                        let x = grid.position(i, j);
                        let (mut best, mut second) = (f64::INFINITY, f64::INFINITY);
                        for (e, &fs) in edges.iter().zip(&support) {
                            // The supporting line bounds the segment distance from below.
                            let line = (e.offset - (e.normal[0] * x[0] + e.normal[1] * x[1])) / fs;
                            if line >= second.min(best + band) {
                                continue;
                            }
                            let d = segment_distance(norm, e, x);
                            if d < best {
                                second = best;
                                best = d;
                            } else if d < second {
                                second = d;
                            }
                        }
                        (best, second - best < band)
                    })
                    .collect()
            })
            .collect();
        let (mut values, mut ridge) = (Vec::with_capacity(nx * ny), Vec::with_capacity(nx * ny));
        for row in rows {
            for (v, r) in row {
                values.push(v);
                ridge.push(r);
            }
        }
        let field = GridField::new(grid, values);
        let (argmax, grid_max) = field.argmax();
        let (inradius, center) = domain.inradius(norm);
        Ok(Self { field, inradius, center, grid_max, argmax, ridge })
    }

    pub fn grid(&self) -> &Grid {
        &self.field.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.field.values
    }
}

impl ConvexPolygon {
    /// `d_F(x)` for a point `x` inside the domain.
    pub fn distance_f(&self, norm: &MinkowskiNorm, x: [f64; 2]) -> f64 {
        self.edges().map(|e| segment_distance(norm, &e, x)).fold(f64::INFINITY, f64::min)
    }
}

/// `min_{y ∈ [start, end]} F°(x - y)` for `x` on the inner side of the edge.
///
/// Over the whole supporting line the minimum is `δ/F(n)` with `δ` the
/// Euclidean gap, attained at `y = x + (δ/F(n)) ∇F(n)`. The restriction to the
/// segment is convex in the arclength parameter, so when that foot falls
/// outside the segment the nearer endpoint is optimal.
fn segment_distance(norm: &MinkowskiNorm, e: &Edge, x: [f64; 2]) -> f64 {
    let delta = e.offset - (e.normal[0] * x[0] + e.normal[1] * x[1]);
    let (fn_, g) = norm.eval_grad2(e.normal[0], e.normal[1]);
    let s = delta / fn_;
    let foot = [x[0] + s * g[0], x[1] + s * g[1]];
    let d = [e.end[0] - e.start[0], e.end[1] - e.start[1]];
    let t = ((foot[0] - e.start[0]) * d[0] + (foot[1] - e.start[1]) * d[1]) / (e.length * e.length);
    if (0.0..=1.0).contains(&t) {
        return s.max(0.0);
    }
    let y = if t < 0.0 { e.start } else { e.end };
    norm.polar_eval2(x[0] - y[0], x[1] - y[1])
}
