//! Uniform node grids over a convex domain and fields living on them.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;

/// Interior nodes required along the widest row and the widest column.
pub const MIN_NODES_PER_AXIS: usize = 32;

/// A square-celled node grid covering the bounding box of a domain.
///
/// The grid is centred on the bounding box and has an even number of cells
/// along each axis, so the box centre is a node. `mask[k]` marks nodes strictly
/// inside the domain; the rest carry the Dirichlet condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
}

impl Grid {
    pub fn new(domain: &ConvexPolygon, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        let (lo, hi) = domain.bbox();
        let cells = |extent: f64| -> usize {
            let n = (extent / h * (1.0 - 1e-12)).ceil().max(2.0) as usize;
            n + n % 2
        };
        let (cx, cy) = (cells(hi[0] - lo[0]), cells(hi[1] - lo[1]));
        if (cx + 1).saturating_mul(cy + 1) > 50_000_000 {
            return Err(Error::InvalidArgument(format!("grid spacing {h} gives more than 5e7 nodes")));
        }
        let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let origin = [center[0] - 0.5 * cx as f64 * h, center[1] - 0.5 * cy as f64 * h];
        let (nx, ny) = (cx + 1, cy + 1);
        let edges: Vec<_> = domain.edges().collect();
        let margin = 1e-6 * h;
        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
                mask[j * nx + i] = edges
                    .iter()
                    .all(|e| e.offset - (e.normal[0] * p[0] + e.normal[1] * p[1]) > margin);
            }
        }
        let grid = Self { origin, h, nx, ny, mask };
        let (rows, cols) = grid.widest_runs();
        if rows < MIN_NODES_PER_AXIS || cols < MIN_NODES_PER_AXIS {
            return Err(Error::GridTooCoarse {
                h,
                detail: format!(
                    "{rows} interior nodes across x and {cols} across y, need at least {MIN_NODES_PER_AXIS}"
                ),
            });
        }
        Ok(grid)
    }

    /// Default spacing: at least 128 cells across the diameter and 64 across
    /// the narrower side of the bounding box, adjusted so that side is a whole
    /// even number of cells.
    pub fn default_spacing(domain: &ConvexPolygon) -> f64 {
        let (lo, hi) = domain.bbox();
        let side = (hi[0] - lo[0]).min(hi[1] - lo[1]);
        let h0 = (domain.diameter() / 128.0).min(side / 64.0);
        let mut n = (side / h0 - 1e-9).ceil() as usize;
        n += n % 2;
        side / n as f64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Largest number of interior nodes in a single row and in a single column.
    pub fn widest_runs(&self) -> (usize, usize) {
        let row = (0..self.ny)
            .map(|j| (0..self.nx).filter(|&i| self.mask[self.index(i, j)]).count())
            .max()
            .unwrap_or(0);
        let col = (0..self.nx)
            .map(|i| (0..self.ny).filter(|&j| self.mask[self.index(i, j)]).count())
            .max()
            .unwrap_or(0);
        (row, col)
    }

    /// Whether node `(i, j)` and its eight neighbours are all interior.
    pub fn is_deep(&self, i: usize, j: usize) -> bool {
        if i == 0 || j == 0 || i + 1 >= self.nx || j + 1 >= self.ny {
            return false;
        }
        (j - 1..=j + 1).all(|jj| (i - 1..=i + 1).all(|ii| self.mask[self.index(ii, jj)]))
    }
}

/// A nodal field on a [`Grid`]; values off the mask are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

#[derive(Serialize)]
struct CsvRow {
    x: f64,
    y: f64,
    value: f64,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Position and value of the largest entry.
    pub fn argmax(&self) -> ([f64; 2], f64) {
        let (k, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
        (self.grid.position(k % self.grid.nx, k / self.grid.nx), v)
    }

    /// Writes every node as `x,y,value`, row by row.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let [x, y] = self.grid.position(i, j);
                w.serialize(CsvRow { x, y, value: self.values[self.grid.index(i, j)] })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_layout() {
        let sq = ConvexPolygon::rectangle(1.0, 1.0).unwrap();
        let g = Grid::new(&sq, 1.0 / 32.0).unwrap();
        assert_eq!((g.nx, g.ny), (65, 65));
        assert_eq!(g.position(32, 32), [0.0, 0.0]);
        assert_eq!(g.interior_count(), 63 * 63);
        assert!(g.is_deep(32, 32) && !g.is_deep(1, 32));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let sq = ConvexPolygon::rectangle(1.0, 1.0).unwrap();
        assert!(matches!(Grid::new(&sq, 0.1), Err(Error::GridTooCoarse { .. })));
        assert!(Grid::new(&sq, -1.0).is_err());
    }

    #[test]
    fn default_spacing_resolves_catalog_shapes() {
        for shape in [
            ConvexPolygon::rectangle(1.0, 1.0).unwrap(),
            ConvexPolygon::rectangle(1.0, 4.0).unwrap(),
            ConvexPolygon::regular(6, 1.0).unwrap(),
        ] {
            let h = Grid::default_spacing(&shape);
            assert!(Grid::new(&shape, h).is_ok());
        }
        let h = Grid::default_spacing(&ConvexPolygon::rectangle(1.0, 4.0).unwrap());
        assert!((2.0 / h - (2.0 / h).round()).abs() < 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let sq = ConvexPolygon::rectangle(1.0, 1.0).unwrap();
        let g = Grid::new(&sq, 1.0 / 32.0).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|k| k as f64).collect();
        let field = GridField::new(g, values);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        field.write_csv(&path).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["x", "y", "value"]);
        assert_eq!(r.records().count(), field.values.len());
    }
}
