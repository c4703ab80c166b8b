//! Nine-point operators on node grids, a Galerkin multigrid V-cycle and
//! preconditioned conjugate gradients.

use nalgebra::{DMatrix, DVector};

/// Active unknowns at or below which the coarsest level is solved directly.
const DIRECT_LIMIT: usize = 600;

/// A symmetric operator coupling each node to its eight neighbours.
///
/// Entry `a[n][k]` couples node `n` to `n + offset(k)` with
/// `k = 3 (dj + 1) + (di + 1)`. Inactive rows are the identity.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub nx: usize,
    pub ny: usize,
    pub a: Vec<[f64; 9]>,
    pub active: Vec<bool>,
}

impl Stencil {
    pub fn zeros(nx: usize, ny: usize, active: Vec<bool>) -> Self {
        Self { nx, ny, a: vec![[0.0; 9]; nx * ny], active }
    }

    #[inline]
    fn offsets(nx: usize) -> [isize; 9] {
        let n = nx as isize;
        [-n - 1, -n, -n + 1, -1, 0, 1, n - 1, n, n + 1]
    }

    /// Adds `v` to the coupling of `row` with `col`, two grid neighbours.
    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let d = col as isize - row as isize;
        let n = self.nx as isize;
        let dj = if d >= n - 1 { 1 } else if d <= 1 - n { -1 } else { 0 };
        let di = d - dj * n;
        self.a[row][(3 * (dj + 1) + di + 1) as usize] += v;
    }

    /// Drops couplings to inactive nodes and makes inactive rows the identity.
    pub fn finish(&mut self) {
        let off = Self::offsets(self.nx);
        for n in 0..self.a.len() {
            if !self.active[n] {
                self.a[n] = [0.0; 9];
                self.a[n][4] = 1.0;
                continue;
            }
            for (k, &o) in off.iter().enumerate() {
                if k != 4 && !self.active[(n as isize + o) as usize] {
                    self.a[n][k] = 0.0;
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let off = Self::offsets(self.nx);
        for n in 0..self.a.len() {
            if !self.active[n] {
                y[n] = x[n];
                continue;
            }
            let row = &self.a[n];
            let mut s = 0.0;
            for k in 0..9 {
                s += row[k] * x[(n as isize + off[k]) as usize];
            }
            y[n] = s;
        }
    }

    fn sweep(&self, b: &[f64], x: &mut [f64], forward: bool) {
        let off = Self::offsets(self.nx);
        let mut relax = |n: usize| {
            if !self.active[n] {
                return;
            }
            let row = &self.a[n];
            let mut s = b[n];
            for k in 0..9 {
                if k != 4 {
                    s -= row[k] * x[(n as isize + off[k]) as usize];
                }
            }
            x[n] = s / row[4];
        };
        if forward {
            (0..self.a.len()).for_each(&mut relax);
        } else {
            (0..self.a.len()).rev().for_each(&mut relax);
        }
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Coarse index and weight pairs for the bilinear prolongation of a fine
/// index along one axis.
#[inline]
fn parents(i: usize, nc: usize) -> ([(usize, f64); 2], usize) {
    if i % 2 == 0 {
        ([(i / 2, 1.0), (0, 0.0)], 1)
    } else if i / 2 + 1 < nc {
        ([(i / 2, 0.5), (i / 2 + 1, 0.5)], 2)
    } else {
        ([(i / 2, 0.5), (0, 0.0)], 1)
    }
}

struct Level {
    op: Stencil,
    /// Coarse grid dimensions of the next level.
    ncx: usize,
    ncy: usize,
}

enum Coarsest {
    Direct { index: Vec<usize>, factor: nalgebra::Cholesky<f64, nalgebra::Dyn> },
    Smoother(Stencil),
}

/// Geometric multigrid with Galerkin coarse operators `Pᵀ A P`.
pub(crate) struct Multigrid {
    levels: Vec<Level>,
    coarsest: Coarsest,
}

impl Multigrid {
    pub fn new(op: Stencil) -> Self {
        let mut levels = Vec::new();
        let mut op = op;
        loop {
            let small = op.active_count() <= DIRECT_LIMIT || op.nx < 5 || op.ny < 5;
            if small {
                break;
            }
            let (ncx, ncy) = ((op.nx - 1) / 2 + 1, (op.ny - 1) / 2 + 1);
            let coarse = galerkin(&op, ncx, ncy);
            levels.push(Level { op, ncx, ncy });
            op = coarse;
        }
        let coarsest = direct(&op).unwrap_or(Coarsest::Smoother(op));
        Self { levels, coarsest }
    }

    /// One V(2,2) cycle from a zero initial guess: `z ≈ A⁻¹ r`.
    pub fn vcycle(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        if l == self.levels.len() {
            match &self.coarsest {
                Coarsest::Direct { index, factor } => {
                    let rhs = DVector::from_iterator(index.len(), index.iter().map(|&k| b[k]));
                    let sol = factor.solve(&rhs);
                    for (&k, v) in index.iter().zip(sol.iter()) {
                        x[k] = *v;
                    }
                }
                Coarsest::Smoother(op) => {
                    for _ in 0..50 {
                        op.sweep(b, x, true);
                        op.sweep(b, x, false);
                    }
                }
            }
            return;
        }
        let level = &self.levels[l];
        let op = &level.op;
        op.sweep(b, x, true);
        op.sweep(b, x, true);
        let mut r = vec![0.0; b.len()];
        op.apply(x, &mut r);
        for n in 0..r.len() {
            r[n] = if op.active[n] { b[n] - r[n] } else { 0.0 };
        }
        let (nx, ncx, ncy) = (op.nx, level.ncx, level.ncy);
        let mut rc = vec![0.0; ncx * ncy];
        for j in 0..op.ny {
            let (pj, cj) = parents(j, ncy);
            for i in 0..nx {
                let v = r[j * nx + i];
                if v == 0.0 {
                    continue;
                }
                let (pi, ci) = parents(i, ncx);
                for &(jc, wj) in &pj[..cj] {
                    for &(ic, wi) in &pi[..ci] {
                        rc[jc * ncx + ic] += wi * wj * v;
                    }
                }
            }
        }
        let mut xc = vec![0.0; ncx * ncy];
        self.cycle(l + 1, &rc, &mut xc);
        for j in 0..op.ny {
            let (pj, cj) = parents(j, ncy);
            for i in 0..nx {
                let n = j * nx + i;
                if !op.active[n] {
                    continue;
                }
                let (pi, ci) = parents(i, ncx);
                let mut s = 0.0;
                for &(jc, wj) in &pj[..cj] {
                    for &(ic, wi) in &pi[..ci] {
                        s += wi * wj * xc[jc * ncx + ic];
                    }
                }
                x[n] += s;
            }
        }
        op.sweep(b, x, false);
        op.sweep(b, x, false);
    }

    #[cfg(test)]
    pub fn depth(&self) -> usize {
        self.levels.len() + 1
    }
}

fn direct(op: &Stencil) -> Option<Coarsest> {
    let index: Vec<usize> = (0..op.a.len()).filter(|&n| op.active[n]).collect();
    if index.len() > 4 * DIRECT_LIMIT {
        return None;
    }
    let mut pos = vec![usize::MAX; op.a.len()];
    for (r, &n) in index.iter().enumerate() {
        pos[n] = r;
    }
    let off = Stencil::offsets(op.nx);
    let mut m: DMatrix<f64> = DMatrix::zeros(index.len(), index.len());
    for (r, &n) in index.iter().enumerate() {
        for k in 0..9 {
            let c = (n as isize + off[k]) as usize;
            if op.active[c] {
                m[(r, pos[c])] += op.a[n][k];
            }
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    let factor = m.cholesky()?;
    Some(Coarsest::Direct { index, factor })
}

/// `Pᵀ A P` restricted to the active fine nodes.
fn galerkin(op: &Stencil, ncx: usize, ncy: usize) -> Stencil {
    let (nx, ny) = (op.nx, op.ny);
    let off = Stencil::offsets(nx);
    let mut coarse = Stencil::zeros(ncx, ncy, vec![true; ncx * ncy]);
    for j in 0..ny {
        let (pj, cj) = parents(j, ncy);
        for i in 0..nx {
            let n = j * nx + i;
            if !op.active[n] {
                continue;
            }
            let (pi, ci) = parents(i, ncx);
            for k in 0..9 {
                let v = op.a[n][k];
                if v == 0.0 {
                    continue;
                }
                let m = (n as isize + off[k]) as usize;
                if !op.active[m] {
                    continue;
                }
                let (mi, mj) = (m % nx, m / nx);
                let (qj, dj) = parents(mj, ncy);
                let (qi, di) = parents(mi, ncx);
                for &(rj, wrj) in &pj[..cj] {
                    for &(ri, wri) in &pi[..ci] {
                        let row = rj * ncx + ri;
                        let wr = wri * wrj * v;
                        for &(cjj, wcj) in &qj[..dj] {
                            for &(cii, wci) in &qi[..di] {
                                coarse.add(row, cjj * ncx + cii, wr * wci * wcj);
                            }
                        }
                    }
                }
            }
        }
    }
    let scale = coarse.a.iter().map(|r| r[4].abs()).fold(0.0, f64::max);
    for n in 0..coarse.a.len() {
        let (i, j) = (n % ncx, n / ncx);
        let frame = i == 0 || j == 0 || i + 1 == ncx || j + 1 == ncy;
        coarse.active[n] = !frame && coarse.a[n][4] > 1e-12 * scale;
    }
    coarse.finish();
    coarse
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` by CG preconditioned with one V-cycle per iteration,
/// starting from the given `x`.
pub(crate) fn pcg(op: &Stencil, mg: &Multigrid, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> CgOutcome {
    let n = b.len();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for k in 0..n {
        r[k] = if op.active[k] { b[k] - r[k] } else { 0.0 };
    }
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z = vec![0.0; n];
    mg.vcycle(&r, &mut z);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while it < max_iter && rel > rtol {
        op.apply(&d, &mut q);
        for k in 0..n {
            if !op.active[k] {
                q[k] = 0.0;
            }
        }
        let dq = dot(&d, &q);
        if dq <= 0.0 {
            break;
        }
        let alpha = rz / dq;
        for k in 0..n {
            x[k] += alpha * d[k];
            r[k] -= alpha * q[k];
        }
        it += 1;
        rel = dot(&r, &r).sqrt() / bnorm;
        mg.vcycle(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            d[k] = z[k] + beta * d[k];
        }
    }
    CgOutcome { iterations: it, relative_residual: rel }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(nx: usize, ny: usize) -> Stencil {
        let active = (0..nx * ny).map(|n| {
            let (i, j) = (n % nx, n / nx);
            i > 0 && j > 0 && i + 1 < nx && j + 1 < ny
        });
        let mut op = Stencil::zeros(nx, ny, active.collect());
        for n in 0..nx * ny {
            op.a[n] = [0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0];
        }
        op.finish();
        op
    }

    #[test]
    fn add_maps_neighbour_offsets() {
        let mut op = Stencil::zeros(5, 5, vec![true; 25]);
        let c = 12;
        for (k, d) in [-6isize, -5, -4, -1, 0, 1, 4, 5, 6].iter().enumerate() {
            op.add(c, (c as isize + d) as usize, k as f64 + 1.0);
        }
        assert_eq!(op.a[c], [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn galerkin_of_constant_free_operator_stays_symmetric() {
        let op = laplacian(33, 17);
        let coarse = galerkin(&op, 17, 9);
        let off = Stencil::offsets(17);
        for n in 0..coarse.a.len() {
            for k in 0..9 {
                if !coarse.active[n] || k == 4 {
                    continue;
                }
                let m = (n as isize + off[k]) as usize;
                if coarse.active[m] {
                    assert!((coarse.a[n][k] - coarse.a[m][8 - k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pcg_solves_poisson_in_few_iterations() {
        for (nx, ny) in [(65, 65), (33, 257), (66, 41)] {
            let op = laplacian(nx, ny);
            let mg = Multigrid::new(op.clone());
            let b: Vec<f64> = (0..nx * ny).map(|n| if op.active[n] { 1.0 } else { 0.0 }).collect();
            let mut x = vec![0.0; nx * ny];
            let out = pcg(&op, &mg, &b, &mut x, 1e-10, 100);
            assert!(out.relative_residual <= 1e-10, "{nx}x{ny}: {out:?}");
            assert!(out.iterations <= 12, "{nx}x{ny}: {out:?}");
        }
    }

    #[test]
    fn direct_coarse_solve_is_exact() {
        let op = laplacian(9, 9);
        let mg = Multigrid::new(op.clone());
        assert_eq!(mg.depth(), 1);
        let b: Vec<f64> = (0..81).map(|n| if op.active[n] { (n % 7) as f64 } else { 0.0 }).collect();
        let mut x = vec![0.0; 81];
        mg.vcycle(&b, &mut x);
        let mut ax = vec![0.0; 81];
        op.apply(&x, &mut ax);
        for n in 0..81 {
            if op.active[n] {
                assert!((ax[n] - b[n]).abs() < 1e-10);
            }
        }
    }
}
