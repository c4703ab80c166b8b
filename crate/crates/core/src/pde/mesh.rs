//! The discrete energy `Σ_T w_T F(∇_T u)^p` on a grid.
//!
//! Every active cell carries its four corner triangles, each with half the
//! triangle area as weight, so both diagonal splittings are averaged. On a
//! full cell the four triangle gradients are the four combinations of the
//! forward/backward differences along the cell edges; for `F = |·|` and
//! `p = 2` the energy reduces to the five-point Laplacian.
//!
//! Exterior corners of cells touching interior nodes are moved to their
//! nearest boundary point, so the mesh fits `∂Ω` instead of a staircase.

use crate::geometry::ConvexPolygon;
use crate::grid::Grid;
use crate::norms::MinkowskiNorm;

use super::multigrid::Stencil;

/// A triangle with nodal gradient coefficients: `∇u = Σ_a g[a] u[nodes[a]]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tri {
    pub nodes: [usize; 3],
    pub g: [[f64; 2]; 3],
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub grid: Grid,
    /// Actual node positions; exterior nodes next to the domain sit on `∂Ω`.
    pub pos: Vec<[f64; 2]>,
    /// Lumped mass, `m_i = Σ_{T ∋ i} w_T / 3`.
    pub mass: Vec<f64>,
    /// Total weight, the discrete area of the domain.
    pub area: f64,
    regular: Vec<usize>,
    cut: Vec<Tri>,
}

/// The four corner triangles of a cell as index triples into
/// `[bottom-left, bottom-right, top-left, top-right]`, counter-clockwise.
const CORNER_TRIANGLES: [[usize; 3]; 4] = [[0, 1, 2], [1, 3, 2], [0, 1, 3], [0, 3, 2]];

impl Mesh {
    pub fn new(domain: &ConvexPolygon, grid: Grid) -> Self {
        let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
        let mut pos: Vec<[f64; 2]> = (0..nx * ny).map(|k| grid.position(k % nx, k / nx)).collect();
        let corners = |i: usize, j: usize| {
            let b = j * nx + i;
            [b, b + 1, b + nx, b + nx + 1]
        };
        let active = |c: &[usize; 4]| c.iter().any(|&k| grid.mask[k]);

        let mut snapped = vec![false; nx * ny];
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let c = corners(i, j);
                if !active(&c) {
                    continue;
                }
                for &k in &c {
                    if !grid.mask[k] && !snapped[k] {
                        snapped[k] = true;
                        let p = domain.closest_boundary_point(pos[k]);
                        if (p[0] - pos[k][0]).hypot(p[1] - pos[k][1]) > 1e-9 * h {
                            pos[k] = p;
                        }
                    }
                }
            }
        }

        let mut mass = vec![0.0; nx * ny];
        let mut area = 0.0;
        let mut regular = Vec::new();
        let mut cut = Vec::new();
        let moved = |k: usize| {
            let g = grid.position(k % nx, k / nx);
            pos[k] != g
        };
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let c = corners(i, j);
                if !active(&c) {
                    continue;
                }
                if !c.iter().any(|&k| moved(k)) {
                    regular.push(c[0]);
                    area += h * h;
                    for &k in &c {
                        mass[k] += 0.25 * h * h;
                    }
                    continue;
                }
                for t in CORNER_TRIANGLES {
                    let nodes = [c[t[0]], c[t[1]], c[t[2]]];
                    let Some(tri) = triangle(nodes, &pos) else { continue };
                    if tri.w <= 1e-10 * h * h {
                        continue;
                    }
                    area += tri.w;
                    for &k in &nodes {
                        mass[k] += tri.w / 3.0;
                    }
                    if nodes.iter().any(|&k| grid.mask[k]) {
                        cut.push(tri);
                    }
                }
            }
        }
        for (m, &inside) in mass.iter_mut().zip(&grid.mask) {
            if !inside {
                *m = 0.0;
            }
        }
        Self { grid, pos, mass, area, regular, cut }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// Calls `f` on every triangle carrying an interior node.
    #[inline]
    pub(crate) fn for_each_tri(&self, mut f: impl FnMut(&Tri)) {
        let (nx, h) = (self.grid.nx, self.grid.h);
        let (ih, w) = (1.0 / h, 0.25 * h * h);
        for &b in &self.regular {
            let c = [b, b + 1, b + nx, b + nx + 1];
            // Gradients: bottom/top x-differences against left/right y-differences.
            f(&Tri { nodes: [c[0], c[1], c[2]], g: [[-ih, -ih], [ih, 0.0], [0.0, ih]], w });
            f(&Tri { nodes: [c[1], c[3], c[2]], g: [[0.0, -ih], [ih, ih], [-ih, 0.0]], w });
            f(&Tri { nodes: [c[0], c[1], c[3]], g: [[-ih, 0.0], [ih, -ih], [0.0, ih]], w });
            f(&Tri { nodes: [c[0], c[3], c[2]], g: [[0.0, -ih], [ih, 0.0], [-ih, ih]], w });
        }
        for t in &self.cut {
            f(t);
        }
    }

    /// `Σ m_i φ(u_i)` over interior nodes.
    pub fn integrate(&self, u: &[f64], phi: impl Fn(f64) -> f64) -> f64 {
        self.mass
            .iter()
            .zip(u)
            .zip(&self.grid.mask)
            .filter(|(_, &inside)| inside)
            .map(|((m, &v), _)| m * phi(v))
            .sum()
    }

    /// `E(u) = Σ_T w_T F(∇_T u)^p`.
    pub fn energy(&self, norm: &MinkowskiNorm, p: f64, u: &[f64]) -> f64 {
        let mut e = 0.0;
        self.for_each_tri(|t| {
            let xi = tri_gradient(t, u);
            e += t.w * pow_p(norm.eval2(xi[0], xi[1]), p);
        });
        e
    }

    /// `E(u)` and its gradient, written into `grad` (zero off the mask).
    pub fn energy_grad(&self, norm: &MinkowskiNorm, p: f64, u: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut e = 0.0;
        self.for_each_tri(|t| {
            let xi = tri_gradient(t, u);
            let (f, df) = norm.eval_grad2(xi[0], xi[1]);
            if f == 0.0 {
                return;
            }
            let fp1 = pow_p(f, p - 1.0);
            e += t.w * fp1 * f;
            let s = t.w * p * fp1;
            for a in 0..3 {
                grad[t.nodes[a]] += s * (df[0] * t.g[a][0] + df[1] * t.g[a][1]);
            }
        });
        for (g, &inside) in grad.iter_mut().zip(&self.grid.mask) {
            if !inside {
                *g = 0.0;
            }
        }
        e
    }

    /// Stiffness of the quadratic form `Σ_T w_T (∇_T u)ᵀ B (∇_T u)` for a
    /// constant symmetric matrix `B = [bxx, bxy, byy]`.
    pub(crate) fn quadratic_operator(&self, b: [f64; 3]) -> Stencil {
        let mut op = Stencil::zeros(self.grid.nx, self.grid.ny, self.grid.mask.clone());
        self.for_each_tri(|t| add_element(&mut op, t, b, 1.0));
        op.finish();
        op
    }

    /// `∇²E(u)/p`, with the per-triangle curvature kept positive definite:
    /// `F^{p-2}` is evaluated at `max(F, floor)` and a small multiple of
    /// `metric` fills directions in which `F` is flat.
    pub(crate) fn hessian(&self, norm: &MinkowskiNorm, p: f64, u: &[f64], floor: f64) -> Stencil {
        let metric = norm.metric2();
        let mut op = Stencil::zeros(self.grid.nx, self.grid.ny, self.grid.mask.clone());
        let flat = 1e-3;
        self.for_each_tri(|t| {
            let xi = tri_gradient(t, u);
            let (f, g, hf) = norm.eval_grad_hess2(xi[0], xi[1]);
            if f < floor {
                add_element(&mut op, t, metric, (p - 1.0) * pow_p(floor, p - 2.0));
                return;
            }
            let s = pow_p(f, p - 2.0);
            let m = [
                s * ((p - 1.0) * g[0] * g[0] + f * hf[0] + flat * metric[0]),
                s * ((p - 1.0) * g[0] * g[1] + f * hf[1] + flat * metric[1]),
                s * ((p - 1.0) * g[1] * g[1] + f * hf[2] + flat * metric[2]),
            ];
            add_element(&mut op, t, m, 1.0);
        });
        op.finish();
        op
    }

    /// Largest `F(∇_T u)` over the triangles.
    pub(crate) fn max_gradient(&self, norm: &MinkowskiNorm, u: &[f64]) -> f64 {
        let mut m: f64 = 0.0;
        self.for_each_tri(|t| {
            let xi = tri_gradient(t, u);
            m = m.max(norm.eval2(xi[0], xi[1]));
        });
        m
    }
}

#[inline]
pub(crate) fn tri_gradient(t: &Tri, u: &[f64]) -> [f64; 2] {
    let (a, b, c) = (u[t.nodes[0]], u[t.nodes[1]], u[t.nodes[2]]);
    [
        t.g[0][0] * a + t.g[1][0] * b + t.g[2][0] * c,
        t.g[0][1] * a + t.g[1][1] * b + t.g[2][1] * c,
    ]
}

/// `f^e` with the common exponents special-cased.
#[inline]
pub(crate) fn pow_p(f: f64, e: f64) -> f64 {
    if e == 1.0 {
        f
    } else if e == 2.0 {
        f * f
    } else if e == 0.0 {
        1.0
    } else {
        f.powf(e)
    }
}

fn triangle(nodes: [usize; 3], pos: &[[f64; 2]]) -> Option<Tri> {
    let (x0, x1, x2) = (pos[nodes[0]], pos[nodes[1]], pos[nodes[2]]);
    let e1 = [x1[0] - x0[0], x1[1] - x0[1]];
    let e2 = [x2[0] - x0[0], x2[1] - x0[1]];
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    if det <= 0.0 {
        return None;
    }
    let g1 = [e2[1] / det, -e2[0] / det];
    let g2 = [-e1[1] / det, e1[0] / det];
    Some(Tri {
        nodes,
        g: [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2],
        w: 0.25 * det,
    })
}

fn add_element(op: &mut Stencil, t: &Tri, b: [f64; 3], scale: f64) {
    let w = t.w * scale;
    for a in 0..3 {
        let bg = [b[0] * t.g[a][0] + b[1] * t.g[a][1], b[1] * t.g[a][0] + b[2] * t.g[a][1]];
        for c in 0..3 {
            let v = w * (bg[0] * t.g[c][0] + bg[1] * t.g[c][1]);
            op.add(t.nodes[a], t.nodes[c], v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mesh(domain: &ConvexPolygon, h: f64) -> Mesh {
        Mesh::new(domain, Grid::new(domain, h).unwrap())
    }

    #[test]
    fn discrete_area_matches_domain() {
        for domain in [
            ConvexPolygon::rectangle(1.0, 1.0).unwrap(),
            ConvexPolygon::rectangle(1.0, 4.0).unwrap(),
            ConvexPolygon::regular(6, 1.0).unwrap(),
            ConvexPolygon::regular(512, 1.0).unwrap(),
        ] {
            let m = mesh(&domain, 1.0 / 48.0);
            assert_relative_eq!(m.area, domain.area(), max_relative = 2e-3);
            assert!(m.integrate(&vec![1.0; m.len()], |v| v) <= domain.area());
        }
    }

    #[test]
    fn euclidean_energy_is_five_point_laplacian() {
        let domain = ConvexPolygon::rectangle(1.0, 1.0).unwrap();
        let m = mesh(&domain, 1.0 / 32.0);
        let g = &m.grid;
        let u: Vec<f64> = (0..m.len())
            .map(|k| if g.mask[k] { ((k * 7919) % 101) as f64 / 101.0 } else { 0.0 })
            .collect();
        let mut five = 0.0;
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                let k = g.index(i, j);
                five += (u[k + 1] - u[k]).powi(2) + (u[k + g.nx] - u[k]).powi(2);
            }
        }
        let euclid = MinkowskiNorm::lq(2.0).unwrap();
        assert_relative_eq!(m.energy(&euclid, 2.0, &u), five, max_relative = 1e-12);
    }

    /// A smooth field vanishing on the boundary of a convex polygon.
    fn bubble(domain: &ConvexPolygon, m: &Mesh, tilt: f64) -> Vec<f64> {
        m.pos
            .iter()
            .zip(&m.grid.mask)
            .map(|(x, &inside)| {
                if !inside {
                    return 0.0;
                }
                let b: f64 = domain.edges().map(|e| e.offset - e.normal[0] * x[0] - e.normal[1] * x[1]).product();
                b * (1.0 + tilt * x[0])
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let domain = ConvexPolygon::regular(6, 1.0).unwrap();
        let m = mesh(&domain, 0.03);
        let u = bubble(&domain, &m, 0.3);
        for (s, p) in [("lq:2", 2.0), ("lq:4", 3.0), ("ellipse:4,0,1", 1.5), ("lq:1.5", 2.5)] {
            let norm: MinkowskiNorm = s.parse().unwrap();
            let mut grad = vec![0.0; m.len()];
            m.energy_grad(&norm, p, &u, &mut grad);
            let scale = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
            for k in (0..m.len()).filter(|&k| m.grid.mask[k]).step_by(97) {
                // Boundary slivers make the energy stiff: keep the step small.
                let eps = 1e-7;
                let mut up = u.clone();
                up[k] += eps;
                let mut dn = u.clone();
                dn[k] -= eps;
                let fd = (m.energy(&norm, p, &up) - m.energy(&norm, p, &dn)) / (2.0 * eps);
                assert!((fd - grad[k]).abs() <= 1e-5 * scale, "{s}: {fd} vs {}", grad[k]);
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let domain = ConvexPolygon::rectangle(1.0, 1.0).unwrap();
        let m = mesh(&domain, 1.0 / 20.0);
        let u = bubble(&domain, &m, 0.3);
        let dir: Vec<f64> = (0..m.len()).map(|k| if m.grid.mask[k] { ((k * 31) % 17) as f64 / 17.0 - 0.5 } else { 0.0 }).collect();
        for (s, p) in [("ellipse:4,1,1", 2.0), ("ellipse:4,0,1", 3.0), ("lq:2", 2.5), ("lq:4", 3.0)] {
            let norm: MinkowskiNorm = s.parse().unwrap();
            let hess = m.hessian(&norm, p, &u, 0.0);
            let mut hd = vec![0.0; m.len()];
            hess.apply(&dir, &mut hd);
            let eps = 1e-6;
            let (mut gp, mut gm) = (vec![0.0; m.len()], vec![0.0; m.len()]);
            let up: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a + eps * b).collect();
            let um: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a - eps * b).collect();
            m.energy_grad(&norm, p, &up, &mut gp);
            m.energy_grad(&norm, p, &um, &mut gm);
            let scale = hd.iter().zip(&m.grid.mask).filter(|(_, &i)| i).fold(0.0_f64, |a, (v, _)| a.max(v.abs()));
            for k in (0..m.len()).filter(|&k| m.grid.mask[k]) {
                let fd = (gp[k] - gm[k]) / (2.0 * eps * p);
                // The Hessian carries a 1e-3 metric regularization.
                assert!((fd - hd[k]).abs() <= 5e-3 * scale, "{s} node {k}: {fd} vs {}", hd[k]);
            }
        }
    }

    #[test]
    fn quadratic_operator_is_half_hessian_of_energy() {
        let domain = ConvexPolygon::regular(5, 1.0).unwrap();
        let m = mesh(&domain, 1.0 / 40.0);
        let norm = MinkowskiNorm::ellipse(2.0, 0.3, 1.0).unwrap();
        let op = m.quadratic_operator(norm.metric2());
        let u: Vec<f64> = m.pos.iter().zip(&m.grid.mask).map(|(x, &i)| if i { x[0].sin() + x[1] * x[1] } else { 0.0 }).collect();
        let mut ku = vec![0.0; m.len()];
        op.apply(&u, &mut ku);
        let quad: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
        assert_relative_eq!(quad, m.energy(&norm, 2.0, &u), max_relative = 1e-12);
    }
}
