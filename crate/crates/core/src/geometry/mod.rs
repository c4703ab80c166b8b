//! Convex planar domains and their anisotropic functionals.

mod distance;
mod domain;

pub use distance::DistanceField;
pub use domain::DomainSpec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{MinkowskiNorm, WulffPolygon};

/// Vertices closer than this (relative to the polygon scale) are merged.
const DEDUP_TOLERANCE: f64 = 1e-12;

/// A bounded convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
    provenance: String,
}

/// One edge of a polygon with its outward unit normal `n` and support value
/// `c = n·start`, so the polygon is `∩ {x : n·x ≤ c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub normal: [f64; 2],
    pub offset: f64,
    pub length: f64,
}

impl ConvexPolygon {
    /// Builds a polygon from vertices in either orientation. Repeated and
    /// collinear vertices are dropped; what remains must be strictly convex.
    pub fn new(vertices: Vec<[f64; 2]>, provenance: impl Into<String>) -> Result<Self> {
        let provenance = provenance.into();
        let vertices = normalize(vertices).map_err(|reason| {
            Error::InvalidArgument(format!("polygon `{provenance}` is not a valid convex polygon: {reason}"))
        })?;
        Ok(Self { vertices, provenance })
    }

    /// `]-a, a[ × ]-k, k[`.
    pub fn rectangle(a: f64, k: f64) -> Result<Self> {
        if !(a > 0.0 && k > 0.0 && a.is_finite() && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("rectangle needs a, k > 0, got ({a}, {k})")));
        }
        Self::new(vec![[-a, -k], [a, -k], [a, k], [-a, k]], format!("rect:{a},{k}"))
    }

    /// Regular `n`-gon centred at the origin with a vertex on the positive x axis.
    pub fn regular(n: usize, circumradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("regular polygon needs n >= 3, got {n}")));
        }
        if !(circumradius > 0.0 && circumradius.is_finite()) {
            return Err(Error::InvalidArgument(format!("circumradius must be positive, got {circumradius}")));
        }
        let vertices = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [circumradius * t.cos(), circumradius * t.sin()]
            })
            .collect();
        Self::new(vertices, format!("regular:{n},{circumradius}"))
    }

    /// Polygonal Wulff shape of radius `r` centred at the origin.
    pub fn wulff(norm: &MinkowskiNorm, r: f64, n: usize) -> Result<Self> {
        let w = WulffPolygon::new(norm, r, [0.0, 0.0], n)?;
        Self::new(w.vertices, format!("wulff:{r},{n}"))
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| edge(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|e| e.length).sum()
    }

    /// `P_F = Σ |edge| F(n_edge)`.
    pub fn perimeter_f(&self, norm: &MinkowskiNorm) -> f64 {
        self.edges()
            .map(|e| e.length * norm.eval2(e.normal[0], e.normal[1]))
            .sum()
    }

    /// `(min corner, max corner)` of the bounding box.
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        self.vertices.iter().fold(
            ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
            |(lo, hi), v| ([lo[0].min(v[0]), lo[1].min(v[1])], [hi[0].max(v[0]), hi[1].max(v[1])]),
        )
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        d
    }

    /// `min_i (c_i - n_i·x)`: positive inside, the Euclidean distance to the
    /// boundary for interior points.
    pub fn interior_margin(&self, x: [f64; 2]) -> f64 {
        self.edges()
            .map(|e| e.offset - (e.normal[0] * x[0] + e.normal[1] * x[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Closest point of the boundary to `x` (Euclidean).
    pub fn closest_boundary_point(&self, x: [f64; 2]) -> [f64; 2] {
        let mut best = (f64::INFINITY, x);
        for e in self.edges() {
            let d = [e.end[0] - e.start[0], e.end[1] - e.start[1]];
            let t = (((x[0] - e.start[0]) * d[0] + (x[1] - e.start[1]) * d[1]) / (e.length * e.length)).clamp(0.0, 1.0);
            let y = [e.start[0] + t * d[0], e.start[1] + t * d[1]];
            let dist = (x[0] - y[0]).hypot(x[1] - y[1]);
            if dist < best.0 {
                best = (dist, y);
            }
        }
        best.1
    }

    /// The inner parallel body `Ω ⊖ rW`: every edge half-plane moves inward by
    /// `r F(n)`, the support function of `rW` in direction `n`. Returns `None`
    /// when the result has no interior.
    pub fn erode(&self, norm: &MinkowskiNorm, r: f64) -> Option<ConvexPolygon> {
        if r == 0.0 {
            return Some(self.clone());
        }
        let poly = self.clip_inward(norm, r)?;
        if shoelace(&poly) <= 1e-13 * self.area() {
            return None;
        }
        let vertices = normalize(poly).ok()?;
        Some(ConvexPolygon {
            vertices,
            provenance: format!("{} eroded by {r}", self.provenance),
        })
    }

    /// Vertices of `Ω ⊖ rW` before any degeneracy filtering; `None` when the
    /// clipping leaves nothing.
    fn clip_inward(&self, norm: &MinkowskiNorm, r: f64) -> Option<Vec<[f64; 2]>> {
        if r < 0.0 || !r.is_finite() {
            return None;
        }
        let mut poly = self.vertices.clone();
        for e in self.edges() {
            let c = e.offset - r * norm.eval2(e.normal[0], e.normal[1]);
            poly = clip(&poly, e.normal, c);
            if poly.is_empty() {
                return None;
            }
        }
        Some(poly)
    }

    /// Anisotropic inradius `R_F = sup d_F` and a point attaining it, found by
    /// bisection on the emptiness of the erosion.
    pub fn inradius(&self, norm: &MinkowskiNorm) -> (f64, [f64; 2]) {
        let (_, polar_upper) = norm.polar().coercivity();
        let (mut lo, mut hi) = (0.0, polar_upper * self.diameter());
        let mut center = centroid(&self.vertices);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            match self.clip_inward(norm, mid) {
                Some(inner) => {
                    lo = mid;
                    center = centroid(&inner);
                }
                None => hi = mid,
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        (lo, center)
    }

    /// `tΩ`.
    pub fn scaled(&self, t: f64) -> Result<ConvexPolygon> {
        Self::new(
            self.vertices.iter().map(|v| [t * v[0], t * v[1]]).collect(),
            format!("{} scaled by {t}", self.provenance),
        )
    }
}

/// Area and anisotropic perimeter of the rolling body `K_r = (Ω ⊖ rW) ⊕ rW`:
///
/// `|K_r| = |E| + r P_F(E) + r² κ₂` and `P_F(K_r) = P_F(E) + 2 r κ₂`
/// with `E = Ω ⊖ rW` and `κ₂ = |W|`.
pub fn rolling_body(domain: &ConvexPolygon, norm: &MinkowskiNorm, r: f64) -> Result<(f64, f64)> {
    if r == 0.0 {
        return Ok((domain.area(), domain.perimeter_f(norm)));
    }
    let inner = domain.erode(norm, r).ok_or(Error::EmptyErosion { radius: r })?;
    let kappa = norm.wulff_volume();
    let pe = inner.perimeter_f(norm);
    Ok((inner.area() + r * pe + r * r * kappa, pe + 2.0 * r * kappa))
}

/// Limit of `P_F(Ω_{a,k}) / |Ω_{a,k}|` as `k → ∞`, namely `1/(a F°(e₁))`.
/// Warns when the norm violates `F°(e₁)F(e₁) = 1`, on which the limit relies.
pub fn rect_ratio_limit(a: f64, norm: &MinkowskiNorm) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("half-width must be positive, got {a}")));
    }
    norm.check_axis_alignment();
    Ok(1.0 / (a * norm.polar_eval2(1.0, 0.0)))
}

pub(crate) fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

fn centroid(v: &[[f64; 2]]) -> [f64; 2] {
    let n = v.len() as f64;
    let s = v.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
    [s[0] / n, s[1] / n]
}

fn edge(start: [f64; 2], end: [f64; 2]) -> Edge {
    let (dx, dy) = (end[0] - start[0], end[1] - start[1]);
    let length = dx.hypot(dy);
    let normal = [dy / length, -dx / length];
    Edge {
        start,
        end,
        normal,
        offset: normal[0] * start[0] + normal[1] * start[1],
        length,
    }
}

/// Sutherland–Hodgman clip of a convex polygon against `n·x ≤ c`.
fn clip(poly: &[[f64; 2]], n: [f64; 2], c: f64) -> Vec<[f64; 2]> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        let (a, b) = (poly[i], poly[(i + 1) % m]);
        let (fa, fb) = (n[0] * a[0] + n[1] * a[1] - c, n[0] * b[0] + n[1] * b[1] - c);
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Dedups, orients counter-clockwise, drops collinear vertices and checks
/// strict convexity.
fn normalize(mut v: Vec<[f64; 2]>) -> std::result::Result<Vec<[f64; 2]>, String> {
    if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err("non-finite vertex".into());
    }
    let scale = v.iter().fold(0.0_f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1e-300);
    let tol = DEDUP_TOLERANCE * scale;
    v.dedup_by(|a, b| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol);
    while v.len() > 1 {
        let (f, l) = (v[0], v[v.len() - 1]);
        if (f[0] - l[0]).abs() <= tol && (f[1] - l[1]).abs() <= tol {
            v.pop();
        } else {
            break;
        }
    }
    if v.len() < 3 {
        return Err(format!("needs at least 3 distinct vertices, got {}", v.len()));
    }
    if shoelace(&v) < 0.0 {
        v.reverse();
    }
    // Drop collinear vertices until every turn is strictly left.
    let cross_tol = 1e-14 * scale * scale;
    loop {
        let n = v.len();
        if n < 3 {
            return Err("degenerate polygon".into());
        }
        let flat = (0..n).find(|&i| {
            let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            cross.abs() <= cross_tol
        });
        match flat {
            Some(i) => {
                v.remove(i);
            }
            None => break,
        }
    }
    let n = v.len();
    for i in 0..n {
        let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross <= 0.0 {
            return Err("not convex".into());
        }
    }
    // A convex polygon winds exactly once.
    let turning: f64 = (0..n)
        .map(|i| {
            let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
            let t1 = (b[1] - a[1]).atan2(b[0] - a[0]);
            let t2 = (c[1] - b[1]).atan2(c[0] - b[0]);
            let mut d = t2 - t1;
            while d <= -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            d
        })
        .sum();
    if (turning - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
        return Err("self-intersecting".into());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn square() -> ConvexPolygon {
        ConvexPolygon::rectangle(1.0, 1.0).unwrap()
    }

    /// Convex polygon Minkowski sum by merging edge vectors in angular order.
    fn minkowski_sum(a: &[[f64; 2]], b: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let lowest = |v: &[[f64; 2]]| {
            (0..v.len())
                .min_by(|&i, &j| (v[i][1], v[i][0]).partial_cmp(&(v[j][1], v[j][0])).unwrap())
                .unwrap()
        };
        let edges = |v: &[[f64; 2]], s: usize| -> Vec<[f64; 2]> {
            let n = v.len();
            (0..n)
                .map(|k| {
                    let (p, q) = (v[(s + k) % n], v[(s + k + 1) % n]);
                    [q[0] - p[0], q[1] - p[1]]
                })
                .collect()
        };
        let (ia, ib) = (lowest(a), lowest(b));
        let (ea, eb) = (edges(a, ia), edges(b, ib));
        let angle = |e: [f64; 2]| {
            let t = e[1].atan2(e[0]);
            if t < 0.0 { t + 2.0 * PI } else { t }
        };
        let mut p = [a[ia][0] + b[ib][0], a[ia][1] + b[ib][1]];
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < ea.len() || j < eb.len() {
            out.push(p);
            let take_a = j >= eb.len() || (i < ea.len() && angle(ea[i]) <= angle(eb[j]));
            let e = if take_a { i += 1; ea[i - 1] } else { j += 1; eb[j - 1] };
            p = [p[0] + e[0], p[1] + e[1]];
        }
        out
    }

    #[test]
    fn rectangle_examples() {
        let sq = square();
        assert_relative_eq!(sq.area(), 4.0);
        assert_relative_eq!(ConvexPolygon::rectangle(1.0, 4.0).unwrap().area(), 16.0);
        let v = sq.vertices();
        for i in 0..4 {
            let (a, b, c) = (v[i], v[(i + 1) % 4], v[(i + 2) % 4]);
            assert!((b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0);
        }
        assert!(ConvexPolygon::rectangle(0.0, 1.0).is_err());
    }

    #[test]
    fn area_examples() {
        let unit = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], "unit").unwrap();
        assert_relative_eq!(unit.area(), 1.0);
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], "tri").unwrap();
        assert_relative_eq!(tri.area(), 0.5);
    }

    #[test]
    fn construction_normalizes_and_validates() {
        let cw = ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]], "cw").unwrap();
        assert!(cw.area() > 0.0);
        let with_dupes = ConvexPolygon::new(
            vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
            "dupes",
        )
        .unwrap();
        assert_eq!(with_dupes.vertices().len(), 4);
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]], "dent").is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], "line").is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0]], "two").is_err());
    }

    #[test]
    fn perimeter_examples() {
        let euclid = MinkowskiNorm::lq(2.0).unwrap();
        assert_relative_eq!(square().perimeter_f(&euclid), 8.0);
        for (alpha, beta, k) in [(2.0, 1.0, 1.0), (2.0, 1.0, 4.0), (0.5, 3.0, 2.5)] {
            let ell = MinkowskiNorm::ellipse(alpha * alpha, 0.0, beta * beta).unwrap();
            let rect = ConvexPolygon::rectangle(1.0, k).unwrap();
            assert_relative_eq!(rect.perimeter_f(&ell), 4.0 * k * alpha + 4.0 * beta, max_relative = 1e-14);
        }
        let w = ConvexPolygon::wulff(&euclid, 1.0, 512).unwrap();
        assert!((w.perimeter_f(&euclid) - 2.0 * PI).abs() < 1e-2);
        let (a, _) = euclid.coercivity();
        assert!(w.perimeter_f(&euclid) >= a * w.perimeter());
    }

    #[test]
    fn isoperimetric_inequality_on_catalog() {
        let norms = ["lq:2", "lq:4", "ellipse:4,0,1", "lq:1.5", "ellipse:2,0.5,1"];
        for s in norms {
            let norm: MinkowskiNorm = s.parse().unwrap();
            let kappa = norm.wulff_volume();
            let shapes = [
                square(),
                ConvexPolygon::rectangle(1.0, 4.0).unwrap(),
                ConvexPolygon::regular(6, 1.0).unwrap(),
                ConvexPolygon::regular(3, 1.0).unwrap(),
            ];
            for shape in &shapes {
                let bound = 2.0 * (kappa * shape.area()).sqrt();
                assert!(shape.perimeter_f(&norm) >= bound, "{s} {}", shape.provenance());
            }
            let w = ConvexPolygon::wulff(&norm, 1.0, 512).unwrap();
            let ratio = w.perimeter_f(&norm) / (2.0 * (kappa * w.area()).sqrt());
            assert!(ratio >= 1.0 && ratio - 1.0 < 1e-2, "{s}: {ratio}");
        }
    }

    #[test]
    fn perimeter_to_area_bounded_by_inradius() {
        for s in ["lq:2", "lq:4", "ellipse:4,0,1"] {
            let norm: MinkowskiNorm = s.parse().unwrap();
            for shape in [
                square(),
                ConvexPolygon::rectangle(1.0, 4.0).unwrap(),
                ConvexPolygon::regular(6, 1.0).unwrap(),
                ConvexPolygon::regular(5, 2.0).unwrap(),
                ConvexPolygon::wulff(&norm, 1.0, 512).unwrap(),
            ] {
                let (r, _) = shape.inradius(&norm);
                let ratio = shape.perimeter_f(&norm) / shape.area();
                assert!(ratio <= 2.0 / r * (1.0 + 1e-12), "{s} {}: {ratio} > {}", shape.provenance(), 2.0 / r);
            }
            let w = ConvexPolygon::wulff(&norm, 1.0, 512).unwrap();
            let (r, _) = w.inradius(&norm);
            assert!((w.perimeter_f(&norm) / w.area() * r / 2.0 - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn rect_ratio_limit_examples() {
        let euclid = MinkowskiNorm::lq(2.0).unwrap();
        assert_relative_eq!(rect_ratio_limit(1.0, &euclid).unwrap(), 1.0);
        assert_relative_eq!(rect_ratio_limit(2.0, &euclid).unwrap(), 0.5);
        let ell = MinkowskiNorm::ellipse(4.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(rect_ratio_limit(1.0, &ell).unwrap(), 2.0, epsilon = 1e-14);
        // The finite-k ratio approaches the limit.
        for norm in [euclid, ell] {
            let limit = rect_ratio_limit(1.0, &norm).unwrap();
            let rect = ConvexPolygon::rectangle(1.0, 1e6).unwrap();
            assert_relative_eq!(rect.perimeter_f(&norm) / rect.area(), limit, max_relative = 1e-5);
        }
    }

    #[test]
    fn erosion_examples() {
        let euclid = MinkowskiNorm::lq(2.0).unwrap();
        let inner = square().erode(&euclid, 0.5).unwrap();
        assert_relative_eq!(inner.area(), 1.0, epsilon = 1e-14);

        let ell = MinkowskiNorm::ellipse(4.0, 0.0, 1.0).unwrap();
        // Vertical edges move by 0.5 F(e₁) = 1: the square collapses in x.
        assert!(square().erode(&ell, 0.5).is_none());
        let inner = square().erode(&ell, 0.4).unwrap();
        let (lo, hi) = inner.bbox();
        assert_relative_eq!(lo[0], -0.2, epsilon = 1e-14);
        assert_relative_eq!(hi[0], 0.2, epsilon = 1e-14);
        assert_relative_eq!(lo[1], -0.6, epsilon = 1e-14);
        assert_relative_eq!(hi[1], 0.6, epsilon = 1e-14);

        assert_eq!(square().erode(&euclid, 0.0).unwrap(), square());
        assert!(square().erode(&euclid, 1.0 + 1e-9).is_none());
    }

    #[test]
    fn erosion_is_monotone() {
        let norm: MinkowskiNorm = "lq:4".parse().unwrap();
        let hex = ConvexPolygon::regular(6, 1.0).unwrap();
        let radii = [0.0, 0.1, 0.3, 0.5, 0.7, 0.8];
        for w in radii.windows(2) {
            let (big, small) = (hex.erode(&norm, w[0]).unwrap(), hex.erode(&norm, w[1]).unwrap());
            for v in small.vertices() {
                assert!(big.interior_margin(*v) >= -1e-12);
            }
            assert!(small.area() < big.area());
        }
    }

    #[test]
    fn inradius_examples() {
        let euclid = MinkowskiNorm::lq(2.0).unwrap();
        let (r, c) = ConvexPolygon::rectangle(1.0, 4.0).unwrap().inradius(&euclid);
        assert_relative_eq!(r, 1.0, epsilon = 1e-12);
        assert!(c[0].abs() < 1e-9);
        let ell = MinkowskiNorm::ellipse(4.0, 0.0, 1.0).unwrap();
        let (r, _) = ConvexPolygon::rectangle(1.0, 4.0).unwrap().inradius(&ell);
        assert_relative_eq!(r, 0.5, epsilon = 1e-12);
        let (r, _) = ConvexPolygon::regular(6, 1.0).unwrap().inradius(&euclid);
        assert_relative_eq!(r, 3f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rolling_body_examples() {
        let euclid = MinkowskiNorm::lq(2.0).unwrap();
        let (a, p) = rolling_body(&square(), &euclid, 0.0).unwrap();
        assert_relative_eq!(a, 4.0);
        assert_relative_eq!(p, 8.0);
        let (a, p) = rolling_body(&square(), &euclid, 0.5).unwrap();
        assert_relative_eq!(a, 1.0 + 2.0 + 0.25 * PI, epsilon = 1e-12);
        assert_relative_eq!(p, 4.0 + PI, epsilon = 1e-12);
        assert!(matches!(rolling_body(&square(), &euclid, 1.5), Err(Error::EmptyErosion { .. })));
    }

    #[test]
    fn rolling_body_of_smooth_wulff_is_itself() {
        // A fine Wulff polygon rolled by the exact Wulff shape of a smaller
        // radius reproduces itself up to the polygonal sampling error.
        for s in ["lq:2", "lq:4", "ellipse:4,0,1"] {
            let norm: MinkowskiNorm = s.parse().unwrap();
            let w = ConvexPolygon::wulff(&norm, 1.0, 2048).unwrap();
            for r in [0.2, 0.5, 0.9] {
                let (a, p) = rolling_body(&w, &norm, r).unwrap();
                assert_relative_eq!(a, w.area(), max_relative = 1e-4);
                assert_relative_eq!(p, w.perimeter_f(&norm), max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn rolling_body_matches_dense_minkowski_sum() {
        for s in ["lq:2", "lq:4", "ellipse:4,0,1", "ellipse:2,0.5,1"] {
            let norm: MinkowskiNorm = s.parse().unwrap();
            for shape in [
                square(),
                ConvexPolygon::rectangle(1.0, 4.0).unwrap(),
                ConvexPolygon::regular(6, 1.0).unwrap(),
            ] {
                let r = 0.3;
                let inner = shape.erode(&norm, r).unwrap();
                let wulff = WulffPolygon::new(&norm, r, [0.0, 0.0], 4096).unwrap();
                let sum = ConvexPolygon::new(minkowski_sum(inner.vertices(), &wulff.vertices), "sum").unwrap();
                let (a, p) = rolling_body(&shape, &norm, r).unwrap();
                assert_relative_eq!(a, sum.area(), max_relative = 1e-4);
                assert_relative_eq!(p, sum.perimeter_f(&norm), max_relative = 1e-4);
            }
        }
    }
}
