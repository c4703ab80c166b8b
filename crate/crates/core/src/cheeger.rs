//! Anisotropic Cheeger constant `h_F(Ω) = inf P_F(K)/|K|` of a convex polygon.
//!
//! [`cheeger_estimate`] minimizes the ratio over the rolling bodies
//! `K_r = (Ω ⊖ rW) ⊕ rW`, `0 < r ≤ R_F`. The result is an upper estimate of
//! `h_F`; it is exact when the Cheeger set belongs to that family.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rolling_body, ConvexPolygon};
use crate::norms::MinkowskiNorm;

/// Default number of radii in the coarse sweep.
pub const DEFAULT_SWEEP: usize = 64;
/// Golden-section refinement stops when the bracket is below this fraction
/// of `R_F`.
const REFINE_TOL: f64 = 1e-6;
const DIM: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerResult {
    pub h_est: f64,
    /// Minimizing radius; zero when the estimate fell back to `P_F(Ω)/|Ω|`.
    pub r_star: f64,
    /// `1/R_F`.
    pub lower: f64,
    /// `min(2/R_F, P_F(Ω)/|Ω|)`.
    pub upper: f64,
    pub inradius: f64,
    /// `(r, P_F(K_r)/|K_r|)` for every radius of the coarse sweep whose
    /// erosion is nonempty.
    pub trace: Vec<(f64, f64)>,
    /// Set when every sampled erosion was empty and `h_est` is the upper bound.
    pub fallback: bool,
}

impl CheegerResult {
    /// Writes the sweep trace as CSV with header `r,ratio`.
    pub fn write_trace(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "ratio"])?;
        for &(r, ratio) in &self.trace {
            w.write_record([r.to_string(), ratio.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(1/R_F, min(2/R_F, P_F(Ω)/|Ω|))`.
pub fn cheeger_bounds(domain: &ConvexPolygon, norm: &MinkowskiNorm) -> (f64, f64) {
    let (r, _) = domain.inradius(norm);
    bounds_with(domain, norm, r)
}

fn bounds_with(domain: &ConvexPolygon, norm: &MinkowskiNorm, inradius: f64) -> (f64, f64) {
    let whole = domain.perimeter_f(norm) / domain.area();
    (1.0 / inradius, (DIM / inradius).min(whole))
}

/// `P_F(K_r)/|K_r|`, infinite when the erosion is empty.
pub fn rolling_ratio(domain: &ConvexPolygon, norm: &MinkowskiNorm, r: f64) -> f64 {
    match rolling_body(domain, norm, r) {
        Ok((area, perim)) if area > 0.0 => perim / area,
        _ => f64::INFINITY,
    }
}

/// Rolling-Wulff estimate of `h_F(Ω)` from an `m`-point sweep of
/// `r_i = i R_F/m` followed by golden-section refinement around the best
/// sample.
pub fn cheeger_estimate(domain: &ConvexPolygon, norm: &MinkowskiNorm, m: usize) -> Result<CheegerResult> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("sweep needs at least 3 radii, got {m}")));
    }
    let (inradius, _) = domain.inradius(norm);
    let (lower, upper) = bounds_with(domain, norm, inradius);
    let samples: Vec<(f64, f64)> = (1..=m)
        .into_par_iter()
        .map(|i| {
            let r = inradius * i as f64 / m as f64;
            (r, rolling_ratio(domain, norm, r))
        })
        .collect();
    let trace: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1.is_finite()).collect();

    let best = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.1.is_finite())
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i);
    let Some(i) = best else {
        log::warn!("{}: every erosion in the sweep is empty, using the upper bound", domain.provenance());
        return Ok(CheegerResult { h_est: upper, r_star: 0.0, lower, upper, inradius, trace, fallback: true });
    };

    let step = inradius / m as f64;
    let lo = (samples[i].0 - step).max(0.0);
    let hi = (samples[i].0 + step).min(inradius);
    let (mut r_star, mut h_est) = golden_section(|r| rolling_ratio(domain, norm, r), lo, hi, REFINE_TOL * inradius);
    if samples[i].1 < h_est {
        (r_star, h_est) = samples[i];
    }
    Ok(CheegerResult { h_est, r_star, lower, upper, inradius, trace, fallback: false })
}

/// Minimum of a unimodal function on `[a, b]`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
