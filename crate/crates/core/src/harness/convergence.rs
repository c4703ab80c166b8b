use serde::{Deserialize, Serialize};

use super::CaseSpec;
use crate::error::{Error, Result};
use crate::pde::{build_mesh, solve_eigen_on, solve_torsion_on};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub lambda: f64,
    pub torsion: f64,
    pub torsion_max: f64,
}

/// Richardson extrapolation `q(h) ≈ q* + C h^α` from the three finest levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub quantity: String,
    pub extrapolated: f64,
    pub order: f64,
    /// False when the successive differences change sign; `order` is then
    /// NaN and `extrapolated` is the finest value.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub extrapolations: Vec<Extrapolation>,
}

impl ConvergenceStudy {
    pub fn get(&self, quantity: &str) -> Option<&Extrapolation> {
        self.extrapolations.iter().find(|e| e.quantity == quantity)
    }
}

/// Solves `spec` on every spacing of `hs` (coarsest first after sorting) and
/// extrapolates λ, `T` and `M_v`.
pub fn convergence_study(spec: &CaseSpec, hs: &[f64]) -> Result<ConvergenceStudy> {
    spec.validate()?;
    if hs.len() < 3 {
        return Err(Error::InvalidArgument(format!("a convergence study needs at least 3 grids, got {}", hs.len())));
    }
    let mut hs = hs.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    let domain = spec.domain.build(&spec.norm)?;
    let rows = hs
        .iter()
        .map(|&h| {
            let mesh = build_mesh(&domain, h)?;
            let e = solve_eigen_on(mesh.clone(), domain.provenance(), &spec.norm, spec.p, spec.tol)?;
            let t = solve_torsion_on(mesh, domain.provenance(), &spec.norm, spec.p, spec.tol)?;
            log::info!("h = {h}: λ = {:.10}, T = {:.10}, M_v = {:.10}", e.lambda, t.torsion, t.max);
            Ok(ConvergenceRow { h, lambda: e.lambda, torsion: t.torsion, torsion_max: t.max })
        })
        .collect::<Result<Vec<_>>>()?;
    let fine = &rows[rows.len() - 3..];
    let h3 = [fine[0].h, fine[1].h, fine[2].h];
    let quantities: [(&str, fn(&ConvergenceRow) -> f64); 3] =
        [("lambda", |r| r.lambda), ("torsion", |r| r.torsion), ("torsion_max", |r| r.torsion_max)];
    let extrapolations = quantities
        .iter()
        .map(|(name, get)| {
            let q = [get(&fine[0]), get(&fine[1]), get(&fine[2])];
            let (extrapolated, order, monotone) = match richardson(h3, q) {
                Some((x, a)) => (x, a, true),
                None => {
                    log::warn!("{name}: non-monotone sequence {q:?}");
                    (q[2], f64::NAN, false)
                }
            };
            Extrapolation { quantity: name.to_string(), extrapolated, order, monotone }
        })
        .collect();
    Ok(ConvergenceStudy { rows, extrapolations })
}

/// Fits `q = q* + C h^α` through three points with `h₀ > h₁ > h₂`; `None` when
/// the differences change sign.
pub(crate) fn richardson(h: [f64; 3], q: [f64; 3]) -> Option<(f64, f64)> {
    let (d1, d2) = (q[0] - q[1], q[1] - q[2]);
    if d1 == 0.0 && d2 == 0.0 {
        return Some((q[2], f64::INFINITY));
    }
    if d1 * d2 <= 0.0 {
        return None;
    }
    let target = d1 / d2;
    // (h₀^α - h₁^α)/(h₁^α - h₂^α) increases with α; bracket and bisect.
    let ratio = |a: f64| (h[0].powf(a) - h[1].powf(a)) / (h[1].powf(a) - h[2].powf(a));
    let (mut lo, mut hi) = (1e-3, 1.0);
    while ratio(hi) < target {
        hi *= 2.0;
        if hi > 64.0 {
            return None;
        }
    }
    if ratio(lo) > target {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let c = d2 / (h[1].powf(alpha) - h[2].powf(alpha));
    Some((q[2] - c * h[2].powf(alpha), alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_power_law() {
        let f = |h: f64| 3.0 + 0.7 * h.powf(1.7);
        let h = [0.1, 0.06, 0.03];
        let (x, a) = richardson(h, h.map(f)).unwrap();
        assert_relative_eq!(x, 3.0, max_relative = 1e-10);
        assert_relative_eq!(a, 1.7, max_relative = 1e-8);
    }

    #[test]
    fn flags_oscillation() {
        assert!(richardson([0.1, 0.05, 0.025], [1.0, 0.9, 0.95]).is_none());
    }

    #[test]
    fn too_few_levels() {
        let spec = CaseSpec::new("rect:1,1".parse().unwrap(), "lq:2".parse().unwrap(), 2.0);
        assert!(convergence_study(&spec, &[0.1, 0.05]).is_err());
    }
}
