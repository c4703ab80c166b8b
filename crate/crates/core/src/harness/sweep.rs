use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cheeger::{cheeger_estimate, DEFAULT_SWEEP};
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::grid::Grid;
use crate::norms::{pi_p, MinkowskiNorm};
use crate::pde::{build_mesh, solve_eigen_on, solve_torsion_on};

/// Optimality ratios of `Ω_{a,k} = ]-a,a[ × ]-k,k[`; each is at least one and
/// tends to one as `k → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabRow {
    pub k: f64,
    pub h: f64,
    /// `λ R_F^p / (π_p/2)^p`.
    pub r1: f64,
    /// `h_F R_F`.
    pub r2: f64,
    /// `P_F R_F / |Ω|`.
    pub r3: f64,
    /// `λ M_v^{p-1} / (((p-1)/p)^{p-1} (π_p/2)^p)`.
    pub r4: f64,
}

/// Solves each rectangle `Ω_{a,k}` with spacing `h` (the rectangle's default
/// when `None`) and reports the four ratios.
pub fn slab_sweep(a: f64, norm: &MinkowskiNorm, p: f64, ks: &[f64], h: Option<f64>, tol: f64) -> Result<Vec<SlabRow>> {
    if ks.is_empty() {
        return Err(Error::InvalidArgument("slab sweep needs at least one k".into()));
    }
    if !norm.check_axis_alignment() {
        log::warn!("{norm} is not axis aligned; the slab ratios need not tend to one");
    }
    let half = pi_p(p)? / 2.0;
    let payne = ((p - 1.0) / p).powf(p - 1.0) * half.powf(p);
    ks.iter()
        .map(|&k| {
            let domain = ConvexPolygon::rectangle(a, k)?;
            let h = h.unwrap_or_else(|| Grid::default_spacing(&domain));
            let mesh = build_mesh(&domain, h)?;
            let eigen = solve_eigen_on(mesh.clone(), domain.provenance(), norm, p, tol)?;
            let torsion = solve_torsion_on(mesh, domain.provenance(), norm, p, tol)?;
            let cheeger = cheeger_estimate(&domain, norm, DEFAULT_SWEEP)?;
            let rf = cheeger.inradius;
            log::info!("slab k = {k}: λ = {:.8}, M_v = {:.8}, h_F = {:.8}", eigen.lambda, torsion.max, cheeger.h_est);
            Ok(SlabRow {
                k,
                h,
                r1: eigen.lambda * rf.powf(p) / half.powf(p),
                r2: cheeger.h_est * rf,
                r3: domain.perimeter_f(norm) * rf / domain.area(),
                r4: eigen.lambda * torsion.max.powf(p - 1.0) / payne,
            })
        })
        .collect()
}

/// Writes the sweep as CSV with header `k,r1,r2,r3,r4`.
pub fn write_slab_csv(rows: &[SlabRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "r1", "r2", "r3", "r4"])?;
    for r in rows {
        w.write_record([r.k, r.r1, r.r2, r.r3, r.r4].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header() {
        let row = SlabRow { k: 2.0, h: 0.1, r1: 1.25, r2: 1.5, r3: 1.5, r4: 1.1 };
        let mut buf = Vec::new();
        write_slab_csv(&[row], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,r1,r2,r3,r4\n2,1.25,1.5,1.5,1.1\n");
    }

    #[test]
    fn short_sweep_decreases() {
        let norm = MinkowskiNorm::lq(2.0).unwrap();
        let rows = slab_sweep(1.0, &norm, 2.0, &[1.0, 2.0], Some(1.0 / 20.0), 1e-8).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].r1 < w[0].r1 && w[1].r2 < w[0].r2 && w[1].r3 < w[0].r3 && w[1].r4 < w[0].r4);
        }
        // Continuum r1 = 1 + 1/k², r3 = 1 + 1/k.
        assert!((rows[1].r1 - 1.25).abs() < 5e-3, "{:?}", rows[1]);
        assert!((rows[1].r3 - 1.5).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.r1 >= 1.0 - 1e-3 && r.r4 >= 1.0 - 1e-3));
    }
}
