//! Case catalogs, inequality reports, slab sweeps and grid-convergence studies.

mod config;
mod convergence;
mod inequalities;
mod sweep;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheeger::{cheeger_estimate, DEFAULT_SWEEP};
use crate::error::{Error, Result};
use crate::geometry::{DistanceField, DomainSpec};
use crate::grid::Grid;
use crate::norms::{pi_p, MinkowskiNorm};
use crate::pde::{self, build_mesh, efficiency_ratio, p_function, phi_check, SolveInfo, DEFAULT_TOL};

pub use config::{Command, RunConfig, SweepConfig};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceStudy, Extrapolation};
pub use inequalities::{evaluate, InequalityId, InequalityRecord, Quantities, Tolerance, ToleranceTable};
pub use sweep::{slab_sweep, write_slab_csv, SlabRow};

/// Largest `P/λ` accepted by the discrete maximum-principle check.
pub const P_FUNCTION_TOLERANCE: f64 = 0.02;

/// One problem: a domain, a norm, an exponent and grid/solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub domain: DomainSpec,
    pub norm: MinkowskiNorm,
    pub p: f64,
    /// Grid spacing; the domain's default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl CaseSpec {
    pub fn new(domain: DomainSpec, norm: MinkowskiNorm, p: f64) -> Self {
        Self { id: None, domain, norm, p, h: None, tol: DEFAULT_TOL }
    }

    pub fn name(&self) -> String {
        self.id.clone().unwrap_or_else(|| format!("{} {} p={}", self.domain, self.norm, self.p))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidArgument(format!("{}: p must exceed 1", self.name())));
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("{}: h must be positive", self.name())));
            }
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("{}: tol must lie in (0, 1)", self.name())));
        }
        Ok(())
    }
}

/// The 36-case catalog: four domains, three norms, three exponents.
pub fn default_catalog() -> Vec<CaseSpec> {
    let domains = ["rect:1,1", "rect:1,4", "regular:6,1", "wulff:1,512"];
    let norms = ["lq:2", "lq:4", "ellipse:4,0,1"];
    let mut cases = Vec::with_capacity(36);
    for d in domains {
        for n in norms {
            for p in [1.5, 2.0, 3.0] {
                cases.push(CaseSpec::new(d.parse().unwrap(), n.parse().unwrap(), p));
            }
        }
    }
    cases
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Fail,
    /// A solver did not converge; no inequality was judged.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheegerSummary {
    pub h_est: f64,
    pub r_star: f64,
    pub lower: f64,
    pub upper: f64,
    pub fallback: bool,
}

/// Pointwise checks reported alongside the inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest `P = (p-1)F^p(∇u) + λ(u^p - 1)` away from the boundary collar,
    /// divided by `λ`.
    pub p_function_max_rel: f64,
    pub p_function_pass: bool,
    /// `max (Φ(u) - q λ^{1/(p-1)} v)` relative to `max q λ^{1/(p-1)} v`.
    pub phi_violation_rel: f64,
    /// Largest sampled anisotropic distance, below `R_F` by `O(h)`.
    pub distance_grid_max: f64,
    /// `|T - ∫F(∇v)^p| / T`.
    pub torsion_dual_gap: f64,
    /// Interior nodes where the eigenfunction vanishes; zero unless the
    /// discretization loses monotonicity next to the boundary.
    pub eigen_zero_nodes: usize,
    /// Whether `(π_p/(2N))^p h^p` exceeds `(h/p)^p`, i.e. `p ≥ 2N/π_p`.
    pub hersch_cheeger_sharper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: String,
    pub spec: CaseSpec,
    pub status: CaseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantities: Option<Quantities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<SolveInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<SolveInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cheeger: Option<CheegerSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    pub inequalities: Vec<InequalityRecord>,
}

impl CaseReport {
    fn inconclusive(spec: &CaseSpec, err: &Error) -> Self {
        Self {
            id: spec.name(),
            spec: spec.clone(),
            status: CaseStatus::Inconclusive,
            message: Some(err.to_string()),
            quantities: None,
            eigen: None,
            torsion: None,
            cheeger: None,
            diagnostics: None,
            inequalities: Vec::new(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityRecord> {
        self.inequalities.iter().filter(|r| !r.pass)
    }
}

/// Solves the eigenvalue, torsion, distance and Cheeger problems of one case
/// and evaluates every inequality. Solver non-convergence yields an
/// inconclusive report; invalid specs are errors.
pub fn run_case(spec: &CaseSpec, table: &ToleranceTable) -> Result<CaseReport> {
    spec.validate()?;
    let name = spec.name();
    let domain = spec.domain.build(&spec.norm)?;
    let norm = &spec.norm;
    let p = spec.p;
    let h = spec.h.unwrap_or_else(|| Grid::default_spacing(&domain));
    log::info!("{name}: h = {h:.6}");

    let mesh = build_mesh(&domain, h)?;
    let provenance = domain.provenance();
    let solved = pde::solve_eigen_on(mesh.clone(), provenance, norm, p, spec.tol)
        .and_then(|e| pde::solve_torsion_on(mesh, provenance, norm, p, spec.tol).map(|t| (e, t)));
    let (eigen, torsion) = match solved {
        Ok(pair) => pair,
        Err(err @ Error::NotConverged { .. }) => {
            log::warn!("{name}: {err}");
            return Ok(CaseReport::inconclusive(spec, &err));
        }
        Err(err) => return Err(err),
    };
    let distance = DistanceField::compute(&domain, norm, h)?;
    let cheeger = cheeger_estimate(&domain, norm, DEFAULT_SWEEP)?;

    let area = domain.area();
    let wulff_volume = norm.wulff_volume();
    let pp = pi_p(p)?;
    let quantities = Quantities {
        p,
        h,
        area,
        perimeter_f: domain.perimeter_f(norm),
        inradius: distance.inradius,
        volume_radius: (area / wulff_volume).sqrt(),
        wulff_volume,
        pi_p: pp,
        cheeger: cheeger.h_est,
        lambda: eigen.lambda,
        torsion: torsion.torsion,
        torsion_max: torsion.max,
        efficiency: efficiency_ratio(&eigen, area),
        mass: eigen.mesh.integrate(&eigen.u.values, |x| x.max(0.0).powf(p)),
    };
    let inequalities = evaluate(&quantities, table);

    let pf = p_function(&eigen, norm);
    let phi = phi_check(&eigen, &torsion)?;
    let diagnostics = Diagnostics {
        p_function_max_rel: pf.max / eigen.lambda,
        p_function_pass: pf.max <= P_FUNCTION_TOLERANCE * eigen.lambda,
        phi_violation_rel: phi.relative_violation,
        distance_grid_max: distance.grid_max,
        torsion_dual_gap: (torsion.torsion - torsion.dual).abs() / torsion.torsion,
        eigen_zero_nodes: eigen.u.grid.mask.iter().zip(&eigen.u.values).filter(|(&m, &v)| m && v <= 0.0).count(),
        hersch_cheeger_sharper: p * pp >= 4.0,
    };
    let status = if inequalities.iter().all(|r| r.pass) { CaseStatus::Pass } else { CaseStatus::Fail };
    Ok(CaseReport {
        id: name,
        spec: spec.clone(),
        status,
        message: None,
        quantities: Some(quantities),
        eigen: Some(eigen.info()),
        torsion: Some(torsion.info()),
        cheeger: Some(CheegerSummary {
            h_est: cheeger.h_est,
            r_star: cheeger.r_star,
            lower: cheeger.lower,
            upper: cheeger.upper,
            fallback: cheeger.fallback,
        }),
        diagnostics: Some(diagnostics),
        inequalities,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub summary: Summary,
    pub tolerances: ToleranceTable,
    pub cases: Vec<CaseReport>,
}

impl CatalogReport {
    /// Writes `report.json`, `report.csv` and one JSON file per case under
    /// `cases/`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let cases_dir = dir.join("cases");
        fs::create_dir_all(&cases_dir)?;
        for (i, case) in self.cases.iter().enumerate() {
            let path = cases_dir.join(format!("{:03}-{}.json", i + 1, slug(&case.id)));
            fs::write(path, serde_json::to_string_pretty(case)? + "\n")?;
        }
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)? + "\n")?;
        self.write_csv(dir.join("report.csv"))
    }

    /// One row per case and inequality; inconclusive cases get a single row
    /// with empty numeric fields.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["case", "domain", "norm", "p", "h", "status", "inequality", "lhs", "rhs", "slack", "tolerance", "pass"])?;
        for case in &self.cases {
            let h = case.quantities.map(|q| q.h.to_string()).unwrap_or_default();
            let head = [
                case.id.clone(),
                case.spec.domain.to_string(),
                case.spec.norm.to_string(),
                case.spec.p.to_string(),
                h,
                status_name(case.status).to_string(),
            ];
            if case.inequalities.is_empty() {
                w.write_record(head.iter().cloned().chain(std::iter::repeat_n(String::new(), 6)))?;
            }
            for r in &case.inequalities {
                let tail = [
                    r.id.to_string(),
                    r.lhs.to_string(),
                    r.rhs.to_string(),
                    r.slack.to_string(),
                    r.tolerance.to_string(),
                    r.pass.to_string(),
                ];
                w.write_record(head.iter().cloned().chain(tail))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn status_name(s: CaseStatus) -> &'static str {
    match s {
        CaseStatus::Pass => "pass",
        CaseStatus::Fail => "fail",
        CaseStatus::Inconclusive => "inconclusive",
    }
}

fn slug(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

/// Runs every case on `jobs` threads (all cores when `None`); reports come
/// back in catalog order.
pub fn run_catalog(cases: &[CaseSpec], table: &ToleranceTable, jobs: Option<usize>) -> Result<CatalogReport> {
    if cases.is_empty() {
        return Err(Error::InvalidArgument("the catalog has no cases".into()));
    }
    for c in cases {
        c.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs:?} worker threads: {e}")))?;
    let reports: Vec<CaseReport> =
        pool.install(|| cases.par_iter().map(|c| run_case(c, table)).collect::<Result<Vec<_>>>())?;
    let mut summary = Summary { cases: reports.len(), ..Summary::default() };
    for r in &reports {
        match r.status {
            CaseStatus::Pass => summary.passed += 1,
            CaseStatus::Fail => summary.failed += 1,
            CaseStatus::Inconclusive => summary.inconclusive += 1,
        }
    }
    Ok(CatalogReport { summary, tolerances: table.clone(), cases: reports })
}
