use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The inequalities evaluated on every case. Each is stored as
/// `lower ≤ lhs ≤ rhs` (most have no `lower`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `(π_p/2)^p / R_F^p ≤ λ`.
    Hersch,
    /// `(h_F/p)^p ≤ λ`.
    Cheeger,
    /// `(π_p/(2N))^p h_F^p ≤ λ`.
    HerschCheeger,
    /// `λ ≤ (π_p/2)^p h_F^p`.
    ReverseCheeger,
    /// `λ ≤ (π_p/2)^p (P_F/|Ω|)^p`.
    Polya,
    /// `((p-1)/p)^{p-1} (π_p/2)^p ≤ λ M_v^{p-1}`.
    Payne,
    /// `λ (T/|Ω|)^{p-1} ≤ λ M_v^{p-1} ≤ (|Ω| M_v / T)^{p-1}`.
    FunctionalChain,
    /// `E_F^p ≤ 1/p`.
    EfficiencyHolder,
    /// `E_F ≤ (p-1)^{-1/p} (2/π_p)^{1/(p-1)}`.
    EfficiencyPayneStakgold,
    /// `1/R_F ≤ h_F`.
    CheegerInradiusLower,
    /// `h_F ≤ N/R_F`.
    CheegerInradiusUpper,
    /// `N/R ≤ h_F` with `|W_R| = |Ω|`.
    CheegerFaberKrahn,
    /// `h_F - N/R ≤ N(1/R_F - 1/R)` with `|W_R| = |Ω|`.
    CheegerStability,
    /// `R_F^q/(q N^{q-1}) ≤ M_v ≤ R_F^q/q`.
    TorsionMax,
    /// `N κ^{1/N} |Ω|^{1-1/N} ≤ P_F(Ω)`.
    Isoperimetric,
    /// `∫u^p ≤ M^p |Ω|/p`.
    MassBound,
}

impl InequalityId {
    pub const ALL: [InequalityId; 16] = [
        InequalityId::Hersch,
        InequalityId::Cheeger,
        InequalityId::HerschCheeger,
        InequalityId::ReverseCheeger,
        InequalityId::Polya,
        InequalityId::Payne,
        InequalityId::FunctionalChain,
        InequalityId::EfficiencyHolder,
        InequalityId::EfficiencyPayneStakgold,
        InequalityId::CheegerInradiusLower,
        InequalityId::CheegerInradiusUpper,
        InequalityId::CheegerFaberKrahn,
        InequalityId::CheegerStability,
        InequalityId::TorsionMax,
        InequalityId::Isoperimetric,
        InequalityId::MassBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::Hersch => "hersch",
            InequalityId::Cheeger => "cheeger",
            InequalityId::HerschCheeger => "hersch_cheeger",
            InequalityId::ReverseCheeger => "reverse_cheeger",
            InequalityId::Polya => "polya",
            InequalityId::Payne => "payne",
            InequalityId::FunctionalChain => "functional_chain",
            InequalityId::EfficiencyHolder => "efficiency_holder",
            InequalityId::EfficiencyPayneStakgold => "efficiency_payne_stakgold",
            InequalityId::CheegerInradiusLower => "cheeger_inradius_lower",
            InequalityId::CheegerInradiusUpper => "cheeger_inradius_upper",
            InequalityId::CheegerFaberKrahn => "cheeger_faber_krahn",
            InequalityId::CheegerStability => "cheeger_stability",
            InequalityId::TorsionMax => "torsion_max",
            InequalityId::Isoperimetric => "isoperimetric",
            InequalityId::MassBound => "mass_bound",
        }
    }

    /// The inequality in words, carried into reports.
    pub fn statement(self) -> &'static str {
        match self {
            InequalityId::Hersch => "λ ≥ (π_p/2)^p / R_F^p",
            InequalityId::Cheeger => "λ ≥ (h_F/p)^p",
            InequalityId::HerschCheeger => "λ ≥ (π_p/(2N))^p h_F^p",
            InequalityId::ReverseCheeger => "λ ≤ (π_p/2)^p h_F^p",
            InequalityId::Polya => "λ ≤ (π_p/2)^p (P_F/|Ω|)^p",
            InequalityId::Payne => "λ M_v^(p-1) ≥ ((p-1)/p)^(p-1) (π_p/2)^p",
            InequalityId::FunctionalChain => "λ (T/|Ω|)^(p-1) ≤ λ M_v^(p-1) ≤ (|Ω| M_v/T)^(p-1)",
            InequalityId::EfficiencyHolder => "E_F^p ≤ 1/p",
            InequalityId::EfficiencyPayneStakgold => "E_F ≤ (p-1)^(-1/p) (2/π_p)^(1/(p-1))",
            InequalityId::CheegerInradiusLower => "h_F ≥ 1/R_F",
            InequalityId::CheegerInradiusUpper => "h_F ≤ N/R_F",
            InequalityId::CheegerFaberKrahn => "h_F(Ω) ≥ h_F(W_R), |W_R| = |Ω|",
            InequalityId::CheegerStability => "h_F(Ω) - h_F(W_R) ≤ N (1/R_F - 1/R)",
            InequalityId::TorsionMax => "R_F^q/(q N^(q-1)) ≤ M_v ≤ R_F^q/q",
            InequalityId::Isoperimetric => "P_F(Ω) ≥ N κ^(1/N) |Ω|^(1-1/N)",
            InequalityId::MassBound => "∫u^p ≤ M^p |Ω|/p",
        }
    }

    /// Whether the quantities involved come from the grid solvers rather than
    /// exact polygon geometry.
    pub fn uses_solution(self) -> bool {
        !matches!(
            self,
            InequalityId::CheegerInradiusLower
                | InequalityId::CheegerInradiusUpper
                | InequalityId::CheegerFaberKrahn
                | InequalityId::CheegerStability
                | InequalityId::Isoperimetric
        )
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s.trim())
            .ok_or_else(|| Error::parse("inequality id", s, "unknown id"))
    }
}

/// Allowed violation `(rel + grid · h/R_F) |rhs|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub rel: f64,
    #[serde(default)]
    pub grid: f64,
}

impl Tolerance {
    pub fn allowed(&self, rhs: f64, h: f64, inradius: f64) -> f64 {
        (self.rel + self.grid * h / inradius) * rhs.abs()
    }
}

/// Per-inequality tolerances; ids missing from the table use the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceTable {
    pub default: Tolerance,
    pub overrides: BTreeMap<InequalityId, Tolerance>,
}

impl Default for ToleranceTable {
    /// `1e-6` relative everywhere, plus a grid term `0.05 h/R_F` for the
    /// inequalities that involve solver output. On the default catalog the
    /// largest discretization violation is about `0.015 h/R_F`, from `M_v`
    /// on shapes that nearly attain one of its bounds.
    fn default() -> Self {
        let grid = Tolerance { rel: 1e-6, grid: 0.05 };
        let overrides = InequalityId::ALL.into_iter().filter(|id| id.uses_solution()).map(|id| (id, grid)).collect();
        Self { default: Tolerance { rel: 1e-6, grid: 0.0 }, overrides }
    }
}

impl ToleranceTable {
    pub fn get(&self, id: InequalityId) -> Tolerance {
        self.overrides.get(&id).copied().unwrap_or(self.default)
    }
}

/// One evaluated inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub id: InequalityId,
    pub statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, or `min(lhs - lower, rhs - lhs)` for a chain; nonnegative
    /// when the inequality holds exactly.
    pub slack: f64,
    /// Largest violation still accepted.
    pub tolerance: f64,
    pub pass: bool,
}

impl InequalityRecord {
    pub fn new(id: InequalityId, lower: Option<f64>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let mut slack = rhs - lhs;
        if let Some(lo) = lower {
            slack = slack.min(lhs - lo);
        }
        let pass = slack.is_finite() && slack >= -tolerance;
        Self { id, statement: id.statement().to_string(), lower, lhs, rhs, slack, tolerance, pass }
    }
}

/// Case quantities entering the inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantities {
    pub p: f64,
    pub h: f64,
    pub area: f64,
    pub perimeter_f: f64,
    pub inradius: f64,
    /// `R` with `|W_R| = |Ω|`.
    pub volume_radius: f64,
    /// `|W_1|`.
    pub wulff_volume: f64,
    pub pi_p: f64,
    pub cheeger: f64,
    pub lambda: f64,
    pub torsion: f64,
    pub torsion_max: f64,
    /// `E_F(p, Ω)`.
    pub efficiency: f64,
    /// `∫u^p` with `max u = 1`.
    pub mass: f64,
}

const N: f64 = 2.0;

/// Evaluates every inequality on `q`.
pub fn evaluate(q: &Quantities, table: &ToleranceTable) -> Vec<InequalityRecord> {
    let p = q.p;
    let qc = p / (p - 1.0);
    let half = q.pi_p / 2.0;
    let (lam, rf, h) = (q.lambda, q.inradius, q.cheeger);
    let mv1 = q.torsion_max.powf(p - 1.0);
    let wulff_h = N / q.volume_radius;
    InequalityId::ALL
        .into_iter()
        .map(|id| {
            let (lower, lhs, rhs) = match id {
                InequalityId::Hersch => (None, half.powf(p) / rf.powf(p), lam),
                InequalityId::Cheeger => (None, (h / p).powf(p), lam),
                InequalityId::HerschCheeger => (None, (q.pi_p / (2.0 * N)).powf(p) * h.powf(p), lam),
                InequalityId::ReverseCheeger => (None, lam, half.powf(p) * h.powf(p)),
                InequalityId::Polya => (None, lam, half.powf(p) * (q.perimeter_f / q.area).powf(p)),
                InequalityId::Payne => (None, ((p - 1.0) / p).powf(p - 1.0) * half.powf(p), lam * mv1),
                InequalityId::FunctionalChain => (
                    Some(lam * (q.torsion / q.area).powf(p - 1.0)),
                    lam * mv1,
                    (q.area * q.torsion_max / q.torsion).powf(p - 1.0),
                ),
                InequalityId::EfficiencyHolder => (None, q.efficiency.powf(p), 1.0 / p),
                InequalityId::EfficiencyPayneStakgold => {
                    (None, q.efficiency, (p - 1.0).powf(-1.0 / p) * (2.0 / q.pi_p).powf(1.0 / (p - 1.0)))
                }
                InequalityId::CheegerInradiusLower => (None, 1.0 / rf, h),
                InequalityId::CheegerInradiusUpper => (None, h, N / rf),
                InequalityId::CheegerFaberKrahn => (None, wulff_h, h),
                InequalityId::CheegerStability => (None, h - wulff_h, N * (1.0 / rf - 1.0 / q.volume_radius)),
                InequalityId::TorsionMax => {
                    (Some(rf.powf(qc) / (qc * N.powf(qc - 1.0))), q.torsion_max, rf.powf(qc) / qc)
                }
                InequalityId::Isoperimetric => {
                    (None, N * q.wulff_volume.powf(1.0 / N) * q.area.powf(1.0 - 1.0 / N), q.perimeter_f)
                }
                InequalityId::MassBound => (None, q.mass, q.area / p),
            };
            let tol = table.get(id).allowed(rhs, q.h, rf);
            InequalityRecord::new(id, lower, lhs, rhs, tol)
        })
        .collect()
}
