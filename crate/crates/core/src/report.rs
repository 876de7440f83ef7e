//! Machine-readable run reports: stable field order, rationals as `p/q`
//! strings, floats at 12 significant digits, and a scoreboard keyed by
//! stable check names. Two runs with the same seed produce byte-identical
//! JSON apart from the timing block.

use crate::dual::TripleViolation;
use crate::error::{Error, Result};
use crate::scalar::ToleranceContext;
use crate::schemes::SchemeVerdict;
use crate::talg::{CornerGenerationEntry, IdentityCheck};
use crate::tmodules::WedderburnReport;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "1";

/// Format a float with 12 significant digits; the canonical float encoding
/// in reports.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema_version: String,
    pub graph: String,
    pub domain: String,
    pub seed: u64,
    pub tolerances: ToleranceContext,
    pub vertex_count: usize,
    pub diameter: usize,
    pub intersection: IntersectionSummary,
    pub bose_mesner: Option<BoseMesnerReport>,
    pub vertices: Vec<VertexReport>,
    pub scoreboard: Vec<CheckEntry>,
    pub status: String,
    pub timings_ms: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IntersectionSummary {
    pub c: Vec<i64>,
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub k_i: Vec<i64>,
    pub k: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoseMesnerReport {
    pub eigenvalues: Vec<String>,
    pub multiplicities: Vec<usize>,
    /// Dense Krein tensor `krein[h][i][j]` in the spectral ordering.
    pub krein: Vec<Vec<Vec<String>>>,
    pub orderings: Vec<Vec<usize>>,
    pub ordering_used: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VertexReport {
    pub base: usize,
    pub dual: Option<DualReport>,
    pub terwilliger: Option<TerwilligerReport>,
    pub modules: Option<ModulesReport>,
    pub schemes: Option<SchemesReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DualReport {
    pub dual_eigenvalues: Vec<String>,
    pub subconstituent_sizes: Vec<usize>,
    pub triples_checked: usize,
    pub triple_violations: Vec<TripleViolation>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TerwilligerReport {
    pub dim: usize,
    pub closure_residual: String,
    pub corners: Vec<CornerSummary>,
    pub corner_generation: Vec<CornerGenerationEntry>,
    pub identities: Vec<IdentitySummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CornerSummary {
    pub name: String,
    pub dim: usize,
    pub commutative: bool,
    pub all_symmetric: bool,
    pub max_commutator_residual: String,
    pub max_symmetry_defect: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentitySummary {
    pub name: String,
    pub residual: String,
    pub pass: bool,
}

impl From<&IdentityCheck> for IdentitySummary {
    fn from(c: &IdentityCheck) -> Self {
        IdentitySummary {
            name: c.name.clone(),
            residual: fmt_float(c.residual),
            pass: c.pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModulesReport {
    pub dim_commutant: usize,
    pub module_table: Vec<ModuleRow>,
    pub wedderburn: WedderburnSummary,
    pub endpoint_one_classes: usize,
    pub endpoint_one_eigenvalues: usize,
    pub coefficients: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModuleRow {
    pub endpoint: usize,
    pub dual_endpoint: usize,
    pub diameter: usize,
    pub shape: Vec<usize>,
    pub dim: usize,
    pub class: usize,
    pub multiplicity: usize,
    pub local_eigenvalue: Option<String>,
    pub local_sequence: Option<Vec<String>>,
    pub exact_verified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WedderburnSummary {
    pub summands: Vec<usize>,
    pub sum_of_squares: usize,
    pub dim_t: usize,
    pub dim_commutant: usize,
    pub sum_of_multiplicity_squares: usize,
    pub primary_multiplicity: usize,
    pub primary_dimension: usize,
}

impl From<&WedderburnReport> for WedderburnSummary {
    fn from(w: &WedderburnReport) -> Self {
        WedderburnSummary {
            summands: w.summands.clone(),
            sum_of_squares: w.sum_of_squares,
            dim_t: w.dim_t,
            dim_commutant: w.dim_commutant,
            sum_of_multiplicity_squares: w.sum_of_multiplicity_squares,
            primary_multiplicity: w.primary_multiplicity,
            primary_dimension: w.primary_dimension,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SchemesReport {
    pub first: SchemeSummary,
    pub last: SchemeSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SchemeSummary {
    pub cell_size: usize,
    pub verdict: SchemeVerdict,
    /// Named-scheme parameter match, when one is expected for the family.
    pub named_match: Option<NamedMatch>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedMatch {
    pub expected: String,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckEntry {
    /// Stable human-chosen anchor, e.g. `sharpness`.
    pub key: String,
    /// The identity or property being checked, in plain ASCII.
    pub statement: String,
    pub pass: bool,
    pub detail: String,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.scoreboard.iter().all(|c| c.pass)
    }
}

pub fn emit_json(report: &Report, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_golden(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Equality up to the timing block.
pub fn reports_equivalent(a: &Report, b: &Report) -> bool {
    let strip = |r: &Report| -> serde_json::Value {
        let mut v = serde_json::to_value(r).expect("report serializes");
        v.as_object_mut().unwrap().remove("timings_ms");
        v
    };
    strip(a) == strip(b)
}

/// Human-readable scoreboard + module table.
pub fn render_text(report: &Report) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "graph {}  |X| = {}  D = {}  domain = {}  seed = {}",
        report.graph, report.vertex_count, report.diameter, report.domain, report.seed
    );
    let _ = writeln!(
        out,
        "intersection numbers: c = {:?}, a = {:?}, b = {:?}, k_i = {:?}",
        report.intersection.c, report.intersection.a, report.intersection.b, report.intersection.k_i
    );
    if let Some(bm) = &report.bose_mesner {
        let _ = writeln!(
            out,
            "eigenvalues {:?}  multiplicities {:?}  orderings {:?}",
            bm.eigenvalues, bm.multiplicities, bm.orderings
        );
    }
    for v in &report.vertices {
        let _ = writeln!(out, "-- base vertex {}", v.base);
        if let Some(t) = &v.terwilliger {
            let _ = writeln!(out, "   dim T = {}", t.dim);
            for c in &t.corners {
                let _ = writeln!(
                    out,
                    "   corner {}: dim {} commutative {} symmetric {}",
                    c.name, c.dim, c.commutative, c.all_symmetric
                );
            }
        }
        if let Some(m) = &v.modules {
            let _ = writeln!(
                out,
                "   modules (r, s, d, shape, dim, class, mult); dim commutant = {}",
                m.dim_commutant
            );
            for row in &m.module_table {
                let _ = writeln!(
                    out,
                    "     ({}, {}, {}, {:?}, {}, {}, {})",
                    row.endpoint,
                    row.dual_endpoint,
                    row.diameter,
                    row.shape,
                    row.dim,
                    row.class,
                    row.multiplicity
                );
            }
            let _ = writeln!(
                out,
                "   wedderburn summands {:?}: sum sq {} = dim T {}",
                m.wedderburn.summands, m.wedderburn.sum_of_squares, m.wedderburn.dim_t
            );
        }
        if let Some(s) = &v.schemes {
            let _ = writeln!(
                out,
                "   schemes: first {} classes (is_scheme {}), last {} classes (is_scheme {})",
                s.first.verdict.class_count,
                s.first.verdict.is_scheme,
                s.last.verdict.class_count,
                s.last.verdict.is_scheme
            );
        }
    }
    let _ = writeln!(out, "scoreboard:");
    for c in &report.scoreboard {
        let _ = writeln!(
            out,
            "  [{}] {:<40} {}",
            if c.pass { "pass" } else { "FAIL" },
            c.key,
            c.detail
        );
    }
    let _ = writeln!(out, "status: {}", report.status);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_stable_and_12_digits() {
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(-12345.678), "-1.23456780000e4");
    }
}
