use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Registered anchors: `(id, what the check establishes)`. The topic of an
/// anchor is the part before the first dot.
pub const ANCHORS: [(&str, &str); 26] = [
    ("aop.bvp", "A(lambda) f solves the differential equation and keeps the contact bracket"),
    ("aop.bvp_generic_three", "three-particle smooth inputs: the equation holds, the bracket equality does not"),
    ("aop.eigenvalue", "Bethe states are eigenfunctions of A(lambda) with prod (lambda - k - ic)/(lambda - k)"),
    ("aop.nonuniformity", "the dropped boundary term is not small at separation 1/t"),
    ("aop.quadrature", "closed-form A(lambda) agrees with nested quadrature of its definition"),
    ("aop.truncation", "interior truncation error of the large-lambda expansion decays as t^-(m+1)"),
    ("bethe.excited", "excited states satisfy the product form of the Bethe equations"),
    ("bethe.solve", "ground states satisfy the product form of the Bethe equations"),
    ("bethe.tonks", "strong-coupling rapidities approach 2 pi I / L"),
    ("charges.boundary.control", "a non-Bethe plane wave violates the Hamiltonian contact condition"),
    ("charges.boundary.h2", "Hamiltonian contact condition at x_{j+1} = x_j"),
    ("charges.boundary.j3", "J3 contact condition, bracket differentiated along the other coordinates"),
    ("charges.boundary.j4", "J4 contact condition including the delta layers"),
    ("charges.composition", "H3 and H4 eigenvalues rebuilt from H1, J2, J3, J4 (Newton identities)"),
    ("charges.g4", "regularized G4 - H4 expectation diverges like 1/eps"),
    ("charges.interior", "free differential part reproduces the eigenvalue on the ordered region"),
    ("lattice.commute", "transfer matrices commute in a particle-number sector"),
    ("lattice.continuum", "lattice transfer eigenvalue converges to the continuum one"),
    ("lattice.cutoff_control", "commutator with a cutoff below n + 2"),
    ("lattice.normal_ordering", "normal-ordered and exact square roots differ at second order in the step"),
    ("lattice.rtt", "RTT relation on truncated Fock space"),
    ("transfer.coefficients", "A0..A3 from the printed tables against the product expansion"),
    ("transfer.log", "printed logarithmic expansions against the log of the product expansion"),
    ("transfer.remainder", "truncated series against direct evaluation along lambda = -i t"),
    ("harness.task", "a task that failed before producing its checks"),
    ("bethe.single", "the requested state satisfies the product form of the Bethe equations"),
];

pub fn is_registered_anchor(anchor: &str) -> bool {
    ANCHORS.iter().any(|(a, _)| *a == anchor)
}

fn topic_title(topic: &str) -> &'static str {
    match topic {
        "charges" => "Conserved charges on Bethe wavefunctions",
        "bethe" => "Finite-box Bethe equations",
        "transfer" => "Transfer-matrix eigenvalue and trace identities",
        "lattice" => "Lattice model integrability",
        "aop" => "The integral operator A(lambda)",
        _ => "Harness",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    ExpectedMismatch,
}

impl Outcome {
    pub fn id(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::ExpectedMismatch => "expected-mismatch",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

/// Size of whatever was supposed to vanish (or the measured quantity).
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    /// Exact arithmetic, nothing left.
    ExactZero,
    /// Exact arithmetic, this many terms left.
    ExactTerms(usize),
    Float(f64),
    None,
}

impl Residual {
    pub fn to_json(&self) -> Value {
        match self {
            Residual::ExactZero => json!("exact-zero"),
            Residual::ExactTerms(n) => json!({"terms": n}),
            Residual::Float(x) => json!(x),
            Residual::None => Value::Null,
        }
    }

    fn cell(&self) -> String {
        match self {
            Residual::ExactZero => "exact 0".into(),
            Residual::ExactTerms(n) => format!("{n} terms"),
            Residual::Float(x) => format!("{x:.3e}"),
            Residual::None => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: &'static str,
    pub params: Value,
    pub residual: Residual,
    pub verdict: Outcome,
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn topic(&self) -> &str {
        self.anchor.split('.').next().unwrap_or("harness")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "anchor": self.anchor,
            "params": self.params,
            "residual": self.residual.to_json(),
            "verdict": self.verdict.id(),
            "detail": self.detail,
        })
    }
}

/// Verdict counts for one printed coefficient across all states checked.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdjudicationRow {
    pub source: String,
    pub order: usize,
    pub matches: usize,
    pub expected_mismatches: usize,
    pub mismatches: usize,
    pub note: Option<String>,
}

impl AdjudicationRow {
    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source,
            "order": self.order,
            "match": self.matches,
            "expected_mismatch": self.expected_mismatches,
            "mismatch": self.mismatches,
            "note": self.note,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub expected_mismatch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub config: Value,
    pub environment: Value,
    /// Sorted by id.
    pub checks: Vec<CheckRecord>,
    /// Keyed by `(source, order)`.
    pub adjudication: Vec<AdjudicationRow>,
    /// Task outputs (solutions, coefficient tables, scans), keyed by name.
    pub data: BTreeMap<String, Value>,
}

impl VerificationReport {
    pub fn new(config: Value, environment: Value) -> Self {
        Self {
            config,
            environment,
            checks: Vec::new(),
            adjudication: Vec::new(),
            data: BTreeMap::new(),
        }
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for r in &self.checks {
            match r.verdict {
                Outcome::Pass => c.pass += 1,
                Outcome::Fail => c.fail += 1,
                Outcome::ExpectedMismatch => c.expected_mismatch += 1,
            }
        }
        c
    }

    pub fn passed(&self) -> bool {
        self.counts().fail == 0
    }

    pub fn find(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> Value {
        let c = self.counts();
        json!({
            "schema": SCHEMA_VERSION,
            "config": self.config,
            "environment": self.environment,
            "summary": {
                "checks": self.checks.len(),
                "pass": c.pass,
                "fail": c.fail,
                "expected_mismatch": c.expected_mismatch,
            },
            "checks": self.checks.iter().map(CheckRecord::to_json).collect::<Vec<_>>(),
            "adjudication": self.adjudication.iter().map(AdjudicationRow::to_json).collect::<Vec<_>>(),
            "data": self.data,
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

/// Human-readable report: one table per topic, then the coefficient
/// adjudication table.
pub fn render_markdown(report: &VerificationReport) -> String {
    let mut out = String::from("# Verification report\n");
    if report.checks.is_empty() && report.adjudication.is_empty() {
        return out;
    }
    let c = report.counts();
    let _ = writeln!(
        out,
        "\n{} checks: {} pass, {} fail, {} expected mismatch.",
        report.checks.len(),
        c.pass,
        c.fail,
        c.expected_mismatch
    );
    let mut topics: BTreeMap<&str, Vec<&CheckRecord>> = BTreeMap::new();
    for r in &report.checks {
        topics.entry(r.topic()).or_default().push(r);
    }
    for (topic, rows) in topics {
        let _ = writeln!(out, "\n## {}\n", topic_title(topic));
        out.push_str("| check | verdict | residual | anchor | detail |\n|---|---|---|---|---|\n");
        for r in rows {
            let verdict = match r.verdict {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::ExpectedMismatch => "EXPECTED MISMATCH",
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                r.id,
                verdict,
                r.residual.cell(),
                r.anchor,
                md_escape(r.detail.as_deref().unwrap_or(""))
            );
        }
    }
    if !report.adjudication.is_empty() {
        out.push_str("\n## Coefficient adjudication\n\n");
        out.push_str("Printed coefficients of 1/lambda against the product expansion, counted over all states.\n\n");
        out.push_str("| source | order | match | expected mismatch | mismatch | note |\n|---|---|---|---|---|---|\n");
        for a in &report.adjudication {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                a.source,
                a.order,
                a.matches,
                a.expected_mismatches,
                a.mismatches,
                md_escape(a.note.as_deref().unwrap_or(""))
            );
        }
    }
    out
}

/// Writes `report.json` and `report.md` to `out_dir/<timestamp>/` and copies
/// both to `out_dir/latest/`. Returns the timestamped directory.
pub fn persist(report: &VerificationReport, out_dir: &Path) -> Result<PathBuf> {
    let io = |e: std::io::Error| Error::Config(format!("cannot write report under {}: {e}", out_dir.display()));
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut dir = out_dir.join(&stamp);
    let mut k = 1;
    while dir.exists() {
        dir = out_dir.join(format!("{stamp}-{k}"));
        k += 1;
    }
    fs::create_dir_all(&dir).map_err(io)?;
    let json = report.to_json_string();
    let md = render_markdown(report);
    fs::write(dir.join("report.json"), &json).map_err(io)?;
    fs::write(dir.join("report.md"), &md).map_err(io)?;
    let latest = out_dir.join("latest");
    if latest.exists() {
        fs::remove_dir_all(&latest).map_err(io)?;
    }
    fs::create_dir_all(&latest).map_err(io)?;
    fs::write(latest.join("report.json"), &json).map_err(io)?;
    fs::write(latest.join("report.md"), &md).map_err(io)?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, verdict: Outcome) -> CheckRecord {
        CheckRecord {
            id: id.into(),
            anchor: "bethe.solve",
            params: json!({}),
            residual: Residual::Float(1e-12),
            verdict,
            detail: None,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = VerificationReport::new(json!({}), json!({}));
        assert_eq!(render_markdown(&r), "# Verification report\n");
        assert_eq!(r.to_json()["schema"], json!(1));
    }

    #[test]
    fn single_failure_gives_one_fail_row() {
        let mut r = VerificationReport::new(json!({}), json!({}));
        r.checks.push(record("bethe.a", Outcome::Pass));
        r.checks.push(record("bethe.b", Outcome::Fail));
        let md = render_markdown(&r);
        assert_eq!(md.lines().filter(|l| l.contains("| FAIL |")).count(), 1);
        assert_eq!(md.lines().filter(|l| l.starts_with("| bethe.")).count(), 2);
        assert!(!r.passed());
    }

    #[test]
    fn anchors_are_unique() {
        let mut ids: Vec<&str> = ANCHORS.iter().map(|a| a.0).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), ANCHORS.len());
    }

    #[test]
    fn persist_writes_latest() {
        let dir = tempfile::tempdir().unwrap();
        let r = VerificationReport::new(json!({}), json!({}));
        let stamped = persist(&r, dir.path()).unwrap();
        let again = persist(&r, dir.path()).unwrap();
        assert_ne!(stamped, again);
        let a = fs::read_to_string(stamped.join("report.json")).unwrap();
        let b = fs::read_to_string(dir.path().join("latest/report.json")).unwrap();
        assert_eq!(a, b);
    }
}
