//! Configuration, orchestration and reporting for the verification suites.

mod config;
mod report;
mod suites;

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub use config::{parse_complex, Mode, RunConfig, Suite, Task, KEYS};
pub use report::{
    is_registered_anchor, persist, render_markdown, AdjudicationRow, CheckRecord, Counts, Outcome, Residual,
    VerificationReport, ANCHORS, SCHEMA_VERSION,
};

use crate::error::Result;
use suites::Sink;

/// Random stream of each task, fixed so that selecting a subset of tasks
/// does not change what the others draw.
fn stream_of(task: Task) -> u64 {
    match task {
        Task::Suite(Suite::Charges) => 1,
        Task::Suite(Suite::Bethe) => 2,
        Task::Suite(Suite::Transfer) => 3,
        Task::Suite(Suite::Lattice) => 4,
        Task::Suite(Suite::Aop) => 5,
        Task::BetheSolve => 6,
        Task::TransferExpand => 7,
        Task::LatticeRtt => 8,
        Task::LatticeCommute => 9,
        Task::LatticeContinuum => 10,
        Task::AopCheck => 11,
    }
}

fn run_one(cfg: &RunConfig, task: Task) -> Sink {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream_of(task));
    let mut sink = Sink::default();
    let outcome = catch_unwind(AssertUnwindSafe(|| match cfg.mode {
        Mode::Exact => suites::run_task::<crate::scalar::Rational>(cfg, task, &mut rng, &mut sink),
        Mode::Float => suites::run_task::<f64>(cfg, task, &mut rng, &mut sink),
    }));
    if let Err(p) = outcome {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        sink.checks.push(CheckRecord {
            id: format!("harness.task.{}", task.id()),
            anchor: "harness.task",
            params: json!({}),
            residual: Residual::None,
            verdict: Outcome::Fail,
            detail: Some(format!("task aborted: {msg}")),
        });
    }
    sink
}

pub fn environment(cfg: &RunConfig) -> Value {
    json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "os": std::env::consts::OS,
        "arch": std::env::consts::ARCH,
        "mode": cfg.mode.id(),
        "seed": cfg.seed,
        "quantum_number_convention": "integers for odd N, half-odd integers for even N",
        "residual_convention": "exact-zero or remaining term count in exact mode; largest coefficient or deviation otherwise",
    })
}

/// Runs the configured tasks (concurrently) and assembles a report sorted by
/// check id. Fails only on an invalid configuration; failures inside checks
/// are recorded as `fail` verdicts.
pub fn run_suite(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let sinks: Vec<Sink> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg.tasks.iter().map(|&t| s.spawn(move || run_one(cfg, t))).collect();
        handles.into_iter().map(|h| h.join().expect("task threads catch their panics")).collect()
    });
    let mut report = VerificationReport::new(cfg.to_json(), environment(cfg));
    let mut adjudication = std::collections::BTreeMap::new();
    for sink in sinks {
        report.checks.extend(sink.checks);
        report.data.extend(sink.data);
        for (key, row) in sink.adjudication {
            let e: &mut AdjudicationRow = adjudication.entry(key).or_insert_with(|| AdjudicationRow {
                source: row.source.clone(),
                order: row.order,
                ..Default::default()
            });
            e.matches += row.matches;
            e.expected_mismatches += row.expected_mismatches;
            e.mismatches += row.mismatches;
            e.note = e.note.take().or(row.note);
        }
    }
    report.checks.sort_by(|a, b| a.id.cmp(&b.id));
    report.adjudication = adjudication.into_values().collect();
    Ok(report)
}
