//! Runs every suite through the harness and prints the Markdown report.
//!
//! Run with `cargo run --release --example full_report [-- --float]`.

use qnls::harness::{render_markdown, run_suite, Mode, RunConfig};

fn main() -> qnls::Result<()> {
    let mut cfg = RunConfig::default();
    if std::env::args().any(|a| a == "--float") {
        cfg.mode = Mode::Float;
    }
    let report = run_suite(&cfg)?;
    print!("{}", render_markdown(&report));
    let counts = report.counts();
    eprintln!("{} pass, {} fail, {} expected mismatch", counts.pass, counts.fail, counts.expected_mismatch);
    Ok(())
}
