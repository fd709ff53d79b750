//! The regularized `G4 - H4` expectation value diverges like `1 / eps`.
//!
//! Run with `cargo run --release --example g4_pathology`.

use qnls::charges::{default_widths, g4_defect_scan, G4ScanConfig};
use qnls::symwave::{build_bethe, Coupling, RapiditySet};

fn main() -> qnls::Result<()> {
    let cfg = G4ScanConfig::default();
    for raps in [vec![1.0, 2.0], vec![-1.0, 0.5, 2.0]] {
        let w = build_bethe(RapiditySet::new(raps)?, Coupling::new(1.0)?)?;
        let start = std::time::Instant::now();
        let scan = g4_defect_scan(&w, &default_widths(), &cfg)?;
        println!("{w}");
        println!("{:>12} {:>16} {:>14}", "eps", "defect", "remainder");
        for (p, r) in scan.points.iter().zip(&scan.remainder) {
            println!("{:>12.3e} {:>16.8e} {:>14.6e}", p.epsilon, p.defect, r);
        }
        println!(
            "log-log slope {:.4}, fit a/eps + b + d eps: a = {:.6}, b = {:.6}, d = {:.6}, bounded remainder: {} ({:.1?})\n",
            scan.slope,
            scan.a,
            scan.b,
            scan.d,
            scan.remainder_bounded(),
            start.elapsed()
        );
    }
    Ok(())
}
