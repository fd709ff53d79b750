//! Integrability of the truncated lattice model: RTT relation, commuting
//! transfer matrices, the cutoff control, the continuum limit and the loss
//! of normal ordering.
//!
//! Run with `cargo run --release --example lattice_integrability`.

use qnls::lattice::{
    continuum_limit_rate, log_log_slope, normal_ordering_breakdown_demo, rtt_residual,
    tau_commutator_norm, tau_commutator_norm_unchecked, ContinuumSector, LatticeSpec,
};

fn main() -> qnls::Result<()> {
    let one_site = LatticeSpec::new(1, 4, 0.3, 1.0)?;
    let rtt = rtt_residual(0.4, -1.1, &one_site)?;
    let (ordering, residual) = rtt.best();
    println!("RTT, one site, d = 4: {residual:.2e} with {}", ordering.id());
    println!("  other ordering: {:.2e}", rtt.r_left.max(rtt.r_right));

    println!("\n[tau(l), tau(m)] with l = 0.3, m = -1.4");
    println!("{:>3} {:>3} {:>12} {:>12} {:>12}", "M", "N", "d = N + 2", "d = N + 1", "d = N");
    for m in 1..=4 {
        for n in 1..=3 {
            let safe = tau_commutator_norm(0.3, -1.4, &LatticeSpec::new(m, n + 2, 0.25, 1.0)?, n)?;
            let tight = tau_commutator_norm_unchecked(0.3, -1.4, &LatticeSpec::new(m, n + 1, 0.25, 1.0)?, n)?;
            let leaky = tau_commutator_norm_unchecked(0.3, -1.4, &LatticeSpec::new(m, n, 0.25, 1.0)?, n)?;
            println!("{m:>3} {n:>3} {safe:>12.2e} {tight:>12.2e} {leaky:>12.2e}");
        }
    }

    for sector in [ContinuumSector::Vacuum, ContinuumSector::OneParticle { mode: 1 }] {
        let r = continuum_limit_rate(1.3, 2.0, 1.0, &[8, 16, 32, 64], sector)?;
        println!("\ncontinuum limit, {sector:?}: fitted order {:.3}", r.order);
        for (m, step, err) in &r.points {
            println!("  M = {m:>3}  step = {step:.5}  error = {err:.3e}");
        }
    }

    println!("\nnormal ordering, A entry, two sites, d = 3");
    let mut pts = Vec::new();
    for j in 2..8 {
        let step = 2f64.powi(-j);
        let rep = normal_ordering_breakdown_demo(0.5, &LatticeSpec::new(2, 3, step, 1.0)?)?;
        println!("  step = {step:.5}  difference = {:.3e}", rep.difference);
        pts.push((step, rep.difference));
    }
    println!("  fitted order in the step: {:.3}", log_log_slope(&pts));
    let single = normal_ordering_breakdown_demo(0.5, &LatticeSpec::new(1, 3, 0.25, 1.0)?)?;
    println!("  one site: difference = {:.1e}", single.difference);
    Ok(())
}
