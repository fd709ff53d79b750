//! Solves the finite-box Bethe equations for ground and excited states
//! across couplings, including the approach to free fermions.
//!
//! Run with `cargo run --release --example solve_bethe`.

use std::f64::consts::PI;

use qnls::solver::{ground_state_quantum_numbers, solve, BoxSpec, QuantumNumbers};

fn main() -> qnls::Result<()> {
    let length = 2.0 * PI;
    println!("{:>2} {:>8} {:>12} {:>6}  rapidities", "N", "c", "residual", "iters");
    for n in 1..=5 {
        for c in [0.1, 1.0, 10.0, 1e4] {
            let spec = BoxSpec::new(length, c, n)?;
            let sol = solve(&spec, &ground_state_quantum_numbers(n))?;
            let k: Vec<String> = sol.k().iter().map(|x| format!("{x:.6}")).collect();
            println!("{n:>2} {c:>8.1e} {:>12.2e} {:>6}  {}", sol.residual_product, sol.iterations, k.join(" "));
        }
    }

    let spec = BoxSpec::new(length, 1e4, 4)?;
    let qn = ground_state_quantum_numbers(4);
    let sol = solve(&spec, &qn)?;
    let dev = sol.k().iter().zip(qn.values()).map(|(k, i)| (k - 2.0 * PI * i / length).abs()).fold(0.0, f64::max);
    println!("\nc = 1e4, N = 4: max |k - 2 pi I / L| = {dev:.3e} (5/c = {:.1e})", 5.0 / spec.c());

    let excited: QuantumNumbers = "-1,0,2".parse()?;
    let spec = BoxSpec::new(length, 1.0, 3)?;
    let sol = solve(&spec, &excited)?;
    println!("\n{}", sol.to_json(&spec));
    Ok(())
}
