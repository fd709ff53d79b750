//! Expands the transfer-matrix eigenvalue in 1/lambda for a solved state
//! and adjudicates every printed coefficient against the exact product
//! expansion.
//!
//! Run with `cargo run --release --example trace_identities`.

use std::f64::consts::PI;

use qnls::scalar::to_c64;
use qnls::solver::{solve, BoxSpec, QuantumNumbers};
use qnls::transfer::{
    asymptotic_product_series, charge_coefficients_from_formulas, exact_rapidities, log_series_check,
    remainder_check, Substitution, DEFAULT_ORDER,
};

fn main() -> qnls::Result<()> {
    let (length, c) = (2.0 * PI, 1.0);
    let spec = BoxSpec::new(length, c, 3)?;
    let sol = solve(&spec, &"-1,0,2".parse::<QuantumNumbers>()?)?;
    println!("state: k = {:?}", sol.k());

    let k = exact_rapidities(sol.k());
    let cq = qnls::scalar::Rational::from_integer(1.into());
    let series = asymptotic_product_series(&k, &cq, DEFAULT_ORDER);
    println!("\nprod (1 - ic/(lambda - k_j)) = sum a_m lambda^-m:");
    for (m, a) in series.coeffs().iter().enumerate() {
        println!("  a_{m} = {:.10}", to_c64(a));
    }

    println!("\n{:<26} {:>5} {:>18}  note", "source", "order", "verdict");
    for set in charge_coefficients_from_formulas(&k, &cq, Substitution::Eigenvalue)? {
        for ch in &set.checks {
            println!("{:<26} {:>5} {:>18}  {}", ch.source.id(), ch.order, ch.verdict.id(), ch.note.unwrap_or(""));
        }
    }
    println!("\nlogarithm:");
    for ch in log_series_check(&k, &cq, Substitution::Eigenvalue)? {
        println!("{:<26} {:>5} {:>18}", ch.source.id(), ch.order, ch.verdict.id());
    }

    let grid: Vec<f64> = (1..=10).map(|j| 5.0 * j as f64).collect();
    let r = remainder_check(sol.k(), c, length, DEFAULT_ORDER, &grid)?;
    println!("\ntruncated series against direct evaluation at lambda = -i t (C = {:.3e}):", r.constant);
    for (t, d, b) in &r.points {
        println!("  t = {t:>4}  |difference| = {d:.3e}  bound = {b:.3e}");
    }
    println!("bound holds: {}", r.holds());
    Ok(())
}
