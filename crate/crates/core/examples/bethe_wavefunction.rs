//! Builds a Bethe wavefunction in exact arithmetic, shows its plane-wave
//! terms and checks symmetry and the contact condition.
//!
//! Run with `cargo run --example bethe_wavefunction`.

use qnls::charges::boundary_residual_h2;
use qnls::scalar::q;
use qnls::symwave::{build_bethe, Coupling, RapiditySet};

fn main() -> qnls::Result<()> {
    let raps = RapiditySet::new(vec![q(-1, 2), q(1, 3), q(2, 1)])?;
    let c = q(3, 2);
    let w = build_bethe(raps, Coupling::new(c.clone())?)?;
    println!("{w}: {} plane waves on x1 < x2 < x3", w.canonical().len());
    for t in w.canonical().terms() {
        let freq: Vec<String> = t.freq.iter().map(|k| k.re.to_string()).collect();
        println!("  ({} + {} i) exp(i [{}] . x)", t.coeff.re, t.coeff.im, freq.join(", "));
    }

    let p = [0.3, -0.8, 1.1];
    let swapped = [-0.8, 0.3, 1.1];
    println!("\nchi{p:?} = {:.6}", w.evaluate(&p));
    println!("chi{swapped:?} = {:.6}", w.evaluate(&swapped));

    for j in 0..2 {
        let r = boundary_residual_h2(w.canonical(), &c, j);
        println!("contact condition at x{} = x{}: {} residual terms", j + 2, j + 1, r.len());
    }
    println!("\n{}", qnls::symwave::summary_json(&w));
    Ok(())
}
