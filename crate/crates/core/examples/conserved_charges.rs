//! Eigenvalues of H1..H4 and J2..J4 on a Bethe state, the interior and
//! contact-condition residuals, and the composition identities.
//!
//! Run with `cargo run --example conserved_charges`.

use qnls::charges::{
    boundary_residual_h2, boundary_residual_j3, boundary_residual_j4, charge_eigenvalue,
    composition_identity_check, interior_residual, ChargeName,
};
use qnls::scalar::q;
use qnls::symwave::{build_bethe, Coupling, ExpPoly, RapiditySet, Term};

fn main() -> qnls::Result<()> {
    let c = q(2, 1);
    let raps = RapiditySet::new(vec![q(1, 1), q(2, 1), q(3, 1), q(5, 1)])?;
    let w = build_bethe(raps.clone(), Coupling::new(c.clone())?)?;
    println!("{w}");
    println!("{:>4} {:>10} {:>16} {:>10}", "", "formula", "eigenvalue", "residual");
    for name in ChargeName::ALL {
        let ev = charge_eigenvalue(name, &raps);
        let r = interior_residual(name, &w);
        println!("{:>4} {:>10} {:>16} {:>10}", name.to_string(), ev.formula, ev.value.to_string(), r.len());
    }

    let p = w.canonical();
    for j in 0..3 {
        let j4 = boundary_residual_j4(p, &c, j);
        println!(
            "x{} = x{}: H2 {} terms, J3 {} terms, J4 empty: {}",
            j + 2,
            j + 1,
            boundary_residual_h2(p, &c, j).len(),
            boundary_residual_j3(p, &c, j).len(),
            j4.is_empty()
        );
    }

    let plane = ExpPoly::from_terms(4, vec![Term::real(num_complex::Complex::new(q(1, 1), q(0, 1)), raps.values().to_vec())]);
    println!("single plane wave, H2 contact residual: {} terms", boundary_residual_h2(&plane, &c, 0).len());

    let comp = composition_identity_check(&raps);
    println!("\nH3 = {} and composed {}", comp.h3, comp.h3_composed);
    println!("H4 = {} and composed {}", comp.h4, comp.h4_composed);
    println!("identities hold: {}", comp.holds());
    Ok(())
}
