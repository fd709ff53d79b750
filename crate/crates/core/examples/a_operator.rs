//! The integral operator A(lambda): eigenvalue on Bethe states, agreement
//! with direct quadrature, the boundary value problem and the non-uniform
//! large-lambda expansion.
//!
//! Run with `cargo run --release --example a_operator`.

use num_complex::{Complex, Complex64};
use qnls::aop::{
    apply_a, apply_a_quadrature, asymptotic_expand, bvp_residual, eigenvalue_check, nonuniformity_scan,
    truncation_exponent, SectorFunction, SpectralParameter,
};
use qnls::quadrature::QuadOptions;
use qnls::scalar::{cq, q};
use qnls::symwave::{build_bethe, Coupling, ExpPoly, RapiditySet, Term};

fn main() -> qnls::Result<()> {
    let c = q(3, 4);
    let lambda = SpectralParameter::new(cq(q(1, 1), q(-3, 1)))?;
    for raps in [vec![q(1, 1)], vec![q(1, 1), q(2, 1)], vec![q(-1, 2), q(1, 3), q(2, 1)]] {
        let w = build_bethe(RapiditySet::new(raps)?, Coupling::new(c.clone())?)?;
        let ch = eigenvalue_check(&lambda, &w)?;
        let f = SectorFunction::from_bethe(&w);
        let g = apply_a(&lambda, &c, &f)?;
        println!(
            "{w}: eigenvalue {:.6}, exact residual terms {}, bvp zero {}",
            qnls::scalar::to_c64(&ch.expected),
            ch.residual.len(),
            bvp_residual(&lambda, &c, &f, &g).is_zero()
        );
    }

    let w = build_bethe(RapiditySet::new(vec![0.4, 1.3])?, Coupling::new(0.8)?)?;
    let f = SectorFunction::from_bethe(&w);
    let l = Complex64::new(0.3, -1.5);
    let g = apply_a(&SpectralParameter::new(l)?, &0.8, &f)?;
    let point = [-0.2, 0.5];
    let numeric = apply_a_quadrature(l, 0.8, &f, &point, QuadOptions::with_rel_tol(1e-11))?;
    println!("\nclosed form {:.12}\nquadrature  {numeric:.12}", g.evaluate(&point));

    let one = Complex::new(1.0, 0.0);
    let smooth = SectorFunction::new(ExpPoly::from_terms(
        2,
        vec![Term::real(one, vec![0.7, -1.2]), Term::real(one, vec![-1.2, 0.7])],
    ));
    let grid = [20.0, 40.0, 80.0, 160.0];
    let pts = asymptotic_expand(&smooth, 0.8, 0.0, 1.0, &grid)?;
    println!("\ninterior truncation error exponents (expected m + 1):");
    for m in 0..=3 {
        println!("  m = {m}: {:.4}", truncation_exponent(&pts, m));
    }
    println!("\nboundary term at separation 1/t:");
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "boundary", "e^-1 bound", "retained");
    for p in nonuniformity_scan(&smooth, 0.8, 0.3, &[10.0, 20.0, 40.0, 80.0])? {
        println!("{:>6} {:>12.4e} {:>12.4e} {:>12.4e}", p.t, p.boundary, p.bound, p.retained);
    }
    Ok(())
}
