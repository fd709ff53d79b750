//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnls::aop::{
    apply_a, apply_a_quadrature, asymptotic_expand, bvp_residual, eigenvalue_check, nonuniformity_scan,
    sample_grid, truncation_exponent, SectorFunction, SpectralParameter,
};
use qnls::charges::{
    boundary_residual_h2, boundary_residual_j3, boundary_residual_j4, composition_identity_check,
    default_widths, g4_defect_scan, interior_residual, ChargeName, G4ScanConfig,
};
use qnls::harness::{run_suite, RunConfig};
use qnls::lattice::{
    continuum_limit_rate, rtt_residual, tau_commutator_norm, tau_commutator_norm_unchecked, ContinuumSector,
    LatticeSpec,
};
use qnls::quadrature::QuadOptions;
use qnls::scalar::{to_c64, Rational, Real};
use qnls::solver::{ground_state_quantum_numbers, solve, BoxSpec, QuantumNumbers, RapiditySolution};
use qnls::symwave::{build_bethe, Coupling, ExpPoly, RapiditySet, Term};
use qnls::transfer::{
    charge_coefficients_from_formulas, exact_rapidities, log_series_check, remainder_check, CoefficientSource,
    Substitution, Verdict, DOCUMENTED_MISMATCHES,
};

type Outcome = Result<String, String>;

fn rational_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    while out.len() < n {
        let v = Rational::from_ratio(rng.random_range(-30..=30), rng.random_range(1..=7));
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn rational_coupling(rng: &mut ChaCha8Rng) -> Rational {
    Rational::from_ratio(rng.random_range(1..=15), rng.random_range(1..=5))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    for n in 1..=4 {
        for _ in 0..20 {
            let k = rational_set(&mut rng, n);
            let c = rational_coupling(&mut rng);
            let w = build_bethe(RapiditySet::new(k.clone()).map_err(e)?, Coupling::new(c.clone()).map_err(e)?)
                .map_err(e)?;
            for name in ChargeName::ALL {
                let r = interior_residual(name, &w);
                ensure(r.is_empty(), || format!("{name} interior, n = {n}, k = {k:?}: {} terms", r.len()))?;
                checked += 1;
            }
            let p = w.canonical();
            for j in 0..n.saturating_sub(1) {
                ensure(boundary_residual_h2(p, &c, j).is_empty(), || format!("H2 contact, n = {n}, j = {j}"))?;
                checked += 1;
                if n >= 3 {
                    ensure(boundary_residual_j3(p, &c, j).is_empty(), || format!("J3 contact, n = {n}, j = {j}"))?;
                    checked += 1;
                }
                if n >= 4 {
                    ensure(boundary_residual_j4(p, &c, j).is_empty(), || format!("J4 contact, n = {n}, j = {j}"))?;
                    checked += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:.1?}"))?;
    Ok(format!("{checked} exact residuals vanish for N <= 4, 20 sets each, in {t:.1?}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for s in 0..100 {
        let n = 1 + s % 6;
        let set = RapiditySet::new(rational_set(&mut rng, n)).map_err(e)?;
        let r = composition_identity_check(&set);
        ensure(r.holds() && r.h3 == r.h3_composed && r.h4 == r.h4_composed, || {
            format!("identity fails for {:?}", set.values())
        })?;
    }
    Ok("H3 and H4 eigenvalues rebuilt exactly from H1, J2, J3, J4 for 100 sets, N <= 6".into())
}

fn criterion_3() -> Outcome {
    let w = build_bethe(RapiditySet::new(vec![1.0, 2.0]).map_err(e)?, Coupling::new(1.0).map_err(e)?).map_err(e)?;
    let widths = default_widths();
    ensure(
        widths.iter().cloned().fold(f64::INFINITY, f64::min) == 2f64.powi(-12)
            && widths.iter().cloned().fold(0.0, f64::max) == 0.25,
        || "width grid is not [2^-12, 2^-2]".into(),
    )?;
    let scan = g4_defect_scan(&w, &widths, &G4ScanConfig::default()).map_err(e)?;
    ensure((scan.slope + 1.0).abs() <= 0.02, || format!("slope {:.4}", scan.slope))?;
    ensure(scan.remainder_bounded(), || format!("remainder grows: {:?}", scan.remainder))?;
    Ok(format!(
        "slope {:.4}, defect ~ {:.4}/eps + {:.4}, largest remainder {:.3}",
        scan.slope,
        scan.a,
        scan.b,
        scan.max_remainder()
    ))
}

fn criterion_4() -> Outcome {
    let length = 2.0 * PI;
    let mut worst: f64 = 0.0;
    let mut tonks: f64 = 0.0;
    for n in 1..=5 {
        for c in [0.1, 1.0, 10.0, 1e4] {
            let spec = BoxSpec::new(length, c, n).map_err(e)?;
            let qn = ground_state_quantum_numbers(n);
            let sol = solve(&spec, &qn).map_err(e)?;
            ensure(sol.residual_product < 1e-10, || format!("n = {n}, c = {c}: {:.2e}", sol.residual_product))?;
            worst = worst.max(sol.residual_product);
            if c == 1e4 {
                for (k, i) in sol.k().iter().zip(qn.values()) {
                    let d = (k - 2.0 * PI * i / length).abs();
                    ensure(d <= 5.0 / c, || format!("Tonks deviation {d:.2e} at n = {n}"))?;
                    tonks = tonks.max(d);
                }
            }
        }
    }
    Ok(format!("largest product residual {worst:.2e}; largest Tonks deviation {tonks:.2e} <= 5e-4"))
}

fn solved_states() -> Result<Vec<(RapiditySolution, f64)>, String> {
    let mut out = Vec::new();
    for n in 1..=4 {
        for c in [0.5, 1.0, 3.0] {
            let spec = BoxSpec::new(2.0 * PI, c, n).map_err(e)?;
            out.push((solve(&spec, &ground_state_quantum_numbers(n)).map_err(e)?, c));
        }
        let excited = QuantumNumbers::from_doubled(
            ground_state_quantum_numbers(n).doubled().iter().enumerate().map(|(i, d)| d + 2 * i as i64).collect(),
        )
        .map_err(e)?;
        out.push((solve(&BoxSpec::new(2.0 * PI, 1.0, n).map_err(e)?, &excited).map_err(e)?, 1.0));
    }
    Ok(out)
}

fn criterion_5() -> Outcome {
    let states = solved_states()?;
    let mut seen = std::collections::BTreeSet::new();
    let mut oracle_report = String::new();
    for (sol, c) in &states {
        let c = *c;
        let k = exact_rapidities(sol.k());
        let cq = Rational::from_f64(c);
        let sets = charge_coefficients_from_formulas(&k, &cq, Substitution::Eigenvalue).map_err(e)?;
        let checks = sets.iter().flat_map(|s| s.checks.iter()).chain(
            log_series_check(&k, &cq, Substitution::Eigenvalue).map_err(e)?.iter(),
        ).cloned().collect::<Vec<_>>();
        for ch in &checks {
            ensure(ch.verdict != Verdict::Mismatch, || {
                format!("undocumented mismatch: {} order {} for k = {:?}", ch.source.id(), ch.order, sol.k())
            })?;
            if ch.source == CoefficientSource::ChargeTable && ch.order <= 2 {
                ensure(ch.printed == ch.oracle, || format!("A{} differs from the oracle", ch.order - 1))?;
            }
            if ch.verdict == Verdict::ExpectedMismatch {
                seen.insert((ch.source, ch.order));
                if sol.k().len() == 3 && oracle_report.len() < 400 {
                    oracle_report.push_str(&format!(
                        " {}[{}]: oracle {:.4} printed {:.4};",
                        ch.source.id(),
                        ch.order,
                        to_c64(&ch.oracle),
                        to_c64(&ch.printed)
                    ));
                }
            }
        }
        let grid: Vec<f64> = (0..=45).map(|j| 5.0 + j as f64).collect();
        let r = remainder_check(sol.k(), c, 2.0 * PI, 6, &grid).map_err(e)?;
        ensure(r.holds(), || format!("series remainder exceeds the fitted bound for k = {:?}", sol.k()))?;
    }
    for (source, order, _) in DOCUMENTED_MISMATCHES {
        ensure(seen.contains(&(source, order)), || format!("{} order {order} never reproduced", source.id()))?;
    }
    println!("      oracle values at N = 3:{oracle_report}");
    Ok(format!(
        "{} solved states: A0, A1 exact; {} documented discrepancies reproduced, none undocumented; remainder bound holds on t in [5, 50]",
        states.len(),
        DOCUMENTED_MISMATCHES.len()
    ))
}

fn criterion_6() -> Outcome {
    let one_site = LatticeSpec::new(1, 4, 0.3, 1.0).map_err(e)?;
    let mut rtt: f64 = 0.0;
    for l in [-1.1, -0.4, 0.2, 0.7, 1.5] {
        for m in [-1.3, -0.6, 0.1, 0.9, 1.8] {
            rtt = rtt.max(rtt_residual(l, m, &one_site).map_err(e)?.r_left);
        }
    }
    ensure(rtt < 1e-12, || format!("RTT residual {rtt:.2e}"))?;
    let (l, mu) = (0.3, -1.4);
    let mut comm: f64 = 0.0;
    let mut tight: f64 = 0.0;
    let mut leak: f64 = 0.0;
    for m in 1..=4 {
        for n in 1..=3 {
            comm = comm.max(tau_commutator_norm(l, mu, &LatticeSpec::new(m, n + 2, 0.25, 1.0).map_err(e)?, n).map_err(e)?);
            tight = tight.max(
                tau_commutator_norm_unchecked(l, mu, &LatticeSpec::new(m, n + 1, 0.25, 1.0).map_err(e)?, n).map_err(e)?,
            );
            leak = leak.max(
                tau_commutator_norm_unchecked(l, mu, &LatticeSpec::new(m, n, 0.25, 1.0).map_err(e)?, n).map_err(e)?,
            );
        }
    }
    ensure(comm < 1e-12, || format!("commutator {comm:.2e}"))?;
    let mut orders = Vec::new();
    for sector in [ContinuumSector::Vacuum, ContinuumSector::OneParticle { mode: 1 }] {
        let r = continuum_limit_rate(1.3, 2.0, 1.0, &[8, 16, 32, 64], sector).map_err(e)?;
        ensure(r.order >= 1.0, || format!("{sector:?}: order {:.3}", r.order))?;
        orders.push(r.order);
    }
    Ok(format!(
        "RTT {rtt:.1e}, commutator {comm:.1e}; control: d = N+1 gives {tight:.1e}, d = N gives {leak:.2}; continuum orders {:.3}, {:.3}",
        orders[0], orders[1]
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst_numeric: f64 = 0.0;
    let mut states = 0;
    for n in 1..=2 {
        for _ in 0..5 {
            let k = rational_set(&mut rng, n);
            let c = rational_coupling(&mut rng);
            let lam = Complex::new(
                Rational::from_ratio(rng.random_range(-5..=5), 2),
                -Rational::from_ratio(rng.random_range(1..=6), 2),
            );
            let l = SpectralParameter::new(lam.clone()).map_err(e)?;
            let w = build_bethe(RapiditySet::new(k).map_err(e)?, Coupling::new(c.clone()).map_err(e)?).map_err(e)?;
            let ch = eigenvalue_check(&l, &w).map_err(e)?;
            ensure(ch.exact_zero(), || format!("eigen-residual for {w}"))?;
            let f = SectorFunction::from_bethe(&w);
            let g = apply_a(&l, &c, &f).map_err(e)?;
            ensure(bvp_residual(&l, &c, &f, &g).is_zero(), || format!("BVP residual for {w}"))?;
            let ff = SectorFunction::new(ExpPoly::from_terms(
                n,
                f.canonical().terms().iter().map(|t| Term::new(to_c64(&t.coeff), t.freq.iter().map(to_c64).collect())).collect(),
            ));
            let point = &sample_grid(n)[1];
            let numeric =
                apply_a_quadrature(to_c64(&lam), c.to_f64(), &ff, point, QuadOptions::with_rel_tol(1e-11)).map_err(e)?;
            let exact = g.evaluate(point);
            let d = (numeric - exact).norm() / exact.norm().max(1.0);
            ensure(d < 1e-8, || format!("quadrature differs by {d:.2e} for {w}"))?;
            worst_numeric = worst_numeric.max(d);
            states += 1;
        }
    }
    for s in 0..10 {
        let terms = (0..1 + s % 3)
            .map(|_| {
                let coeff = Complex::new(
                    Rational::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3)),
                    Rational::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3)),
                );
                Term::real(coeff, rational_set(&mut rng, 2))
            })
            .collect();
        let f = SectorFunction::new(ExpPoly::from_terms(2, terms));
        let c = rational_coupling(&mut rng);
        let l = SpectralParameter::new(Complex::new(Rational::from_ratio(1, 3), Rational::from_ratio(-5, 2))).map_err(e)?;
        let g = apply_a(&l, &c, &f).map_err(e)?;
        let r = bvp_residual(&l, &c, &f, &g);
        ensure(r.is_zero(), || format!("crafted input {s}: {} pde terms, bracket {:?}", r.pde.len(), r.brackets.iter().map(ExpPoly::len).collect::<Vec<_>>()))?;
    }
    Ok(format!(
        "{states} Bethe states with N <= 2: exact eigen and BVP residuals vanish, quadrature within {worst_numeric:.1e}; 10 crafted inputs keep the bracket"
    ))
}

fn criterion_8() -> Outcome {
    let one = Complex64::new(1.0, 0.0);
    let f = SectorFunction::new(ExpPoly::from_terms(
        2,
        vec![Term::real(one, vec![0.7, -1.2]), Term::real(one, vec![-1.2, 0.7])],
    ));
    let c = 0.8;
    let ts = [10.0, 20.0, 40.0, 80.0, 160.0];
    let pts = nonuniformity_scan(&f, c, 0.3, &ts).map_err(e)?;
    let fyy = f.evaluate(&[0.3, 0.3]).norm();
    let mut scaled_retained = Vec::new();
    for p in &pts {
        let bound = (-1.0f64).exp() * c * c * p.t.powi(-2) * fyy;
        ensure(p.boundary >= bound * (1.0 - 1e-12), || format!("t = {}: boundary {:.3e} < {bound:.3e}", p.t, p.boundary))?;
        scaled_retained.push(p.retained * p.t * p.t);
    }
    let spread = scaled_retained.iter().cloned().fold(0.0, f64::max) / scaled_retained.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(spread < 1.5, || format!("t^2 x retained term varies by {spread:.2}"))?;
    let grid = [20.0, 40.0, 80.0, 160.0];
    let exp_pts = asymptotic_expand(&f, c, 0.0, 1.0, &grid).map_err(e)?;
    let mut exps = Vec::new();
    for m in 0..=3 {
        let x = truncation_exponent(&exp_pts, m);
        let want = m as f64 + 1.0;
        ensure((x - want).abs() <= 0.1 * want, || format!("order {m}: exponent {x:.3}"))?;
        exps.push(format!("{x:.3}"));
    }
    Ok(format!(
        "boundary term >= e^-1 c^2 |f(y,y)| / t^2 at s = 1/t while t^2 x retained stays within a factor {spread:.2}; truncation exponents {}",
        exps.join(", ")
    ))
}

fn criterion_9() -> Outcome {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let a = run_suite(&cfg).map_err(e)?.to_json_string();
    let once = start.elapsed();
    let b = run_suite(&cfg).map_err(e)?.to_json_string();
    ensure(a == b, || "two runs with the same seed differ".into())?;
    ensure(once < Duration::from_secs(600), || format!("full suite took {once:.1?}"))?;
    Ok(format!("two full runs give byte-identical JSON ({} bytes); one run takes {once:.1?}", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("eigen-identities", criterion_1),
        ("composition identities", criterion_2),
        ("G4 divergence", criterion_3),
        ("Bethe solver", criterion_4),
        ("trace-identity adjudication", criterion_5),
        ("lattice integrability", criterion_6),
        ("A(lambda)", criterion_7),
        ("non-uniformity", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(msg) => println!("PASS {} {name}: {msg} [{:.1?}]", i + 1, start.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} [{:.1?}]", i + 1, start.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
