use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::{Complex, Complex64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::{RunConfig, Suite, Task};
use super::report::{AdjudicationRow, CheckRecord, Outcome, Residual};
use crate::aop::{
    apply_a, apply_a_quadrature, asymptotic_expand, bvp_residual, eigenvalue_check, nonuniformity_scan,
    sample_grid, truncation_exponent, SectorFunction, SpectralParameter,
};
use crate::charges::{
    boundary_residual_h2, boundary_residual_j3, boundary_residual_j4, composition_identity_check,
    default_widths, g4_defect_scan, interior_residual, ChargeName, G4ScanConfig,
};
use crate::error::{Error, Result};
use crate::lattice::{
    continuum_limit_rate, log_log_slope, normal_ordering_breakdown_demo, rtt_residual, tau_commutator_norm,
    tau_commutator_norm_unchecked, ContinuumSector, LatticeSpec,
};
use crate::quadrature::QuadOptions;
use crate::scalar::{c_abs, complex_json, to_c64, Real};
use crate::solver::{ground_state_quantum_numbers, solve, BoxSpec, QuantumNumbers, RapiditySolution, PRODUCT_RESIDUAL_TOL};
use crate::symwave::{build_bethe, BetheWavefunction, Coupling, ExpPoly, RapiditySet, Term};
use crate::transfer::{
    asymptotic_product_series, charge_coefficients_from_formulas, log_series_check, remainder_check,
    CoefficientCheck, CoefficientSource, Substitution, Verdict,
};

/// Float-mode tolerance on residual coefficients, relative to the input's scale.
const FLOAT_RESIDUAL_TOL: f64 = 1e-9;
const NUMERIC_TOL: f64 = 1e-8;
const LATTICE_TOL: f64 = 1e-12;

type CheckOutput = (Residual, Outcome, Option<String>);

/// Everything one task produces.
#[derive(Default)]
pub(crate) struct Sink {
    pub checks: Vec<CheckRecord>,
    pub adjudication: BTreeMap<(String, usize), AdjudicationRow>,
    pub data: BTreeMap<String, Value>,
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

impl Sink {
    /// Runs one check. Errors and panics become a failing record.
    fn check(&mut self, id: impl Into<String>, anchor: &'static str, params: Value, f: impl FnOnce() -> Result<CheckOutput>) {
        let (residual, verdict, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(out)) => out,
            Ok(Err(e)) => (Residual::None, Outcome::Fail, Some(format!("error: {e}"))),
            Err(p) => (Residual::None, Outcome::Fail, Some(format!("panic: {}", panic_message(p)))),
        };
        self.checks.push(CheckRecord {
            id: id.into(),
            anchor,
            params,
            residual,
            verdict,
            detail,
        });
    }

    fn adjudicate(&mut self, source: String, order: usize, verdict: Verdict, note: Option<&str>) {
        let row = self.adjudication.entry((source.clone(), order)).or_insert_with(|| AdjudicationRow {
            source,
            order,
            ..Default::default()
        });
        match verdict {
            Verdict::Match => row.matches += 1,
            Verdict::ExpectedMismatch => row.expected_mismatches += 1,
            Verdict::Mismatch => row.mismatches += 1,
        }
        if row.note.is_none() {
            row.note = note.map(str::to_string);
        }
    }
}

pub(crate) fn run_task<R: Real>(cfg: &RunConfig, task: Task, rng: &mut ChaCha8Rng, sink: &mut Sink) {
    match task {
        Task::Suite(Suite::Charges) => charges::<R>(cfg, rng, sink),
        Task::Suite(Suite::Bethe) => bethe_grid(cfg, rng, sink),
        Task::Suite(Suite::Transfer) => transfer_grid::<R>(cfg, rng, sink),
        Task::Suite(Suite::Lattice) => lattice_grid(cfg, sink),
        Task::Suite(Suite::Aop) => aop_grid::<R>(rng, sink),
        Task::BetheSolve => bethe_single(cfg, sink),
        Task::TransferExpand => transfer_single::<R>(cfg, sink),
        Task::LatticeRtt => lattice_rtt_single(cfg, sink),
        Task::LatticeCommute => lattice_commute_single(cfg, sink),
        Task::LatticeContinuum => lattice_continuum_single(cfg, sink),
        Task::AopCheck => aop_single::<R>(cfg, sink),
    }
}

// ---------------------------------------------------------------- sampling

/// `n` distinct rationals `p/q` with `|p| <= 24`, `1 <= q <= 6`.
fn random_values<R: Real>(rng: &mut ChaCha8Rng, n: usize) -> Vec<R> {
    let mut picked: Vec<(i64, i64)> = Vec::with_capacity(n);
    while picked.len() < n {
        let (p, q) = (rng.random_range(-24..=24), rng.random_range(1..=6));
        if picked.iter().all(|&(a, b)| a * q != p * b) {
            picked.push((p, q));
        }
    }
    picked.into_iter().map(|(p, q)| R::from_ratio(p, q)).collect()
}

fn random_coupling<R: Real>(rng: &mut ChaCha8Rng) -> R {
    R::from_ratio(rng.random_range(1..=12), rng.random_range(1..=4))
}

/// Strictly increasing quantum numbers of the right parity, drawn from a
/// window around the ground state.
fn random_quantum_numbers(rng: &mut ChaCha8Rng, n: usize) -> QuantumNumbers {
    let parity = if n % 2 == 1 { 0 } else { 1 };
    loop {
        let mut m: Vec<i64> = (0..n).map(|_| rng.random_range(-4..=4)).collect();
        m.sort();
        m.dedup();
        if m.len() == n {
            let qn = QuantumNumbers::from_doubled(m.iter().map(|v| 2 * v + parity).collect())
                .expect("parity and ordering hold by construction");
            if qn != ground_state_quantum_numbers(n) {
                return qn;
            }
        }
    }
}

fn values_json<R: Real>(v: &[R]) -> Value {
    Value::Array(v.iter().map(Real::to_json).collect())
}

// ------------------------------------------------------------ residuals

/// Accumulates residual polynomials that should all vanish.
struct Acc {
    exact: bool,
    terms: usize,
    worst: f64,
}

impl Acc {
    fn new<R: Real>() -> Self {
        Self {
            exact: R::EXACT,
            terms: 0,
            worst: 0.0,
        }
    }

    fn absorb<R: Real>(&mut self, p: &ExpPoly<R>, scale: f64) {
        if self.exact {
            self.terms += p.len();
        } else {
            self.worst = self.worst.max(p.max_coeff() / scale.max(1.0));
        }
    }

    fn finish(self) -> CheckOutput {
        if self.exact {
            let r = if self.terms == 0 {
                Residual::ExactZero
            } else {
                Residual::ExactTerms(self.terms)
            };
            (r, Outcome::from_bool(self.terms == 0), None)
        } else {
            (Residual::Float(self.worst), Outcome::from_bool(self.worst <= FLOAT_RESIDUAL_TOL), None)
        }
    }
}

fn vanishes<R: Real>(p: &ExpPoly<R>, scale: f64) -> bool {
    if R::EXACT {
        p.is_empty()
    } else {
        p.max_coeff() <= FLOAT_RESIDUAL_TOL * scale.max(1.0)
    }
}

/// Size of a fourth-order derivative of the wavefunction, for float tolerances.
fn wave_scale<R: Real>(w: &BetheWavefunction<R>) -> f64 {
    let kmax = w.rapidities().values().iter().fold(0.0f64, |m, k| m.max(k.to_f64().abs()));
    w.canonical().max_coeff() * (1.0 + kmax + w.coupling().value().to_f64()).powi(4)
}

// ------------------------------------------------------------- charges

fn charges<R: Real>(cfg: &RunConfig, rng: &mut ChaCha8Rng, sink: &mut Sink) {
    let n_max = cfg.n_for(Task::Suite(Suite::Charges));
    for n in 1..=n_max {
        let inputs: Vec<(Vec<R>, R)> =
            (0..cfg.samples).map(|_| (random_values(rng, n), random_coupling(rng))).collect();
        let states: Result<Vec<BetheWavefunction<R>>> = inputs
            .iter()
            .map(|(k, c)| build_bethe(RapiditySet::new(k.clone())?, Coupling::new(c.clone())?))
            .collect();
        let params = json!({"n": n, "samples": cfg.samples});
        for name in ChargeName::ALL.into_iter().filter(|c| c.min_particles() <= n) {
            sink.check(format!("charges.interior.n{n}.{name}"), "charges.interior", params.clone(), || {
                let mut acc = Acc::new::<R>();
                for w in states.as_ref().map_err(Clone::clone)? {
                    acc.absorb(&interior_residual(name, w), wave_scale(w));
                }
                Ok(acc.finish())
            });
        }
        let boundary = |sink: &mut Sink, which: &str, anchor, min_n: usize, f: &dyn Fn(&BetheWavefunction<R>, usize) -> bool| {
            if n < min_n {
                return;
            }
            sink.check(format!("charges.boundary.n{n}.{which}"), anchor, params.clone(), || {
                let mut failures = 0;
                for w in states.as_ref().map_err(Clone::clone)? {
                    failures += (0..n - 1).filter(|&j| !f(w, j)).count();
                }
                let residual = if R::EXACT && failures == 0 { Residual::ExactZero } else { Residual::None };
                Ok((residual, Outcome::from_bool(failures == 0), (failures > 0).then(|| format!("{failures} nonzero restrictions"))))
            });
        };
        boundary(sink, "h2", "charges.boundary.h2", 2, &|w, j| {
            vanishes(&boundary_residual_h2(w.canonical(), w.coupling().value(), j), wave_scale(w))
        });
        boundary(sink, "j3", "charges.boundary.j3", 3, &|w, j| {
            vanishes(&boundary_residual_j3(w.canonical(), w.coupling().value(), j), wave_scale(w))
        });
        boundary(sink, "j4", "charges.boundary.j4", 4, &|w, j| {
            let r = boundary_residual_j4(w.canonical(), w.coupling().value(), j);
            let s = wave_scale(w);
            vanishes(&r.smooth, s) && r.delta_layers.iter().all(|(_, p)| vanishes(p, s))
        });
        if n >= 2 {
            let (k, c) = inputs[0].clone();
            sink.check(format!("charges.boundary.n{n}.control"), "charges.boundary.control", json!({"n": n, "rapidities": values_json(&k)}), || {
                let one = Complex::new(R::one(), R::zero());
                let wave = ExpPoly::from_terms(n, vec![Term::real(one, k)]);
                let r = boundary_residual_h2(&wave, &c, 0);
                Ok((Residual::None, Outcome::from_bool(!vanishes(&r, 1.0)), Some(format!("{} residual terms", r.len()))))
            });
        }
    }

    let mut by_n: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for s in 0..cfg.composition_samples {
        let n = 1 + s % 6;
        let ok = RapiditySet::new(random_values::<R>(rng, n)).map(|r| composition_identity_check(&r).holds());
        let e = by_n.entry(n).or_default();
        e.0 += 1;
        e.1 += usize::from(ok != Ok(true));
    }
    for (n, (total, bad)) in by_n {
        sink.check(format!("charges.composition.n{n}"), "charges.composition", json!({"n": n, "samples": total}), || {
            let residual = if R::EXACT && bad == 0 { Residual::ExactZero } else { Residual::None };
            Ok((residual, Outcome::from_bool(bad == 0), (bad > 0).then(|| format!("{bad} sets violate the identities"))))
        });
    }

    if cfg.g4 {
        let widths = default_widths();
        sink.check("charges.g4.n2", "charges.g4", json!({"n": 2, "rapidities": [1.0, 2.0], "c": 1.0, "widths": widths.len()}), || {
            let w = build_bethe(RapiditySet::new(vec![1.0, 2.0])?, Coupling::new(1.0)?)?;
            let scan = g4_defect_scan(&w, &widths, &G4ScanConfig::default())?;
            let ok = (scan.slope + 1.0).abs() <= 0.02 && scan.remainder_bounded();
            Ok((
                Residual::Float(scan.slope + 1.0),
                Outcome::from_bool(ok),
                Some(format!("slope {:.4}, 1/eps coefficient {:.4}, remainder bounded: {}", scan.slope, scan.a, scan.remainder_bounded())),
            ))
        });
    }
}

// --------------------------------------------------------------- bethe

const GRID_COUPLINGS: [f64; 4] = [0.1, 1.0, 10.0, 1e4];
const TONKS_COUPLING: f64 = 1e4;

fn solve_check(sink: &mut Sink, id: String, anchor: &'static str, spec: &BoxSpec, qn: &QuantumNumbers) -> Option<RapiditySolution> {
    let mut out = None;
    let params = json!({"n": spec.particles, "box": spec.length, "c": spec.c(), "quantum_numbers": qn.to_string()});
    sink.check(id, anchor, params, || {
        let sol = solve(spec, qn)?;
        let r = sol.residual_product;
        out = Some(sol);
        Ok((Residual::Float(r), Outcome::from_bool(r < PRODUCT_RESIDUAL_TOL), None))
    });
    out
}

fn tonks_check(sink: &mut Sink, id: String, spec: &BoxSpec, sol: &RapiditySolution) {
    let params = json!({"n": spec.particles, "box": spec.length, "c": spec.c()});
    let dev = sol
        .k()
        .iter()
        .zip(sol.quantum_numbers.values())
        .fold(0.0f64, |m, (k, i)| m.max((k - 2.0 * PI * i / spec.length).abs()));
    let bound = 5.0 / spec.c();
    sink.check(id, "bethe.tonks", params, || {
        Ok((Residual::Float(dev), Outcome::from_bool(dev <= bound), Some(format!("bound 5/c = {bound:.1e}"))))
    });
}

fn bethe_grid(cfg: &RunConfig, rng: &mut ChaCha8Rng, sink: &mut Sink) {
    for n in 1..=5 {
        for c in GRID_COUPLINGS {
            let Ok(spec) = BoxSpec::new(cfg.box_length, c, n) else { continue };
            let sol = solve_check(sink, format!("bethe.solve.n{n}.c{c:e}"), "bethe.solve", &spec, &ground_state_quantum_numbers(n));
            if c == TONKS_COUPLING {
                match sol {
                    Some(sol) => tonks_check(sink, format!("bethe.tonks.n{n}"), &spec, &sol),
                    None => sink.check(format!("bethe.tonks.n{n}"), "bethe.tonks", json!({"n": n}), || {
                        Err(Error::DomainError("no solution to compare".into()))
                    }),
                }
            }
        }
    }
    for n in 1..=4 {
        let qn = random_quantum_numbers(rng, n);
        if let Ok(spec) = BoxSpec::new(cfg.box_length, cfg.coupling, n) {
            solve_check(sink, format!("bethe.excited.n{n}"), "bethe.excited", &spec, &qn);
        }
    }
}

fn bethe_single(cfg: &RunConfig, sink: &mut Sink) {
    let n = cfg.n_for(Task::BetheSolve);
    let qn = cfg.quantum_numbers.clone().unwrap_or_else(|| ground_state_quantum_numbers(n));
    let spec = match BoxSpec::new(cfg.box_length, cfg.coupling, n) {
        Ok(s) => s,
        Err(e) => return sink.check("bethe.single", "bethe.single", json!({"n": n}), || Err(e)),
    };
    if let Some(sol) = solve_check(sink, "bethe.single".into(), "bethe.single", &spec, &qn) {
        sink.data.insert("bethe.solution".into(), sol.to_json(&spec));
        if spec.c() >= 100.0 {
            tonks_check(sink, "bethe.single.tonks".into(), &spec, &sol);
        }
    }
}

// ------------------------------------------------------------ transfer

const REMAINDER_GRID: [f64; 10] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0];

fn outcome_of(v: Verdict) -> Outcome {
    match v {
        Verdict::Match => Outcome::Pass,
        Verdict::ExpectedMismatch => Outcome::ExpectedMismatch,
        Verdict::Mismatch => Outcome::Fail,
    }
}

fn record_coefficient<R: Real>(sink: &mut Sink, kind: &str, anchor: &'static str, label: &str, n: usize, ch: &CoefficientCheck<R>) {
    let source = if kind == "coefficients" && ch.source.is_log() {
        format!("{} (exponentiated)", ch.source.id())
    } else {
        ch.source.id().to_string()
    };
    sink.adjudicate(source, ch.order, ch.verdict, ch.note);
    let diff = c_abs(&(ch.printed.clone() - ch.oracle.clone()));
    let residual = if R::EXACT && ch.verdict == Verdict::Match { Residual::ExactZero } else { Residual::Float(diff) };
    let params = json!({
        "state": label,
        "n": n,
        "order": ch.order,
        "printed": complex_json(&ch.printed),
        "oracle": complex_json(&ch.oracle),
    });
    let id = format!("transfer.{kind}.{label}.{}.order{}", ch.source.id(), ch.order);
    let (verdict, note) = (outcome_of(ch.verdict), ch.note.map(str::to_string));
    sink.check(id, anchor, params, || Ok((residual, verdict, note)));
}

/// Coefficient verdicts, log verdicts and the remainder bound for one state.
fn transfer_state<R: Real>(sink: &mut Sink, label: &str, k: &[f64], c: f64, box_length: f64, order: usize) {
    let kr: Vec<R> = k.iter().map(|&x| R::from_f64(x)).collect();
    let cr = R::from_f64(c);
    let n = k.len();
    match charge_coefficients_from_formulas(&kr, &cr, Substitution::Eigenvalue) {
        Ok(sets) => {
            for set in sets.iter().filter(|s| s.source != CoefficientSource::ProductOracle) {
                for ch in &set.checks {
                    record_coefficient(sink, "coefficients", "transfer.coefficients", label, n, ch);
                }
            }
        }
        Err(e) => sink.check(format!("transfer.coefficients.{label}"), "transfer.coefficients", json!({"state": label}), || Err(e)),
    }
    match log_series_check(&kr, &cr, Substitution::Eigenvalue) {
        Ok(checks) => {
            for ch in &checks {
                record_coefficient(sink, "log", "transfer.log", label, n, ch);
            }
        }
        Err(e) => sink.check(format!("transfer.log.{label}"), "transfer.log", json!({"state": label}), || Err(e)),
    }
    let params = json!({"state": label, "n": n, "order": order, "t": [5.0, 50.0]});
    sink.check(format!("transfer.remainder.{label}"), "transfer.remainder", params, || {
        let r = remainder_check(k, c, box_length, order, &REMAINDER_GRID)?;
        let worst = r.points.iter().fold(0.0f64, |m, &(_, d, b)| m.max(d / b));
        Ok((
            Residual::Float(worst),
            Outcome::from_bool(r.holds()),
            Some(format!("largest difference/bound {worst:.3}, fitted constant {:.3e}", r.constant)),
        ))
    });
}

fn transfer_grid<R: Real>(cfg: &RunConfig, rng: &mut ChaCha8Rng, sink: &mut Sink) {
    for n in 1..=4 {
        let excited = random_quantum_numbers(rng, n);
        for (kind, qn) in [("ground", ground_state_quantum_numbers(n)), ("excited", excited)] {
            let label = format!("n{n}.{kind}");
            let solved = BoxSpec::new(cfg.box_length, cfg.coupling, n).and_then(|spec| solve(&spec, &qn));
            match solved {
                Ok(sol) => transfer_state::<R>(sink, &label, sol.k(), cfg.coupling, cfg.box_length, cfg.order),
                Err(e) => sink.check(format!("transfer.state.{label}"), "harness.task", json!({"state": label}), || Err(e)),
            }
        }
    }
}

fn transfer_single<R: Real>(cfg: &RunConfig, sink: &mut Sink) {
    let n = cfg.n_for(Task::TransferExpand);
    let qn = cfg.quantum_numbers.clone().unwrap_or_else(|| ground_state_quantum_numbers(n));
    let solved = BoxSpec::new(cfg.box_length, cfg.coupling, n).and_then(|spec| Ok((solve(&spec, &qn)?, spec)));
    let (sol, spec) = match solved {
        Ok(x) => x,
        Err(e) => return sink.check("transfer.state.single", "harness.task", json!({"n": n}), || Err(e)),
    };
    let kr: Vec<R> = sol.k().iter().map(|&x| R::from_f64(x)).collect();
    let series = asymptotic_product_series(&kr, &R::from_f64(cfg.coupling), cfg.order);
    sink.data.insert("transfer.state".into(), sol.to_json(&spec));
    sink.data.insert("transfer.oracle_series".into(), series.to_json());
    if let Ok(log) = series.log() {
        sink.data.insert("transfer.oracle_log_series".into(), log.to_json());
    }
    transfer_state::<R>(sink, "single", sol.k(), cfg.coupling, cfg.box_length, cfg.order);
}

// ------------------------------------------------------------- lattice

const RTT_LAMBDAS: [f64; 5] = [-1.1, -0.4, 0.2, 0.7, 1.5];
const RTT_MUS: [f64; 5] = [-1.3, -0.6, 0.1, 0.9, 1.8];
const CONTINUUM_LAMBDA: f64 = 1.3;
const CONTINUUM_LENGTH: f64 = 2.0;

fn rtt_check(sink: &mut Sink, id: String, lambda: f64, mu: f64, spec: &LatticeSpec) {
    sink.check(id, "lattice.rtt", json!({"lambda": lambda, "mu": mu, "lattice": spec.to_json()}), || {
        let rep = rtt_residual(lambda, mu, spec)?;
        Ok((
            Residual::Float(rep.r_left),
            Outcome::from_bool(rep.r_left < LATTICE_TOL),
            Some(format!("opposite ordering {:.2e}", rep.r_right)),
        ))
    });
}

fn continuum_check(sink: &mut Sink, id: String, lambda: f64, length: f64, c: f64, sites: &[usize], sector: ContinuumSector) {
    let params = json!({"lambda": lambda, "box": length, "c": c, "sites": sites, "sector": format!("{sector:?}")});
    sink.check(id, "lattice.continuum", params, || {
        let r = continuum_limit_rate(lambda, length, c, sites, sector)?;
        Ok((
            Residual::Float(r.points.last().map_or(f64::NAN, |p| p.2)),
            Outcome::from_bool(r.order >= 1.0),
            Some(format!("fitted order {:.3}, monotone: {}", r.order, r.monotone())),
        ))
    });
}

fn lattice_grid(cfg: &RunConfig, sink: &mut Sink) {
    let c = cfg.coupling;
    match LatticeSpec::new(1, 4, cfg.step, c) {
        Ok(one_site) => {
            for (i, &l) in RTT_LAMBDAS.iter().enumerate() {
                for (j, &m) in RTT_MUS.iter().enumerate() {
                    rtt_check(sink, format!("lattice.rtt.p{}{}", i, j), l, m, &one_site);
                }
            }
        }
        Err(e) => sink.check("lattice.rtt", "lattice.rtt", json!({}), || Err(e)),
    }
    let (l, mu) = (cfg.lattice_lambda, cfg.lattice_mu);
    for m in 1..=4 {
        for n in 1..=3 {
            let params = |d: usize| json!({"sites": m, "n": n, "cutoff": d, "lambda": l, "mu": mu, "step": cfg.step, "c": c});
            sink.check(format!("lattice.commute.m{m}.n{n}"), "lattice.commute", params(n + 2), || {
                let v = tau_commutator_norm(l, mu, &LatticeSpec::new(m, n + 2, cfg.step, c)?, n)?;
                Ok((Residual::Float(v), Outcome::from_bool(v < LATTICE_TOL), None))
            });
            sink.check(format!("lattice.cutoff_control.m{m}.n{n}.d_n_plus_1"), "lattice.cutoff_control", params(n + 1), || {
                let v = tau_commutator_norm_unchecked(l, mu, &LatticeSpec::new(m, n + 1, cfg.step, c)?, n)?;
                Ok((Residual::Float(v), Outcome::from_bool(v < LATTICE_TOL), Some("no leakage at d = n + 1".into())))
            });
        }
    }
    for (m, n) in [(3, 3), (4, 2), (4, 3)] {
        let params = json!({"sites": m, "n": n, "cutoff": n, "lambda": l, "mu": mu, "step": cfg.step, "c": c});
        sink.check(format!("lattice.cutoff_control.m{m}.n{n}.d_n"), "lattice.cutoff_control", params, || {
            let v = tau_commutator_norm_unchecked(l, mu, &LatticeSpec::new(m, n, cfg.step, c)?, n)?;
            Ok((Residual::Float(v), Outcome::from_bool(v > 1e-6), Some("truncation breaks commutativity at d = n".into())))
        });
    }
    let sites = [8, 16, 32, 64];
    continuum_check(sink, "lattice.continuum.vacuum".into(), CONTINUUM_LAMBDA, CONTINUUM_LENGTH, c, &sites, ContinuumSector::Vacuum);
    continuum_check(
        sink,
        "lattice.continuum.one_particle".into(),
        CONTINUUM_LAMBDA,
        CONTINUUM_LENGTH,
        c,
        &sites,
        ContinuumSector::OneParticle { mode: 1 },
    );
    sink.check("lattice.normal_ordering.two_sites", "lattice.normal_ordering", json!({"sites": 2, "cutoff": 3, "lambda": 0.5, "c": c}), || {
        let mut pts = Vec::new();
        for j in 2..8 {
            let step = 2f64.powi(-j);
            pts.push((step, normal_ordering_breakdown_demo(0.5, &LatticeSpec::new(2, 3, step, c)?)?.difference));
        }
        let order = log_log_slope(&pts);
        Ok((Residual::Float(order), Outcome::from_bool(order >= 2.0), Some(format!("difference ~ step^{order:.3}"))))
    });
    sink.check("lattice.normal_ordering.one_site", "lattice.normal_ordering", json!({"sites": 1, "cutoff": 3, "lambda": 0.5, "c": c}), || {
        let d = normal_ordering_breakdown_demo(0.5, &LatticeSpec::new(1, 3, cfg.step, c)?)?.difference;
        Ok((Residual::Float(d), Outcome::from_bool(d < LATTICE_TOL), None))
    });
}

fn lattice_spec(cfg: &RunConfig, task: Task) -> Result<LatticeSpec> {
    LatticeSpec::new(cfg.sites_for(task), cfg.cutoff_for(task), cfg.step, cfg.coupling)
}

fn lattice_rtt_single(cfg: &RunConfig, sink: &mut Sink) {
    match lattice_spec(cfg, Task::LatticeRtt) {
        Ok(spec) => {
            if let Ok(rep) = rtt_residual(cfg.lattice_lambda, cfg.lattice_mu, &spec) {
                sink.data.insert("lattice.rtt".into(), rep.to_json());
            }
            rtt_check(sink, "lattice.rtt.single".into(), cfg.lattice_lambda, cfg.lattice_mu, &spec);
        }
        Err(e) => sink.check("lattice.rtt.single", "lattice.rtt", json!({}), || Err(e)),
    }
}

fn lattice_commute_single(cfg: &RunConfig, sink: &mut Sink) {
    let n = cfg.n_for(Task::LatticeCommute);
    let spec = lattice_spec(cfg, Task::LatticeCommute);
    let params = json!({"n": n, "lambda": cfg.lattice_lambda, "mu": cfg.lattice_mu, "lattice": spec.as_ref().ok().map(LatticeSpec::to_json)});
    sink.check("lattice.commute.single", "lattice.commute", params, || {
        let v = tau_commutator_norm(cfg.lattice_lambda, cfg.lattice_mu, &spec?, n)?;
        Ok((Residual::Float(v), Outcome::from_bool(v < LATTICE_TOL), None))
    });
}

fn lattice_continuum_single(cfg: &RunConfig, sink: &mut Sink) {
    let max = cfg.sites_for(Task::LatticeContinuum);
    let sites: Vec<usize> = (3..).map(|j| 1usize << j).take_while(|&m| m <= max).collect();
    for (name, sector) in [("vacuum", ContinuumSector::Vacuum), ("one_particle", ContinuumSector::OneParticle { mode: 1 })] {
        if let Ok(r) = continuum_limit_rate(cfg.lattice_lambda, cfg.box_length, cfg.coupling, &sites, sector) {
            sink.data.insert(format!("lattice.continuum.{name}"), r.to_json());
        }
        continuum_check(sink, format!("lattice.continuum.{name}"), cfg.lattice_lambda, cfg.box_length, cfg.coupling, &sites, sector);
    }
}

// ----------------------------------------------------------------- aop

fn to_float_sector<R: Real>(f: &SectorFunction<R>) -> SectorFunction<f64> {
    let p = f.canonical();
    SectorFunction::new(ExpPoly::from_terms(
        p.num_vars(),
        p.terms().iter().map(|t| Term::new(to_c64(&t.coeff), t.freq.iter().map(to_c64).collect())).collect(),
    ))
}

fn random_lambda<R: Real>(rng: &mut ChaCha8Rng) -> Complex<R> {
    Complex::new(
        R::from_ratio(rng.random_range(-6..=6), rng.random_range(1..=3)),
        -R::from_ratio(rng.random_range(1..=8), rng.random_range(1..=3)),
    )
}

/// Eigenvalue, quadrature and boundary-value checks for one Bethe state.
fn aop_state<R: Real>(sink: &mut Sink, label: &str, raps: &[R], c: &R, lambda: &Complex<R>) {
    let params = json!({
        "rapidities": values_json(raps),
        "c": c.to_json(),
        "lambda": complex_json(lambda),
    });
    let setup = || -> Result<(SpectralParameter<R>, BetheWavefunction<R>)> {
        Ok((
            SpectralParameter::new(lambda.clone())?,
            build_bethe(RapiditySet::new(raps.to_vec())?, Coupling::new(c.clone())?)?,
        ))
    };
    sink.check(format!("aop.eigenvalue.{label}"), "aop.eigenvalue", params.clone(), || {
        let (l, w) = setup()?;
        let ch = eigenvalue_check(&l, &w)?;
        let mut acc = Acc::new::<R>();
        acc.absorb(&ch.residual, w.canonical().max_coeff());
        let (residual, ok, _) = acc.finish();
        let ok = ok == Outcome::Pass && ch.max_pointwise < NUMERIC_TOL;
        Ok((residual, Outcome::from_bool(ok), Some(format!("pointwise {:.2e}", ch.max_pointwise))))
    });
    sink.check(format!("aop.quadrature.{label}"), "aop.quadrature", params.clone(), || {
        let (l, w) = setup()?;
        let f = SectorFunction::from_bethe(&w);
        let g = apply_a(&l, c, &f)?;
        let point = &sample_grid(raps.len())[0];
        let numeric = apply_a_quadrature(to_c64(lambda), c.to_f64(), &to_float_sector(&f), point, QuadOptions::with_rel_tol(1e-11))?;
        let d = (numeric - g.evaluate(point)).norm() / g.evaluate(point).norm().max(1.0);
        Ok((Residual::Float(d), Outcome::from_bool(d < NUMERIC_TOL), None))
    });
    sink.check(format!("aop.bvp.bethe.{label}"), "aop.bvp", params, || {
        let (l, w) = setup()?;
        let f = SectorFunction::from_bethe(&w);
        let g = apply_a(&l, c, &f)?;
        bvp_output(&bvp_residual(&l, c, &f, &g), &g)
    });
}

fn bvp_output<R: Real>(r: &crate::aop::BvpResidual<R>, g: &SectorFunction<R>) -> Result<CheckOutput> {
    let mut acc = Acc::new::<R>();
    let scale = g.canonical().max_coeff() * 1e3;
    acc.absorb(&r.pde, scale);
    for b in &r.brackets {
        acc.absorb(b, scale);
    }
    Ok(acc.finish())
}

/// A two-particle input with up to three plane waves of random rational
/// frequencies and complex rational coefficients.
fn crafted_input<R: Real>(rng: &mut ChaCha8Rng) -> SectorFunction<R> {
    let terms = (0..rng.random_range(1..=3))
        .map(|_| {
            let coeff = Complex::new(
                R::from_ratio(rng.random_range(-5..=5), rng.random_range(1..=3)),
                R::from_ratio(rng.random_range(-5..=5), rng.random_range(1..=3)),
            );
            Term::real(coeff, random_values(rng, 2))
        })
        .collect();
    SectorFunction::new(ExpPoly::from_terms(2, terms))
}

fn smooth_two_particle() -> SectorFunction<f64> {
    let (a, b) = (0.7, -1.2);
    let one = Complex64::new(1.0, 0.0);
    SectorFunction::new(ExpPoly::from_terms(2, vec![Term::real(one, vec![a, b]), Term::real(one, vec![b, a])]))
}

fn aop_grid<R: Real>(rng: &mut ChaCha8Rng, sink: &mut Sink) {
    for n in 1..=3 {
        for s in 0..4 {
            let raps: Vec<R> = random_values(rng, n);
            let c: R = random_coupling(rng);
            let lambda = random_lambda::<R>(rng);
            aop_state(sink, &format!("n{n}.s{s}"), &raps, &c, &lambda);
        }
    }
    for s in 0..10 {
        let f = crafted_input::<R>(rng);
        let c: R = random_coupling(rng);
        let lambda = random_lambda::<R>(rng);
        let params = json!({"input": f.canonical().to_json(), "c": c.to_json(), "lambda": complex_json(&lambda)});
        sink.check(format!("aop.bvp.crafted.s{s:02}"), "aop.bvp", params, || {
            let l = SpectralParameter::new(lambda.clone())?;
            let g = apply_a(&l, &c, &f)?;
            bvp_output(&bvp_residual(&l, &c, &f, &g), &g)
        });
    }
    {
        let ks: Vec<R> = random_values(rng, 3);
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let one = Complex::new(R::one(), R::zero());
        let terms = orders.iter().map(|p| Term::real(one.clone(), p.iter().map(|&i| ks[i].clone()).collect())).collect();
        let f = SectorFunction::new(ExpPoly::from_terms(3, terms));
        let c: R = random_coupling(rng);
        let lambda = random_lambda::<R>(rng);
        let params = json!({"frequencies": values_json(&ks), "c": c.to_json(), "lambda": complex_json(&lambda)});
        sink.check("aop.bvp_generic_three", "aop.bvp_generic_three", params, || {
            let l = SpectralParameter::new(lambda.clone())?;
            let g = apply_a(&l, &c, &f)?;
            let r = bvp_residual(&l, &c, &f, &g);
            let scale = g.canonical().max_coeff() * 1e3;
            let ok = vanishes(&r.pde, scale) && r.brackets.iter().all(|b| !vanishes(b, scale));
            Ok((Residual::None, Outcome::from_bool(ok), Some("differential equation holds, bracket equality fails".into())))
        });
    }
    let f = smooth_two_particle();
    let grid = [20.0, 40.0, 80.0, 160.0];
    let expansion = asymptotic_expand(&f, 0.8, 0.0, 1.0, &grid);
    for m in 0..=3 {
        sink.check(format!("aop.truncation.m{m}"), "aop.truncation", json!({"m": m, "t": grid, "c": 0.8, "x": 0.0, "y": 1.0}), || {
            let pts = expansion.as_ref().map_err(Clone::clone)?;
            let e = truncation_exponent(pts, m);
            let want = m as f64 + 1.0;
            Ok((Residual::Float(e - want), Outcome::from_bool((e - want).abs() <= 0.1 * want), Some(format!("fitted exponent {e:.4}"))))
        });
    }
    let ts = [10.0, 20.0, 40.0, 80.0];
    let scan = nonuniformity_scan(&f, 0.8, 0.3, &ts);
    for (i, t) in ts.iter().enumerate() {
        sink.check(format!("aop.nonuniformity.t{:03}", *t as u32), "aop.nonuniformity", json!({"t": t, "c": 0.8, "y": 0.3}), || {
            let p = &scan.as_ref().map_err(Clone::clone)?[i];
            let ok = p.not_negligible() && p.boundary / p.retained > 0.1;
            Ok((
                Residual::Float(p.boundary),
                Outcome::from_bool(ok),
                Some(format!("bound {:.3e}, retained {:.3e}", p.bound, p.retained)),
            ))
        });
    }
}

fn aop_single<R: Real>(cfg: &RunConfig, sink: &mut Sink) {
    let n = cfg.n_for(Task::AopCheck);
    let raps: Vec<f64> = cfg.rapidities.clone().unwrap_or_else(|| [-0.5, 0.75, 1.5][..n].to_vec());
    let raps: Vec<R> = raps.into_iter().map(R::from_f64).collect();
    let lambda = Complex::new(R::from_f64(cfg.lambda.re), R::from_f64(cfg.lambda.im));
    let c = R::from_f64(cfg.coupling);
    if let Ok(w) = RapiditySet::new(raps.clone()).and_then(|r| build_bethe(r, Coupling::new(c.clone())?)) {
        if let Ok(ch) = SpectralParameter::new(lambda.clone()).and_then(|l| eigenvalue_check(&l, &w)) {
            sink.data.insert("aop.eigenvalue".into(), ch.to_json());
        }
    }
    aop_state(sink, "single", &raps, &c, &lambda);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_values_are_distinct_and_reproducible() {
        let draw = || random_values::<f64>(&mut ChaCha8Rng::seed_from_u64(5), 6);
        let v = draw();
        assert_eq!(v, draw());
        for i in 0..v.len() {
            for j in 0..i {
                assert_ne!(v[i], v[j]);
            }
        }
    }

    #[test]
    fn random_quantum_numbers_are_excited() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=5 {
            assert_ne!(random_quantum_numbers(&mut rng, n), ground_state_quantum_numbers(n));
        }
    }

    #[test]
    fn failing_and_panicking_checks_are_recorded() {
        let mut sink = Sink::default();
        sink.check("a", "bethe.solve", json!({}), || Err(Error::RMatrixPole));
        sink.check("b", "bethe.solve", json!({}), || panic!("boom"));
        sink.check("c", "bethe.solve", json!({}), || Ok((Residual::None, Outcome::Pass, None)));
        let verdicts: Vec<Outcome> = sink.checks.iter().map(|r| r.verdict).collect();
        assert_eq!(verdicts, [Outcome::Fail, Outcome::Fail, Outcome::Pass]);
        assert!(sink.checks[1].detail.as_deref().unwrap().contains("boom"));
    }
}
