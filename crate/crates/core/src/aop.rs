//! The operator `A(lambda)` on few-particle sectors.
//!
//! A sector function is held as its plane-wave form on the ordered region
//! `x_1 < ... < x_N`; elsewhere it is the symmetric extension. For every
//! nonempty index subset `i_1 < ... < i_n` the operator adds
//! `c^n` times a nested integral in which `x_{i_m}` is replaced by
//! `xi_m in (x_{i_m}, x_{i_{m+1}})` (the last one runs to infinity) under the
//! kernel `exp(i lambda sum (x_{i_m} - xi_m))`. Each `xi_m` range is split at
//! the coordinates it crosses so that the correct region form of `f` is used
//! on every piece, and every piece is integrated in closed form.

use num_complex::{Complex, Complex64};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::scalar::{complex_json, imag_unit, real, to_c64, Real};
use crate::symwave::{BetheWavefunction, ExpPoly, Term};

/// Largest particle number handled.
pub const MAX_PARTICLES: usize = 3;

/// `lambda` with strictly negative imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParameter<R: Real> {
    lambda: Complex<R>,
}

impl<R: Real> SpectralParameter<R> {
    pub fn new(lambda: Complex<R>) -> Result<Self> {
        let z = to_c64(&lambda);
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::ConvergenceDomain(format!("lambda = {z} is not finite")));
        }
        if lambda.im >= R::zero() {
            return Err(Error::ConvergenceDomain(format!(
                "need Im(lambda) < 0, got lambda = {z}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn value(&self) -> &Complex<R> {
        &self.lambda
    }
}

/// A symmetric function of `N` coordinates given on the ordered region.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorFunction<R: Real> {
    canonical: ExpPoly<R>,
}

impl<R: Real> SectorFunction<R> {
    pub fn new(canonical: ExpPoly<R>) -> Self {
        Self { canonical }
    }

    pub fn from_bethe(w: &BetheWavefunction<R>) -> Self {
        Self::new(w.canonical().clone())
    }

    pub fn canonical(&self) -> &ExpPoly<R> {
        &self.canonical
    }

    pub fn particles(&self) -> usize {
        self.canonical.num_vars()
    }

    /// Value at any point, through the symmetric extension.
    pub fn evaluate(&self, point: &[f64]) -> Complex64 {
        let mut p = point.to_vec();
        p.sort_by(f64::total_cmp);
        self.canonical.evaluate(&p)
    }
}

fn czero<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::zero())
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|&j| mask & (1 << j) != 0).collect())
}

/// For each selected coordinate, the pieces `(x_k, x_{k+1})` its integration
/// variable runs over; `k = N - 1` is `(x_{N-1}, infinity)` for the last one.
fn piece_ranges(subset: &[usize], n: usize) -> Vec<std::ops::Range<usize>> {
    subset
        .iter()
        .enumerate()
        .map(|(m, &start)| {
            let end = subset.get(m + 1).copied().unwrap_or(n);
            start..end
        })
        .collect()
}

fn for_each_assignment(ranges: &[std::ops::Range<usize>], mut visit: impl FnMut(&[usize])) {
    let mut current: Vec<usize> = ranges.iter().map(|r| r.start).collect();
    loop {
        visit(&current);
        let mut m = ranges.len();
        loop {
            if m == 0 {
                return;
            }
            m -= 1;
            current[m] += 1;
            if current[m] < ranges[m].end {
                break;
            }
            current[m] = ranges[m].start;
        }
    }
}

/// `g = A(lambda) f` on the ordered region, in closed form. `N <= 3`.
pub fn apply_a<R: Real>(
    lambda: &SpectralParameter<R>,
    c: &R,
    f: &SectorFunction<R>,
) -> Result<SectorFunction<R>> {
    let n = f.particles();
    if n > MAX_PARTICLES {
        return Err(Error::SizeLimit {
            what: "particles for A(lambda)",
            value: n,
            max: MAX_PARTICLES,
        });
    }
    let lam = lambda.value().clone();
    let i = imag_unit::<R>();
    let one = Complex::new(R::one(), R::zero());
    let mut terms: Vec<Term<R>> = f.canonical.terms().to_vec();

    for subset in subsets(n) {
        let cn = (0..subset.len()).fold(one.clone(), |acc, _| acc * real(c.clone()));
        let ranges = piece_ranges(&subset, n);
        let mut failure = None;
        for_each_assignment(&ranges, |pieces| {
            if failure.is_some() {
                return;
            }
            // Sorted order of the evaluation point: untouched x_j sit at
            // (j, 0), xi_m sits just after x_{pieces[m]}.
            let mut keys: Vec<((usize, u8), Slot)> = (0..n)
                .filter(|j| !subset.contains(j))
                .map(|j| ((j, 0u8), Slot::X(j)))
                .collect();
            keys.extend(pieces.iter().enumerate().map(|(m, &k)| ((k, 1u8), Slot::Xi(m))));
            keys.sort_by_key(|(k, _)| *k);

            for term in f.canonical.terms() {
                let mut freq = vec![czero::<R>(); n];
                let mut xi_freq = vec![czero::<R>(); subset.len()];
                for (rank, (_, slot)) in keys.iter().enumerate() {
                    match *slot {
                        Slot::X(j) => freq[j] = term.freq[rank].clone(),
                        Slot::Xi(m) => xi_freq[m] = term.freq[rank].clone(),
                    }
                }
                for &j in &subset {
                    freq[j] = freq[j].clone() + lam.clone();
                }
                // Each xi_m integral of exp(i (w - lambda) xi) contributes a
                // difference of two endpoint exponentials.
                let mut partial: Vec<(Complex<R>, Vec<Complex<R>>)> =
                    vec![(term.coeff.clone() * cn.clone(), freq)];
                for (m, &k) in pieces.iter().enumerate() {
                    let shift = xi_freq[m].clone() - lam.clone();
                    let alpha = i.clone() * shift.clone();
                    let upper_infinite = k + 1 == n;
                    if upper_infinite && alpha.re >= R::zero() {
                        failure = Some(Error::ConvergenceDomain(format!(
                            "integral to infinity diverges for frequency {}",
                            to_c64(&xi_freq[m])
                        )));
                        return;
                    }
                    if alpha == czero() {
                        failure = Some(Error::DomainError(
                            "resonant frequency: kernel exponent vanishes".into(),
                        ));
                        return;
                    }
                    let inv = one.clone() / alpha;
                    let mut next = Vec::with_capacity(partial.len() * 2);
                    for (coeff, fr) in &partial {
                        if !upper_infinite {
                            let mut up = fr.clone();
                            up[k + 1] = up[k + 1].clone() + shift.clone();
                            next.push((coeff.clone() * inv.clone(), up));
                        }
                        let mut lo = fr.clone();
                        lo[k] = lo[k].clone() + shift.clone();
                        next.push((-(coeff.clone() * inv.clone()), lo));
                    }
                    partial = next;
                }
                terms.extend(partial.into_iter().map(|(coeff, fr)| Term::new(coeff, fr)));
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(SectorFunction::new(ExpPoly::from_terms(n, terms)))
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    X(usize),
    Xi(usize),
}

/// `prod_j (lambda - lambda_j - ic) / (lambda - lambda_j)`.
pub fn a_eigenvalue<R: Real>(lambda: &Complex<R>, rapidities: &[R], c: &R) -> Result<Complex<R>> {
    let ic = imag_unit::<R>() * real(c.clone());
    let mut out = Complex::new(R::one(), R::zero());
    for (index, r) in rapidities.iter().enumerate() {
        let den = lambda.clone() - real(r.clone());
        if den == czero() {
            return Err(Error::PoleAtRapidity { index });
        }
        out = out * (den.clone() - ic.clone()) / den;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueCheck<R: Real> {
    pub expected: Complex<R>,
    /// `g / f` at a sample point of the ordered region.
    pub measured: Complex64,
    /// `g - expected * f` on the ordered region.
    pub residual: ExpPoly<R>,
    /// Largest `|g / f - expected|` over the sample grid.
    pub max_pointwise: f64,
}

impl<R: Real> EigenvalueCheck<R> {
    pub fn exact_zero(&self) -> bool {
        self.residual.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "expected": complex_json(&self.expected),
            "measured": {"re": self.measured.re, "im": self.measured.im},
            "residual_terms": self.residual.len(),
            "residual_max_coeff": self.residual.max_coeff(),
            "max_pointwise": self.max_pointwise,
        })
    }
}

/// Sample points on the ordered region used for pointwise checks.
pub fn sample_grid(n: usize) -> Vec<Vec<f64>> {
    let base = [-1.3, -0.4, 0.35, 1.1, 2.05];
    let mut out = Vec::new();
    for shift in 0..4 {
        let p: Vec<f64> = (0..n).map(|j| base[j] + 0.37 * shift as f64 + 0.11 * (j * shift) as f64).collect();
        out.push(p);
    }
    out
}

pub fn eigenvalue_check<R: Real>(
    lambda: &SpectralParameter<R>,
    w: &BetheWavefunction<R>,
) -> Result<EigenvalueCheck<R>> {
    let c = w.coupling().value();
    let f = SectorFunction::from_bethe(w);
    let g = apply_a(lambda, c, &f)?;
    let expected = a_eigenvalue(lambda.value(), w.rapidities().values(), c)?;
    let residual = g.canonical().sub(&f.canonical().scale(&expected));
    let ev = to_c64(&expected);
    let mut measured = Complex64::new(0.0, 0.0);
    let mut max_pointwise: f64 = 0.0;
    for (idx, p) in sample_grid(w.particles()).iter().enumerate() {
        let fv = f.evaluate(p);
        if fv.norm() < 1e-12 {
            continue;
        }
        let ratio = g.evaluate(p) / fv;
        if idx == 0 {
            measured = ratio;
        }
        max_pointwise = max_pointwise.max((ratio - ev).norm());
    }
    Ok(EigenvalueCheck {
        expected,
        measured,
        residual,
        max_pointwise,
    })
}

/// `g(point)` by direct nested quadrature of the defining integrals, for
/// `N <= 2`. The integrals to infinity are cut where the kernel has decayed
/// below `1e-17`.
pub fn apply_a_quadrature(
    lambda: Complex64,
    c: f64,
    f: &SectorFunction<f64>,
    point: &[f64],
    opts: QuadOptions,
) -> Result<Complex64> {
    let n = f.particles();
    if n > MAX_PARTICLES {
        return Err(Error::SizeLimit {
            what: "particles for quadrature of A(lambda)",
            value: n,
            max: MAX_PARTICLES,
        });
    }
    if lambda.im >= 0.0 {
        return Err(Error::ConvergenceDomain(format!("need Im(lambda) < 0, got {lambda}")));
    }
    let mut x = point.to_vec();
    x.sort_by(f64::total_cmp);
    let growth = f
        .canonical()
        .terms()
        .iter()
        .map(|t| t.freq.iter().map(|w| (-w.im).max(0.0)).sum::<f64>())
        .fold(0.0, f64::max);
    let decay = -lambda.im - growth;
    if decay <= 0.0 {
        return Err(Error::ConvergenceDomain("kernel does not dominate the input growth".into()));
    }
    let tail = 40.0 / decay;
    let mut total = f.evaluate(&x);
    for subset in subsets(n) {
        let ranges: Vec<(f64, f64)> = subset
            .iter()
            .enumerate()
            .map(|(m, &s)| {
                let hi = subset.get(m + 1).map(|&e| x[e]).unwrap_or(x[n - 1] + tail);
                (x[s], hi)
            })
            .collect();
        let value = nested(0, &subset, &ranges, &mut x.clone(), lambda, f, &x, opts)?;
        total += value * c.powi(subset.len() as i32);
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn nested(
    m: usize,
    subset: &[usize],
    ranges: &[(f64, f64)],
    current: &mut Vec<f64>,
    lambda: Complex64,
    f: &SectorFunction<f64>,
    x: &[f64],
    opts: QuadOptions,
) -> Result<Complex64> {
    if m == subset.len() {
        let kernel: Complex64 = subset
            .iter()
            .map(|&j| Complex64::i() * lambda * (x[j] - current[j]))
            .sum();
        return Ok(kernel.exp() * f.evaluate(current));
    }
    let (lo, hi) = ranges[m];
    let j = subset[m];
    let breaks: Vec<f64> = x.to_vec();
    integrate_with_breaks(
        |v| {
            let mut next = current.clone();
            next[j] = v;
            nested(m + 1, subset, ranges, &mut next, lambda, f, x, opts)
        },
        lo,
        hi,
        &breaks,
        opts,
    )
}

/// Residuals of the boundary value problem relating `f` and `g = A f`.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpResidual<R: Real> {
    /// `prod (lambda + i d_j) g - prod (lambda + i d_j - ic) f` on the ordered region.
    pub pde: ExpPoly<R>,
    /// For each adjacent pair, `g`-bracket minus `f`-bracket at `x_{j+1} = x_j + 0`.
    pub brackets: Vec<ExpPoly<R>>,
}

impl<R: Real> BvpResidual<R> {
    pub fn is_zero(&self) -> bool {
        self.pde.is_empty() && self.brackets.iter().all(ExpPoly::is_empty)
    }

    pub fn max_coeff(&self) -> f64 {
        self.brackets.iter().map(ExpPoly::max_coeff).fold(self.pde.max_coeff(), f64::max)
    }
}

pub fn bvp_residual<R: Real>(
    lambda: &SpectralParameter<R>,
    c: &R,
    f: &SectorFunction<R>,
    g: &SectorFunction<R>,
) -> BvpResidual<R> {
    let lam = lambda.value().clone();
    let i = imag_unit::<R>();
    let ic = i.clone() * real(c.clone());
    let lhs = g.canonical().apply_symbol(|d| {
        d.iter()
            .fold(Complex::new(R::one(), R::zero()), |acc, dj| acc * (lam.clone() + i.clone() * dj.clone()))
    });
    let rhs = f.canonical().apply_symbol(|d| {
        d.iter().fold(Complex::new(R::one(), R::zero()), |acc, dj| {
            acc * (lam.clone() + i.clone() * dj.clone() - ic.clone())
        })
    });
    let n = f.particles();
    let brackets = (0..n.saturating_sub(1))
        .map(|j| {
            let gb = crate::charges::bracket(g.canonical(), c, j).restrict_to_boundary(j);
            let fb = crate::charges::bracket(f.canonical(), c, j).restrict_to_boundary(j);
            gb.sub(&fb)
        })
        .collect();
    BvpResidual {
        pde: lhs.sub(&rhs),
        brackets,
    }
}

/// The terms of the two-particle large-`lambda` expansion at one point
/// `x < y`, with `lambda = -i t` so that `i lambda = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionPoint {
    pub t: f64,
    /// Interior terms of orders `0..=3` in `1/(i lambda)`.
    pub interior: [Complex64; 4],
    /// `-c^2 e^{i lambda (x-y)} f(y,y) / (i lambda)^2` and
    /// `-c^2 e^{i lambda (x-y)} (f_x + f_y)(y,y) / (i lambda)^3`.
    pub boundary: [Complex64; 2],
    /// `A(lambda) f` at the point, from the closed form.
    pub exact: Complex64,
}

impl ExpansionPoint {
    /// `|exact - sum of interior terms up to order m|`.
    pub fn interior_error(&self, m: usize) -> f64 {
        let s: Complex64 = self.interior[..=m].iter().sum();
        (self.exact - s).norm()
    }

    /// Error of the full printed truncation (interior plus both boundary
    /// terms) at order 3.
    pub fn printed_error(&self) -> f64 {
        let s: Complex64 = self.interior.iter().sum::<Complex64>() + self.boundary[0] + self.boundary[1];
        (self.exact - s).norm()
    }
}

fn eval_at(p: &ExpPoly<f64>, point: &[f64]) -> Complex64 {
    p.evaluate(point)
}

/// The expansion terms of `A(lambda) f` for a two-particle `f` at `(x, y)`,
/// `x < y`, for each `t` in `t_grid` (with `lambda = -i t`).
pub fn asymptotic_expand(
    f: &SectorFunction<f64>,
    c: f64,
    x: f64,
    y: f64,
    t_grid: &[f64],
) -> Result<Vec<ExpansionPoint>> {
    if f.particles() != 2 {
        return Err(Error::DomainError("the expansion is for two-particle functions".into()));
    }
    if x >= y {
        return Err(Error::DomainError(format!("need x < y, got ({x}, {y})")));
    }
    let p = f.canonical();
    let fv = eval_at(p, &[x, y]);
    let d1 = eval_at(&p.differentiate(&[1, 0]).add(&p.differentiate(&[0, 1])), &[x, y]);
    let d2 = eval_at(&p.differentiate(&[2, 0]).add(&p.differentiate(&[0, 2])), &[x, y]);
    let fyy = eval_at(&p.restrict_pair(0, 1), &[y]);
    let d1yy = eval_at(
        &p.differentiate(&[1, 0]).add(&p.differentiate(&[0, 1])).restrict_pair(0, 1),
        &[y],
    );
    t_grid
        .iter()
        .map(|&t| {
            let lambda = SpectralParameter::new(Complex::new(0.0, -t))?;
            let g = apply_a(&lambda, &c, f)?;
            let il = t;
            let e = (-t * (y - x)).exp();
            Ok(ExpansionPoint {
                t,
                interior: [
                    fv,
                    2.0 * c * fv / il,
                    (c * d1 + c * c * fv) / il.powi(2),
                    (c * d2 + c * c * d1) / il.powi(3),
                ],
                boundary: [-c * c * e * fyy / il.powi(2), -c * c * e * d1yy / il.powi(3)],
                exact: g.evaluate(&[x, y]),
            })
        })
        .collect()
}

/// Fitted decay exponent of the interior truncation error at order `m`
/// (the slope of `log error` against `log t`, negated).
pub fn truncation_exponent(points: &[ExpansionPoint], m: usize) -> f64 {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.t, p.interior_error(m))).collect();
    -crate::lattice::log_log_slope(&xy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonuniformityPoint {
    pub t: f64,
    pub separation: f64,
    /// `|c^2 e^{i lambda (x-y)} f(y,y) / (i lambda)^2|`.
    pub boundary: f64,
    /// `e^{-1} c^2 |f(y,y)| / t^2`.
    pub bound: f64,
    /// `|c (f_x + f_y) + c^2 f| / t^2`, the retained second-order term.
    pub retained: f64,
    /// The same boundary term at separation `10/t`.
    pub boundary_far: f64,
    /// `c^2 |f(y,y)| t^{-2} int_0^1 e^{-t s} ds`, the boundary term integrated
    /// over separations in `(0, 1]`.
    pub integrated: f64,
}

impl NonuniformityPoint {
    pub fn not_negligible(&self) -> bool {
        self.boundary >= self.bound * (1.0 - 1e-12)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "t": self.t,
            "separation": self.separation,
            "boundary": self.boundary,
            "bound": self.bound,
            "retained": self.retained,
            "boundary_far": self.boundary_far,
            "integrated": self.integrated,
        })
    }
}

/// Evaluates the second-order boundary term at separation `s = 1/t` from the
/// diagonal point `(y, y)`, for each `t`.
pub fn nonuniformity_scan(f: &SectorFunction<f64>, c: f64, y: f64, t_grid: &[f64]) -> Result<Vec<NonuniformityPoint>> {
    if f.particles() != 2 {
        return Err(Error::DomainError("the scan is for two-particle functions".into()));
    }
    let p = f.canonical();
    let fyy = eval_at(&p.restrict_pair(0, 1), &[y]);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let s = 1.0 / t;
            let x = y - s;
            let lambda = Complex64::new(0.0, -t);
            let il = Complex64::i() * lambda;
            let kernel = (Complex64::i() * lambda * (x - y)).exp();
            let far = (Complex64::i() * lambda * (-10.0 / t)).exp();
            let fv = eval_at(p, &[x, y]);
            let d1 = eval_at(&p.differentiate(&[1, 0]).add(&p.differentiate(&[0, 1])), &[x, y]);
            let boundary = (c * c * kernel * fyy / (il * il)).norm();
            NonuniformityPoint {
                t,
                separation: s,
                boundary,
                bound: (-1.0f64).exp() * c * c * fyy.norm() / (t * t),
                retained: ((c * d1 + c * c * fv) / (il * il)).norm(),
                boundary_far: (c * c * far * fyy / (il * il)).norm(),
                integrated: c * c * fyy.norm() / (t * t) * (1.0 - (-t).exp()) / t,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq, q, Rational};
    use crate::symwave::{build_bethe, Coupling, RapiditySet};

    fn lam(re: i64, im: i64) -> SpectralParameter<Rational> {
        SpectralParameter::new(cq(q(re, 1), q(im, 1))).unwrap()
    }

    #[test]
    fn domain() {
        assert!(matches!(
            SpectralParameter::new(Complex::new(1.0, 0.0)),
            Err(Error::ConvergenceDomain(_))
        ));
        assert!(SpectralParameter::new(Complex::new(1.0, -1e-3)).is_ok());
    }

    #[test]
    fn vacuum_is_untouched() {
        let f = SectorFunction::new(crate::symwave::unit::<Rational>());
        let g = apply_a(&lam(0, -1), &q(2, 1), &f).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn one_particle_plane_wave() {
        let k = q(3, 2);
        let c = q(1, 2);
        let f = SectorFunction::new(ExpPoly::monomial(cq(q(1, 1), q(0, 1)), vec![real(k.clone())]));
        let l = lam(1, -2);
        let g = apply_a(&l, &c, &f).unwrap();
        let ev = a_eigenvalue(l.value(), &[k], &c).unwrap();
        assert_eq!(g.canonical(), &f.canonical().scale(&ev));
    }

    #[test]
    fn bethe_states_are_eigenfunctions() {
        for raps in [vec![q(1, 1), q(2, 1)], vec![q(-1, 2), q(1, 3), q(2, 1)]] {
            let w = build_bethe(RapiditySet::new(raps).unwrap(), Coupling::new(q(3, 4)).unwrap()).unwrap();
            let check = eigenvalue_check(&lam(1, -3), &w).unwrap();
            assert!(check.exact_zero(), "{:?}", check.residual);
            assert!(check.max_pointwise < 1e-10);
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let w = build_bethe(RapiditySet::new(vec![0.4, 1.3]).unwrap(), Coupling::new(0.8).unwrap()).unwrap();
        let f = SectorFunction::from_bethe(&w);
        let l = Complex64::new(0.3, -1.5);
        let g = apply_a(&SpectralParameter::new(l).unwrap(), &0.8, &f).unwrap();
        let point = [-0.2, 0.5];
        let numeric = apply_a_quadrature(l, 0.8, &f, &point, QuadOptions::with_rel_tol(1e-11)).unwrap();
        assert!((numeric - g.evaluate(&point)).norm() < 1e-8, "{numeric} vs {}", g.evaluate(&point));
    }

    #[test]
    fn bvp_holds_for_bethe_and_crafted_inputs() {
        let c = q(2, 3);
        let l = lam(-1, -2);
        let w = build_bethe(
            RapiditySet::new(vec![q(1, 1), q(5, 2)]).unwrap(),
            Coupling::new(c.clone()).unwrap(),
        )
        .unwrap();
        let f = SectorFunction::from_bethe(&w);
        let g = apply_a(&l, &c, &f).unwrap();
        assert!(bvp_residual(&l, &c, &f, &g).is_zero());

        let crafted = ExpPoly::from_terms(
            2,
            vec![
                Term::real(cq(q(2, 1), q(-1, 1)), vec![q(1, 2), q(-3, 1)]),
                Term::real(cq(q(0, 1), q(1, 1)), vec![q(2, 1), q(7, 3)]),
            ],
        );
        let f = SectorFunction::new(crafted);
        let g = apply_a(&l, &c, &f).unwrap();
        let r = bvp_residual(&l, &c, &f, &g);
        assert!(r.is_zero(), "{r:?}");
    }

    fn symmetrized(ks: &[Rational; 3]) -> SectorFunction<Rational> {
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let terms = orders
            .iter()
            .map(|p| Term::real(cq(q(1, 1), q(0, 1)), p.iter().map(|&i| ks[i].clone()).collect()))
            .collect();
        SectorFunction::new(ExpPoly::from_terms(3, terms))
    }

    #[test]
    fn three_particle_brackets_need_the_boundary_condition() {
        // A smooth symmetric input: the differential equation still holds,
        // the bracket equality does not.
        let c = q(2, 3);
        let l = lam(-1, -2);
        let f = symmetrized(&[q(1, 2), q(0, 1), q(-3, 1)]);
        let g = apply_a(&l, &c, &f).unwrap();
        let r = bvp_residual(&l, &c, &f, &g);
        assert!(r.pde.is_empty());
        assert!(r.brackets.iter().all(|b| !b.is_empty()));

        let pf = SectorFunction::new(ExpPoly::from_terms(
            3,
            f.canonical()
                .terms()
                .iter()
                .map(|t| Term::new(to_c64(&t.coeff), t.freq.iter().map(to_c64).collect()))
                .collect(),
        ));
        let point = [-0.3, 0.2, 0.6];
        let numeric = apply_a_quadrature(Complex64::new(-1.0, -2.0), 2.0 / 3.0, &pf, &point, QuadOptions::with_rel_tol(1e-9))
            .unwrap();
        assert!((numeric - g.evaluate(&point)).norm() < 1e-8);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let f = SectorFunction::new(ExpPoly::monomial(cq(q(1, 1), q(0, 1)), vec![real(q(1, 1)), real(q(4, 1))]));
        assert_eq!(apply_a(&lam(0, -1), &q(0, 1), &f).unwrap(), f);
    }

    fn smooth() -> SectorFunction<f64> {
        // e^{i(ax+by)} + e^{i(bx+ay)}: symmetric and smooth across x = y.
        let (a, b) = (0.7, -1.2);
        SectorFunction::new(ExpPoly::from_terms(
            2,
            vec![
                Term::real(Complex64::new(1.0, 0.0), vec![a, b]),
                Term::real(Complex64::new(1.0, 0.0), vec![b, a]),
            ],
        ))
    }

    #[test]
    fn constant_input_expansion() {
        let f = SectorFunction::new(ExpPoly::monomial(Complex64::new(1.0, 0.0), vec![0.0.into(), 0.0.into()]));
        let c = 0.9;
        let (x, y) = (0.2, 0.5);
        let pts = asymptotic_expand(&f, c, x, y, &[7.0]).unwrap();
        let p = &pts[0];
        let t: f64 = 7.0;
        let e = (-t * (y - x)).exp();
        // Exact: 1 + 2c/t + c^2 (1 - e)/t^2.
        let exact = 1.0 + 2.0 * c / t + c * c * (1.0 - e) / (t * t);
        assert!((p.exact - exact).norm() < 1e-13, "{} vs {exact}", p.exact);
        assert!((p.interior[2] - c * c / (t * t)).norm() < 1e-15);
        assert!((p.boundary[0] + c * c * e / (t * t)).norm() < 1e-15);
        assert!((p.printed_error()) < 1e-15);
    }

    #[test]
    fn interior_truncation_error_decay() {
        let grid = [20.0, 40.0, 80.0, 160.0];
        let pts = asymptotic_expand(&smooth(), 0.8, 0.0, 1.0, &grid).unwrap();
        for m in 0..=3 {
            let e = truncation_exponent(&pts, m);
            assert!((e - (m as f64 + 1.0)).abs() < 0.1 * (m as f64 + 1.0), "order {m}: {e}");
        }
    }

    #[test]
    fn boundary_term_is_not_negligible() {
        let pts = nonuniformity_scan(&smooth(), 0.8, 0.3, &[10.0, 20.0, 40.0, 80.0]).unwrap();
        for p in &pts {
            assert!(p.not_negligible());
            assert!(p.boundary / p.retained > 0.1);
            assert!((p.boundary_far / p.boundary - (-9.0f64).exp()).abs() < 1e-12);
        }
    }
}
