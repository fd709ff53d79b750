use num_complex::{Complex, Complex64};
use serde_json::{json, Value};

use super::exppoly::{ExpPoly, Term};
use crate::error::{Error, Result};
use crate::scalar::{imag_unit, real, Real};

/// Default cap on the particle number for [`build_bethe`]: 8! = 40320 terms.
pub const DEFAULT_MAX_PARTICLES: usize = 8;

/// Repulsive coupling `c > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<R: Real>(R);

impl<R: Real> Coupling<R> {
    pub fn new(c: R) -> Result<Self> {
        if c > R::zero() {
            Ok(Self(c))
        } else {
            Err(Error::DomainError(format!(
                "coupling must be positive (repulsive), got {}",
                c.to_f64()
            )))
        }
    }

    pub fn value(&self) -> &R {
        &self.0
    }
}

/// Pairwise distinct rapidities, stored in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct RapiditySet<R: Real> {
    values: Vec<R>,
}

impl<R: Real> RapiditySet<R> {
    pub fn new(mut values: Vec<R>) -> Result<Self> {
        values.sort_by(|a, b| a.partial_cmp(b).expect("rapidities must be comparable"));
        for i in 1..values.len() {
            if R::close(&values[i - 1], &values[i]) {
                return Err(Error::DegenerateRapidities { index: i });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Real::to_f64).collect()
    }
}

/// Bethe eigenfunction of the delta-interacting Bose gas.
///
/// `canonical` is the plane-wave expansion valid on `x_1 < ... < x_N`; every
/// other ordering is obtained by symmetric extension.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheWavefunction<R: Real> {
    rapidities: RapiditySet<R>,
    coupling: Coupling<R>,
    canonical: ExpPoly<R>,
}

/// Visits every permutation `p` of `0..n` together with its sign and the
/// product `prod_{j>k} factor(p[j], p[k], j, k)`, accumulating prefix products.
fn for_each_permutation<R, F, V>(n: usize, factor: &F, visit: &mut V)
where
    R: Real,
    F: Fn(usize, usize, usize, usize) -> Complex<R>,
    V: FnMut(&[usize], bool, &Complex<R>),
{
    fn rec<R, F, V>(
        n: usize,
        perm: &mut Vec<usize>,
        used: &mut [bool],
        odd: bool,
        acc: Complex<R>,
        factor: &F,
        visit: &mut V,
    ) where
        R: Real,
        F: Fn(usize, usize, usize, usize) -> Complex<R>,
        V: FnMut(&[usize], bool, &Complex<R>),
    {
        let j = perm.len();
        if j == n {
            visit(perm, odd, &acc);
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            // Inversions contributed by placing v after the current prefix.
            let inversions = perm.iter().filter(|&&u| u > v).count();
            let mut next = acc.clone();
            for (k, &u) in perm.iter().enumerate() {
                next = next * factor(v, u, j, k);
            }
            used[v] = true;
            perm.push(v);
            rec(n, perm, used, odd ^ (inversions % 2 == 1), next, factor, visit);
            perm.pop();
            used[v] = false;
        }
    }
    let one = Complex::new(R::one(), R::zero());
    rec(n, &mut Vec::with_capacity(n), &mut vec![false; n], false, one, factor, visit);
}

/// Expands the Bethe sum with the sign pattern `sgn(x_j - x_k)` given by
/// `sign(j, k)`, as a plane-wave sum in the original variables.
fn bethe_sum<R: Real>(lam: &[R], c: &R, sign: impl Fn(usize, usize) -> i32) -> ExpPoly<R> {
    let n = lam.len();
    let ic = imag_unit::<R>() * real(c.clone());
    let factor = |pj: usize, pk: usize, j: usize, k: usize| {
        let diff = real(lam[pj].clone() - lam[pk].clone());
        match sign(j, k) {
            1 => diff - ic.clone(),
            -1 => diff + ic.clone(),
            _ => unreachable!("coincident coordinates have no sign"),
        }
    };
    let mut terms = Vec::new();
    for_each_permutation(n, &factor, &mut |perm, odd, prod| {
        let coeff = if odd { -prod.clone() } else { prod.clone() };
        let freq = perm.iter().map(|&p| lam[p].clone()).collect();
        terms.push(Term::real(coeff, freq));
    });
    ExpPoly::from_terms(n, terms)
}

/// Builds the Bethe wavefunction with the default size cap.
pub fn build_bethe<R: Real>(
    rapidities: RapiditySet<R>,
    coupling: Coupling<R>,
) -> Result<BetheWavefunction<R>> {
    build_bethe_limited(rapidities, coupling, DEFAULT_MAX_PARTICLES)
}

pub fn build_bethe_limited<R: Real>(
    rapidities: RapiditySet<R>,
    coupling: Coupling<R>,
    max_particles: usize,
) -> Result<BetheWavefunction<R>> {
    let n = rapidities.len();
    if n > max_particles {
        return Err(Error::SizeLimit {
            what: "particle number",
            value: n,
            max: max_particles,
        });
    }
    let canonical = bethe_sum(rapidities.values(), coupling.value(), |_, _| 1);
    Ok(BetheWavefunction {
        rapidities,
        coupling,
        canonical,
    })
}

/// Position of each variable in an ordering `x_{order[0]} < x_{order[1]} < ...`.
fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; order.len()];
    for (p, &v) in order.iter().enumerate() {
        assert!(v < order.len() && pos[v] == usize::MAX, "not a permutation: {order:?}");
        pos[v] = p;
    }
    pos
}

impl<R: Real> BetheWavefunction<R> {
    pub fn rapidities(&self) -> &RapiditySet<R> {
        &self.rapidities
    }

    pub fn coupling(&self) -> &Coupling<R> {
        &self.coupling
    }

    pub fn canonical(&self) -> &ExpPoly<R> {
        &self.canonical
    }

    pub fn particles(&self) -> usize {
        self.rapidities.len()
    }

    /// Symmetric extension on the region `x_{order[0]} < x_{order[1]} < ...`.
    pub fn region_form(&self, order: &[usize]) -> ExpPoly<R> {
        assert_eq!(order.len(), self.particles());
        positions(order);
        self.canonical.relabel(order)
    }

    /// The Bethe sum evaluated directly with the sign pattern of the region
    /// `x_{order[0]} < x_{order[1]} < ...`, without symmetrization.
    pub fn formula_form(&self, order: &[usize]) -> ExpPoly<R> {
        assert_eq!(order.len(), self.particles());
        let pos = positions(order);
        bethe_sum(self.rapidities.values(), self.coupling.value(), |j, k| {
            if pos[j] > pos[k] {
                1
            } else {
                -1
            }
        })
    }

    /// Value of the symmetric extension; coincident coordinates give the
    /// common one-sided limit.
    pub fn evaluate(&self, point: &[f64]) -> Complex64 {
        let mut sorted = point.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        self.canonical.evaluate(&sorted)
    }

    pub fn to_json(&self) -> Value {
        let mut doc = self.canonical.to_json();
        doc["rapidities"] = Value::Array(self.rapidities.values.iter().map(Real::to_json).collect());
        doc["c"] = self.coupling.0.to_json();
        doc
    }

    /// Parses a document written by [`Self::to_json`]; the stored terms must
    /// agree with a fresh construction from the rapidities.
    pub fn from_json(v: &Value) -> Result<Self> {
        let raps = v
            .get("rapidities")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing 'rapidities'".into()))?
            .iter()
            .map(R::from_json)
            .collect::<Result<Vec<_>>>()?;
        let c = R::from_json(v.get("c").ok_or_else(|| Error::Json("missing 'c'".into()))?)?;
        let stored = ExpPoly::<R>::from_json(v)?;
        let w = build_bethe(RapiditySet::new(raps)?, Coupling::new(c)?)?;
        if !w.canonical.sub(&stored).is_empty() {
            return Err(Error::Json("terms do not match the rapidities".into()));
        }
        Ok(w)
    }
}

impl<R: Real> std::fmt::Display for BetheWavefunction<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "chi_{}(c = {}, lambda = {:?})",
            self.particles(),
            self.coupling.0.to_f64(),
            self.rapidities.to_f64()
        )
    }
}

/// `json!` helper for reports that only need the float view of a wavefunction.
pub fn summary_json<R: Real>(w: &BetheWavefunction<R>) -> Value {
    json!({
        "n": w.particles(),
        "c": w.coupling.0.to_f64(),
        "rapidities": w.rapidities.to_f64(),
        "terms": w.canonical.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq, q, Rational};

    fn exact(raps: &[(i64, i64)], c: (i64, i64)) -> BetheWavefunction<Rational> {
        let r = RapiditySet::new(raps.iter().map(|&(a, b)| q(a, b)).collect()).unwrap();
        build_bethe(r, Coupling::new(q(c.0, c.1)).unwrap()).unwrap()
    }

    fn coeff_of(p: &ExpPoly<Rational>, freq: &[i64]) -> Option<Complex<Rational>> {
        p.terms()
            .iter()
            .find(|t| t.freq.iter().zip(freq).all(|(w, &f)| *w == real(q(f, 1))))
            .map(|t| t.coeff.clone())
    }

    #[test]
    fn one_particle_is_a_plane_wave() {
        let w = exact(&[(3, 2)], (1, 1));
        assert_eq!(w.canonical().len(), 1);
        assert_eq!(w.canonical().terms()[0].coeff, cq(q(1, 1), q(0, 1)));
        assert!((w.evaluate(&[0.0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_particle_coefficients() {
        let w = exact(&[(1, 1), (2, 1)], (3, 1));
        let p = w.canonical();
        assert_eq!(coeff_of(p, &[1, 2]), Some(cq(q(1, 1), q(-3, 1))));
        assert_eq!(coeff_of(p, &[2, 1]), Some(cq(q(1, 1), q(3, 1))));
    }

    #[test]
    fn three_particle_identity_coefficient() {
        let w = exact(&[(1, 1), (2, 1), (3, 1)], (1, 1));
        assert_eq!(w.canonical().len(), 6);
        let one_minus_i = cq(q(1, 1), q(-1, 1));
        let two_minus_i = cq(q(2, 1), q(-1, 1));
        let expected = one_minus_i.clone() * two_minus_i * one_minus_i;
        assert_eq!(coeff_of(w.canonical(), &[1, 2, 3]), Some(expected));
    }

    #[test]
    fn coincident_point_limit() {
        let w = build_bethe(RapiditySet::new(vec![0.5, 2.0]).unwrap(), Coupling::new(1.0).unwrap())
            .unwrap();
        let x = 0.7;
        let expected = Complex64::new(0.0, x * 2.5).exp() * 2.0 * 1.5;
        assert!((w.evaluate(&[x, x]) - expected).norm() < 1e-12);
    }

    #[test]
    fn continuity_across_adjacent_regions() {
        let w = exact(&[(-1, 2), (1, 3), (2, 1), (7, 5)], (5, 4));
        let id = [0, 1, 2, 3];
        for j in 0..3 {
            let mut swapped = id;
            swapped.swap(j, j + 1);
            let jump = w
                .formula_form(&id)
                .restrict_to_boundary(j)
                .sub(&w.formula_form(&swapped).restrict_to_boundary(j));
            assert!(jump.is_empty(), "jump across boundary {j}");
        }
    }

    #[test]
    fn formula_form_matches_symmetric_extension() {
        let w = exact(&[(0, 1), (1, 2), (3, 1)], (2, 1));
        for order in [[0, 1, 2], [1, 0, 2], [2, 0, 1], [2, 1, 0]] {
            assert!(w.formula_form(&order).sub(&w.region_form(&order)).is_empty());
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            RapiditySet::new(vec![q(1, 2), q(1, 2)]),
            Err(Error::DegenerateRapidities { .. })
        ));
        assert!(Coupling::new(q(0, 1)).is_err());
        let r = RapiditySet::new((0..4).map(|k| k as f64).collect()).unwrap();
        assert!(matches!(
            build_bethe_limited(r, Coupling::new(1.0).unwrap(), 3),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let w = exact(&[(1, 3), (2, 1)], (1, 2));
        let back = BetheWavefunction::<Rational>::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
    }
}
