use std::cmp::Ordering;

use num_complex::{Complex, Complex64};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{
    c_abs, c_close, c_negligible, complex_from_json, complex_json, imag_unit, to_c64, Real,
};

/// One plane wave `coeff * exp(i * sum_n freq[n] * x[n])`.
///
/// Frequencies are complex so that the same representation carries the
/// exponentially decaying factors produced by the `A(lambda)` integrals;
/// wavefunctions built from real rapidities only ever have real frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<R: Real> {
    pub coeff: Complex<R>,
    pub freq: Vec<Complex<R>>,
}

impl<R: Real> Term<R> {
    pub fn new(coeff: Complex<R>, freq: Vec<Complex<R>>) -> Self {
        Self { coeff, freq }
    }

    /// Term with real frequencies.
    pub fn real(coeff: Complex<R>, freq: Vec<R>) -> Self {
        Self {
            coeff,
            freq: freq.into_iter().map(|w| Complex::new(w, R::zero())).collect(),
        }
    }
}

/// Finite sum of plane waves in `n` variables, valid on one ordered region.
///
/// Invariants after every public operation: no two terms share a frequency
/// vector and no coefficient is zero (exact field) or negligible relative to
/// the coefficients it was merged from (float field).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly<R: Real> {
    n: usize,
    terms: Vec<Term<R>>,
}

fn cmp_complex<R: Real>(a: &Complex<R>, b: &Complex<R>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

fn cmp_freq<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = cmp_complex(x, y);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn freq_close<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| c_close(x, y))
}

impl<R: Real> ExpPoly<R> {
    /// The empty sum in `n` variables.
    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    /// A single plane wave.
    pub fn monomial(coeff: Complex<R>, freq: Vec<Complex<R>>) -> Self {
        let n = freq.len();
        Self::from_terms(n, vec![Term::new(coeff, freq)])
    }

    /// Builds a polynomial from arbitrary terms, merging equal frequencies.
    ///
    /// Panics if a term's frequency vector does not have length `n`.
    pub fn from_terms(n: usize, terms: Vec<Term<R>>) -> Self {
        for t in &terms {
            assert_eq!(t.freq.len(), n, "term has wrong number of variables");
        }
        let mut p = Self { n, terms };
        p.canonicalize();
        p
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term<R>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient magnitude (0 for the empty sum).
    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| c_abs(&t.coeff)).fold(0.0, f64::max)
    }

    fn canonicalize(&mut self) {
        let mut terms = std::mem::take(&mut self.terms);
        terms.sort_by(|a, b| cmp_freq(&a.freq, &b.freq));
        let mut out: Vec<Term<R>> = Vec::with_capacity(terms.len());
        if R::EXACT {
            for t in terms {
                match out.last_mut() {
                    Some(last) if last.freq == t.freq => last.coeff = last.coeff.clone() + t.coeff,
                    _ => out.push(t),
                }
            }
            out.retain(|t| !c_negligible(&t.coeff, 0.0));
        } else {
            if self.n == 0 {
                let scale = terms.iter().map(|t| c_abs(&t.coeff)).fold(0.0, f64::max);
                let sum = terms
                    .into_iter()
                    .fold(Complex::new(R::zero(), R::zero()), |acc, t| acc + t.coeff);
                if !c_negligible(&sum, scale) {
                    out.push(Term::new(sum, Vec::new()));
                }
                self.terms = out;
                return;
            }
            // Float field: frequencies equal up to rounding may be separated
            // by a later component after sorting, so merge within blocks that
            // agree on the leading frequency.
            let mut i = 0;
            while i < terms.len() {
                let mut j = i + 1;
                while j < terms.len() && c_close(&terms[i].freq[0], &terms[j].freq[0]) {
                    j += 1;
                }
                let block = &terms[i..j];
                let mut used = vec![false; block.len()];
                for a in 0..block.len() {
                    if used[a] {
                        continue;
                    }
                    used[a] = true;
                    let mut sum = block[a].coeff.clone();
                    let mut scale = c_abs(&sum);
                    for b in a + 1..block.len() {
                        if !used[b] && freq_close(&block[a].freq, &block[b].freq) {
                            used[b] = true;
                            scale = scale.max(c_abs(&block[b].coeff));
                            sum = sum + block[b].coeff.clone();
                        }
                    }
                    if !c_negligible(&sum, scale) {
                        out.push(Term::new(sum, block[a].freq.clone()));
                    }
                }
                i = j;
            }
        }
        self.terms = out;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "variable count mismatch");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(self.n, terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(-t.coeff.clone(), t.freq.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Complex<R>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.coeff.clone() * s.clone(), t.freq.clone()))
            .collect();
        Self::from_terms(self.n, terms)
    }

    /// Applies a constant-coefficient differential operator given by its
    /// symbol: each term's coefficient is multiplied by `symbol(i * freq)`.
    pub fn apply_symbol<F>(&self, symbol: F) -> Self
    where
        F: Fn(&[Complex<R>]) -> Complex<R>,
    {
        let i = imag_unit::<R>();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let d: Vec<Complex<R>> = t.freq.iter().map(|w| i.clone() * w.clone()).collect();
                Term::new(t.coeff.clone() * symbol(&d), t.freq.clone())
            })
            .collect();
        Self::from_terms(self.n, terms)
    }

    /// Exact partial derivative `prod_n d^{m_n}/dx_n^{m_n}`.
    pub fn differentiate(&self, multi_index: &[u32]) -> Self {
        assert_eq!(multi_index.len(), self.n, "multi-index length mismatch");
        self.apply_symbol(|d| {
            let mut acc = Complex::new(R::one(), R::zero());
            for (dn, &m) in d.iter().zip(multi_index) {
                for _ in 0..m {
                    acc = acc * dn.clone();
                }
            }
            acc
        })
    }

    /// Sets `x[b] := x[a]` and drops variable `b`; the merged variable keeps
    /// position `a` (indices above `b` shift down by one).
    pub fn restrict_pair(&self, a: usize, b: usize) -> Self {
        assert!(a != b && a < self.n && b < self.n, "invalid pair ({a}, {b})");
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut freq = t.freq.clone();
                let wb = freq.remove(b);
                let ia = if a > b { a - 1 } else { a };
                freq[ia] = freq[ia].clone() + wb;
                Term::new(t.coeff.clone(), freq)
            })
            .collect();
        Self::from_terms(self.n - 1, terms)
    }

    /// Restriction to the hyperplane `x[j+1] = x[j]` (0-based `j`).
    pub fn restrict_to_boundary(&self, j: usize) -> Self {
        assert!(j + 1 < self.n, "boundary index {j} out of range for {} variables", self.n);
        self.restrict_pair(j, j + 1)
    }

    /// Renames variables: the term `exp(i w_m y_m)` becomes
    /// `exp(i w_m x_{map[m]})`.
    pub fn relabel(&self, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.n);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut freq = vec![Complex::new(R::zero(), R::zero()); self.n];
                for (m, w) in t.freq.iter().enumerate() {
                    freq[map[m]] = w.clone();
                }
                Term::new(t.coeff.clone(), freq)
            })
            .collect();
        Self::from_terms(self.n, terms)
    }

    /// Evaluates the sum at a real point.
    pub fn evaluate(&self, point: &[f64]) -> Complex64 {
        assert_eq!(point.len(), self.n, "point dimension mismatch");
        self.terms
            .iter()
            .map(|t| {
                let phase: Complex64 = t
                    .freq
                    .iter()
                    .zip(point)
                    .map(|(w, &x)| to_c64(w) * x)
                    .sum();
                to_c64(&t.coeff) * (Complex64::i() * phase).exp()
            })
            .sum()
    }

    /// Serializes to `{"n": N, "terms": [{"re", "im", "freq"}]}`.
    ///
    /// Real frequencies are written as plain scalars; a frequency with a
    /// nonzero imaginary part is written as `{"re", "im"}`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                let freq: Vec<Value> = t
                    .freq
                    .iter()
                    .map(|w| if w.im.is_zero() { w.re.to_json() } else { complex_json(w) })
                    .collect();
                json!({ "re": t.coeff.re.to_json(), "im": t.coeff.im.to_json(), "freq": freq })
            })
            .collect();
        json!({ "n": self.n, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("missing 'n'".into()))? as usize;
        let raw = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing 'terms'".into()))?;
        let mut terms = Vec::with_capacity(raw.len());
        for t in raw {
            let coeff = complex_from_json::<R>(t)?;
            let freq = t
                .get("freq")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Json("term is missing 'freq'".into()))?
                .iter()
                .map(|w| {
                    if w.get("re").is_some() {
                        complex_from_json::<R>(w)
                    } else {
                        R::from_json(w).map(|x| Complex::new(x, R::zero()))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if freq.len() != n {
                return Err(Error::Json(format!(
                    "term has {} frequencies, expected {n}",
                    freq.len()
                )));
            }
            terms.push(Term::new(coeff, freq));
        }
        Ok(Self::from_terms(n, terms))
    }
}

impl<R: Real> Default for ExpPoly<R> {
    fn default() -> Self {
        Self::zero(0)
    }
}

/// Constant `1` in zero variables; handy as the N = 0 wavefunction.
pub fn unit<R: Real>() -> ExpPoly<R> {
    ExpPoly::monomial(Complex::new(R::one(), R::zero()), Vec::new())
}

#[allow(dead_code)]
pub(crate) fn is_unit<R: Real>(p: &ExpPoly<R>) -> bool {
    p.n == 0 && p.terms.len() == 1 && crate::scalar::is_one(&p.terms[0].coeff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq, q, Rational};

    fn cr(re: i64, im: i64) -> Complex<Rational> {
        cq(q(re, 1), q(im, 1))
    }

    fn rf(ws: &[i64]) -> Vec<Complex<Rational>> {
        ws.iter().map(|&w| cr(w, 0)).collect()
    }

    #[test]
    fn derivative_of_single_wave() {
        let p = ExpPoly::monomial(cr(1, 0), rf(&[5]));
        let d = p.differentiate(&[1]);
        assert_eq!(d.terms(), &[Term::new(cr(0, 5), rf(&[5]))]);
        let d2 = p.differentiate(&[2]);
        assert_eq!(d2.terms(), &[Term::new(cr(-25, 0), rf(&[5]))]);
    }

    #[test]
    fn mixed_derivative() {
        let p = ExpPoly::monomial(cr(3, 1), rf(&[2, 7]));
        let d = p.differentiate(&[1, 1]);
        // -(3+i) * 2 * 7
        assert_eq!(d.terms(), &[Term::new(cr(-42, -14), rf(&[2, 7]))]);
    }

    #[test]
    fn restriction_merges_and_cancels() {
        let p = ExpPoly::monomial(cr(1, 0), rf(&[2, 3]));
        assert_eq!(p.restrict_to_boundary(0).terms(), &[Term::new(cr(1, 0), rf(&[5]))]);

        let p = ExpPoly::from_terms(
            2,
            vec![Term::new(cr(1, 0), rf(&[2, 3])), Term::new(cr(-1, 0), rf(&[3, 2]))],
        );
        assert_eq!(p.len(), 2);
        assert!(p.restrict_to_boundary(0).is_empty());
    }

    #[test]
    fn restrict_pair_non_adjacent() {
        let p = ExpPoly::monomial(cr(1, 0), rf(&[1, 2, 4]));
        let r = p.restrict_pair(2, 0);
        assert_eq!(r.terms(), &[Term::new(cr(1, 0), rf(&[2, 5]))]);
    }

    #[test]
    fn float_merge_cancels_rounding_noise() {
        let a = Term::real(Complex64::new(0.1 + 0.2, 0.0), vec![1.0, 2.0]);
        let b = Term::real(Complex64::new(-0.3, 0.0), vec![1.0 + 1e-16, 2.0]);
        let p = ExpPoly::from_terms(2, vec![a, b]);
        assert!(p.is_empty());
    }

    #[test]
    fn json_round_trip_exact() {
        let p = ExpPoly::from_terms(
            2,
            vec![
                Term::new(cq(q(1, 2), q(-3, 7)), rf(&[1, -4])),
                Term::new(cr(2, 0), vec![cr(0, 0), cq(q(1, 3), q(-1, 1))]),
            ],
        );
        let v = p.to_json();
        assert_eq!(v["n"], 2);
        assert_eq!(v["terms"][1]["re"], json!({"num": 1, "den": 2}));
        assert_eq!(ExpPoly::<Rational>::from_json(&v).unwrap(), p);
    }

    #[test]
    fn json_rejects_bad_arity() {
        let v = json!({"n": 2, "terms": [{"re": 1.0, "im": 0.0, "freq": [1.0]}]});
        assert!(ExpPoly::<f64>::from_json(&v).is_err());
    }

    #[test]
    fn evaluate_plane_wave() {
        let p = ExpPoly::monomial(Complex64::new(2.0, 0.0), vec![Complex64::new(1.5, 0.0)]);
        let v = p.evaluate(&[0.7]);
        let expect = 2.0 * (Complex64::i() * 1.05).exp();
        assert!((v - expect).norm() < 1e-15);
    }
}
