//! Truncated power series in `z = 1/lambda`.

use num_complex::Complex;
use num_traits::Zero;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{c_negligible, complex_json, real, Real};

/// `sum_{k=0}^{K} a_k lambda^{-k}`, closed under arithmetic at order `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries<R: Real> {
    coeffs: Vec<Complex<R>>,
}

fn czero<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::zero())
}

fn cone<R: Real>() -> Complex<R> {
    Complex::new(R::one(), R::zero())
}

impl<R: Real> LaurentSeries<R> {
    /// Coefficients `a_0 ..= a_K`; the truncation order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Complex<R>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Series("a series needs at least the constant term".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![czero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = cone();
        s
    }

    /// `1 + a / (lambda - b)`, expanded as `1 + a sum_{m>=1} b^{m-1} z^m`.
    pub fn simple_pole_factor(a: &Complex<R>, b: &Complex<R>, order: usize) -> Self {
        let mut s = Self::one(order);
        let mut pow = cone::<R>();
        for m in 1..=order {
            s.coeffs[m] = a.clone() * pow.clone();
            pow = pow * b.clone();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex<R>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Complex<R> {
        &self.coeffs[k]
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(Error::Series(format!(
                "truncation orders differ ({} and {})",
                self.order(),
                other.order()
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect(),
        })
    }

    pub fn scale(&self, s: &Complex<R>) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.clone() * s.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let k = self.order();
        let mut out = vec![czero::<R>(); k + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(k + 1 - i).enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(Self { coeffs: out })
    }

    fn is_one_at(&self, k: usize, want_one: bool) -> bool {
        let target = if want_one { cone() } else { czero() };
        let d = self.coeffs[k].clone() - target;
        if R::EXACT {
            d.is_zero()
        } else {
            c_negligible(&d, 1.0)
        }
    }

    /// Logarithm of a series with `a_0 = 1`, from
    /// `k l_k = k a_k - sum_{j=1}^{k-1} j l_j a_{k-j}`.
    pub fn log(&self) -> Result<Self> {
        if !self.is_one_at(0, true) {
            return Err(Error::Series("log requires a_0 = 1".into()));
        }
        let k = self.order();
        let mut l = vec![czero::<R>(); k + 1];
        for m in 1..=k {
            let mut acc = real(R::from_i64(m as i64)) * self.coeffs[m].clone();
            for j in 1..m {
                acc = acc - real(R::from_i64(j as i64)) * l[j].clone() * self.coeffs[m - j].clone();
            }
            l[m] = acc / real(R::from_i64(m as i64));
        }
        Ok(Self { coeffs: l })
    }

    /// Exponential of a series with `a_0 = 0`, from
    /// `k e_k = sum_{j=1}^{k} j l_j e_{k-j}`.
    pub fn exp(&self) -> Result<Self> {
        if !self.is_one_at(0, false) {
            return Err(Error::Series("exp requires a_0 = 0".into()));
        }
        let k = self.order();
        let mut e = vec![czero::<R>(); k + 1];
        e[0] = cone();
        for m in 1..=k {
            let mut acc = czero::<R>();
            for j in 1..=m {
                acc = acc + real(R::from_i64(j as i64)) * self.coeffs[j].clone() * e[m - j].clone();
            }
            e[m] = acc / real(R::from_i64(m as i64));
        }
        Ok(Self { coeffs: e })
    }

    /// Evaluates the truncated sum at `lambda`.
    pub fn evaluate(&self, lambda: num_complex::Complex64) -> num_complex::Complex64 {
        let z = 1.0 / lambda;
        self.coeffs
            .iter()
            .rev()
            .fold(num_complex::Complex64::new(0.0, 0.0), |acc, a| {
                acc * z + crate::scalar::to_c64(a)
            })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(complex_json).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq, q, Rational};

    fn cr(re: i64, im: i64) -> Complex<Rational> {
        cq(q(re, 1), q(im, 1))
    }

    #[test]
    fn single_factor_expansion() {
        // 1 - ic / (lambda - k): a_m = -ic k^{m-1}.
        let c = q(3, 2);
        let k = q(-2, 3);
        let ic = cq(q(0, 1), c.clone());
        let s = LaurentSeries::simple_pole_factor(&-ic.clone(), &real(k.clone()), 6);
        assert_eq!(s.coeff(0), &cr(1, 0));
        let mut pow = real(q(1, 1));
        for m in 1..=6 {
            assert_eq!(s.coeff(m), &(-ic.clone() * pow.clone()));
            pow = pow * real(k.clone());
        }
    }

    #[test]
    fn two_factor_product_second_coefficient() {
        let (k1, k2, c) = (q(1, 3), q(5, 2), q(2, 1));
        let ic = cq(q(0, 1), c.clone());
        let f = |k: &Rational| LaurentSeries::simple_pole_factor(&-ic.clone(), &real(k.clone()), 4);
        let p = f(&k1).mul(&f(&k2)).unwrap();
        let expected = -ic.clone() * real(k1 + k2) - real(c.clone() * c);
        assert_eq!(p.coeff(2), &expected);
    }

    #[test]
    fn exp_inverts_log_exactly() {
        let s = LaurentSeries::new(vec![cr(1, 0), cr(2, -1), cr(0, 3), cr(-5, 1), cr(7, 7), cr(1, -9)])
            .unwrap();
        assert_eq!(s.log().unwrap().exp().unwrap(), s);
    }

    #[test]
    fn scalar_log_oracle() {
        // log(1 - ic/(lambda - k)) = -sum_m ((k + ic)^m - k^m) z^m / m.
        let (k, c) = (q(3, 4), q(1, 2));
        let ic = cq(q(0, 1), c.clone());
        let s = LaurentSeries::simple_pole_factor(&-ic.clone(), &real(k.clone()), 6).log().unwrap();
        let kc = real(k.clone());
        let kic = kc.clone() + ic;
        for m in 1..=6u32 {
            let expected = -(crate::scalar::cpow(&kic, m) - crate::scalar::cpow(&kc, m))
                / real(Rational::from_i64(m as i64));
            assert_eq!(s.coeff(m as usize), &expected);
        }
    }

    #[test]
    fn domain_errors() {
        let s = LaurentSeries::new(vec![cr(2, 0), cr(1, 0)]).unwrap();
        assert!(s.log().is_err());
        assert!(s.exp().is_err());
        assert!(s.add(&LaurentSeries::one(3)).is_err());
        assert!(LaurentSeries::<f64>::new(vec![]).is_err());
    }
}
