//! Real scalar fields used for rapidities, couplings and plane-wave frequencies.
//!
//! Two fields are supported: [`Rational`] (exact, arbitrary precision) and
//! `f64`. Every algebraic structure in the crate is generic over [`Real`],
//! and complex quantities are `num_complex::Complex<R>`.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Relative tolerance used by the float field when comparing frequencies and
/// deciding whether a merged coefficient has cancelled.
pub const FLOAT_MERGE_TOL: f64 = 1e-12;

pub trait Real:
    Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// `true` for exact arithmetic; equality checks are then bit-exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Nearest representable value of a float. Exact for dyadic rationals.
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    /// Equality in the exact field, relative closeness for floats.
    fn close(a: &Self, b: &Self) -> bool;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;
}

impl Real for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn close(a: &Self, b: &Self) -> bool {
        let scale = a.abs().max(b.abs()).max(1.0);
        (a - b).abs() <= FLOAT_MERGE_TOL * scale
    }

    fn to_json(&self) -> Value {
        json!(*self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .ok_or_else(|| Error::Json(format!("expected a number, found {v}")))
    }
}

impl Real for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn close(a: &Self, b: &Self) -> bool {
        a == b
    }

    fn to_json(&self) -> Value {
        json!({ "num": bigint_json(self.numer()), "den": bigint_json(self.denom()) })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let part = |key: &str| -> Result<BigInt> {
            match v.get(key) {
                Some(Value::Number(n)) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| Error::Json(format!("{key} is not an integer"))),
                Some(Value::String(s)) => s
                    .parse::<BigInt>()
                    .map_err(|e| Error::Json(format!("{key}: {e}"))),
                _ => Err(Error::Json(format!("rational is missing '{key}'"))),
            }
        };
        let den = part("den")?;
        if den.is_zero() {
            return Err(Error::Json("zero denominator".into()));
        }
        Ok(BigRational::new(part("num")?, den))
    }
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        if let (Some(n), Some(d)) = (self.numer().to_f64(), self.denom().to_f64()) {
            if n.is_finite() && d.is_finite() && d != 0.0 {
                return n / d;
            }
        }
        // Huge numerator/denominator: shift both down before dividing.
        let bits = self.numer().bits().max(self.denom().bits()) as i64 - 1000;
        let shift = bits.max(0) as usize;
        let n = (self.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (self.denom() >> shift).to_f64().unwrap_or(1.0);
        n / d
    }
}

fn bigint_json(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => json!(i),
        None => json!(v.to_string()),
    }
}

/// The imaginary unit in field `R`.
pub fn imag_unit<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::one())
}

pub fn real<R: Real>(v: R) -> Complex<R> {
    Complex::new(v, R::zero())
}

pub fn to_c64<R: Real>(z: &Complex<R>) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

pub fn c_from_c64<R: Real>(z: Complex64) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

/// `z^k` by repeated multiplication (keeps exact fields exact).
pub fn cpow<R: Real>(z: &Complex<R>, k: u32) -> Complex<R> {
    let mut out = Complex::new(R::one(), R::zero());
    for _ in 0..k {
        out = out * z.clone();
    }
    out
}

pub fn rpow<R: Real>(x: &R, k: u32) -> R {
    let mut out = R::one();
    for _ in 0..k {
        out = out * x.clone();
    }
    out
}

/// `true` when `z` is zero in the exact field or negligible relative to `scale`.
pub fn c_negligible<R: Real>(z: &Complex<R>, scale: f64) -> bool {
    if R::EXACT {
        z.re.is_zero() && z.im.is_zero()
    } else {
        to_c64(z).norm() <= FLOAT_MERGE_TOL * scale.max(f64::MIN_POSITIVE)
    }
}

pub fn c_close<R: Real>(a: &Complex<R>, b: &Complex<R>) -> bool {
    R::close(&a.re, &b.re) && R::close(&a.im, &b.im)
}

/// Magnitude as f64, for scale bookkeeping.
pub fn c_abs<R: Real>(z: &Complex<R>) -> f64 {
    to_c64(z).norm()
}

pub fn complex_json<R: Real>(z: &Complex<R>) -> Value {
    json!({ "re": z.re.to_json(), "im": z.im.to_json() })
}

pub fn complex_from_json<R: Real>(v: &Value) -> Result<Complex<R>> {
    let re = v
        .get("re")
        .ok_or_else(|| Error::Json("complex is missing 're'".into()))?;
    let im = v
        .get("im")
        .ok_or_else(|| Error::Json("complex is missing 'im'".into()))?;
    Ok(Complex::new(R::from_json(re)?, R::from_json(im)?))
}

/// Rational `num/den` as an exact scalar; panics on a zero denominator.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// Exact complex rational `re + i im`.
pub fn cq(re: Rational, im: Rational) -> Complex<Rational> {
    Complex::new(re, im)
}

pub(crate) fn is_one<R: Real>(z: &Complex<R>) -> bool {
    z.re.is_one() && z.im.is_zero()
}
