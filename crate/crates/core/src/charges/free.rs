use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{imag_unit, real, Real};
use crate::symmetric::{elementary, power_sum};
use crate::symwave::{BetheWavefunction, ExpPoly, RapiditySet};

/// The conserved charges and the auxiliary `J_n` operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChargeName {
    H1,
    H2,
    J2,
    J3,
    J4,
    H3,
    H4,
}

impl ChargeName {
    pub const ALL: [ChargeName; 7] = [
        ChargeName::H1,
        ChargeName::H2,
        ChargeName::J2,
        ChargeName::J3,
        ChargeName::J4,
        ChargeName::H3,
        ChargeName::H4,
    ];

    /// Smallest particle number on which the operator is not identically zero.
    pub fn min_particles(self) -> usize {
        match self {
            ChargeName::J3 => 3,
            ChargeName::J4 => 4,
            ChargeName::J2 => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ChargeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChargeName::H1 => "H1",
            ChargeName::H2 => "H2",
            ChargeName::J2 => "J2",
            ChargeName::J3 => "J3",
            ChargeName::J4 => "J4",
            ChargeName::H3 => "H3",
            ChargeName::H4 => "H4",
        };
        f.write_str(s)
    }
}

impl FromStr for ChargeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChargeName::ALL
            .into_iter()
            .find(|n| n.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::DomainError(format!("unknown charge '{s}'")))
    }
}

/// Differential part of a charge, written as a symmetric polynomial in the
/// derivatives `d_j = d/dx_j`.
///
/// | name | free part            | delta layers |
/// |------|----------------------|--------------|
/// | H1   | `sum d_j`            | 0            |
/// | H2   | `-sum d_j^2`         | 1            |
/// | J2   | `e_2(d)`             | 1            |
/// | J3   | `e_3(d)`             | 1            |
/// | J4   | `e_4(d)`             | 2            |
/// | H3   | `sum d_j^3`          | 1            |
/// | H4   | `sum d_j^4`          | 2            |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeChargeSpec {
    pub name: ChargeName,
    pub delta_rank: u32,
}

impl FreeChargeSpec {
    pub fn new(name: ChargeName) -> Self {
        let delta_rank = match name {
            ChargeName::H1 => 0,
            ChargeName::J4 | ChargeName::H4 => 2,
            _ => 1,
        };
        Self { name, delta_rank }
    }

    /// Value of the free part on derivative eigenvalues `d`.
    pub fn symbol<R: Real>(&self, d: &[Complex<R>]) -> Complex<R> {
        match self.name {
            ChargeName::H1 => power_sum(d, 1),
            ChargeName::H2 => -power_sum(d, 2),
            ChargeName::J2 => elementary(d, 2),
            ChargeName::J3 => elementary(d, 3),
            ChargeName::J4 => elementary(d, 4),
            ChargeName::H3 => power_sum(d, 3),
            ChargeName::H4 => power_sum(d, 4),
        }
    }
}

/// Eigenvalue of a charge on a Bethe state, with the symmetric function that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeEigenvalue<R: Real> {
    pub value: Complex<R>,
    pub formula: &'static str,
}

pub fn charge_eigenvalue<R: Real>(name: ChargeName, rapidities: &RapiditySet<R>) -> ChargeEigenvalue<R> {
    let lam = rapidities.values();
    let i = imag_unit::<R>();
    let i3 = -i.clone();
    let (value, formula) = match name {
        ChargeName::H1 => (i * real(power_sum(lam, 1)), "i p1"),
        ChargeName::H2 => (real(power_sum(lam, 2)), "p2"),
        ChargeName::J2 => (-real(elementary(lam, 2)), "-e2"),
        ChargeName::J3 => (i3 * real(elementary(lam, 3)), "i^3 e3"),
        ChargeName::J4 => (real(elementary(lam, 4)), "e4"),
        ChargeName::H3 => (i3 * real(power_sum(lam, 3)), "i^3 p3"),
        ChargeName::H4 => (real(power_sum(lam, 4)), "p4"),
    };
    ChargeEigenvalue { value, formula }
}

/// Applies the free part of a charge to the canonical-region form of `w`.
pub fn apply_free_part<R: Real>(spec: FreeChargeSpec, w: &BetheWavefunction<R>) -> ExpPoly<R> {
    apply_free_part_to(spec, w.canonical())
}

pub fn apply_free_part_to<R: Real>(spec: FreeChargeSpec, p: &ExpPoly<R>) -> ExpPoly<R> {
    p.apply_symbol(|d| spec.symbol(d))
}

/// `free_part(chi) - eigenvalue * chi` on the canonical region.
pub fn interior_residual<R: Real>(name: ChargeName, w: &BetheWavefunction<R>) -> ExpPoly<R> {
    let ev = charge_eigenvalue(name, w.rapidities()).value;
    apply_free_part(FreeChargeSpec::new(name), w).sub(&w.canonical().scale(&ev))
}

/// Both sides of the two composition identities
/// `H3 = H1^3 - 3 H1 J2 + 3 J3` and
/// `H4 = H1^4 + 2 J2^2 - 4 H1^2 J2 + 4 H1 J3 - 4 J4`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport<R: Real> {
    pub h3: Complex<R>,
    pub h3_composed: Complex<R>,
    pub h4: Complex<R>,
    pub h4_composed: Complex<R>,
}

impl<R: Real> CompositionReport<R> {
    pub fn holds(&self) -> bool {
        let ok = |a: &Complex<R>, b: &Complex<R>| {
            if R::EXACT {
                a == b
            } else {
                let scale = a.re.to_f64().hypot(a.im.to_f64()).max(1.0);
                let d = a.clone() - b.clone();
                d.re.to_f64().hypot(d.im.to_f64()) <= 1e-10 * scale
            }
        };
        ok(&self.h3, &self.h3_composed) && ok(&self.h4, &self.h4_composed)
    }
}

fn compose<R: Real>(
    h1: &Complex<R>,
    j2: &Complex<R>,
    j3: &Complex<R>,
    j4: &Complex<R>,
) -> (Complex<R>, Complex<R>) {
    let k = |v: i64| real(R::from_i64(v));
    let h1_2 = h1.clone() * h1.clone();
    let h3 = h1_2.clone() * h1.clone() - k(3) * h1.clone() * j2.clone() + k(3) * j3.clone();
    let h4 = h1_2.clone() * h1_2.clone() + k(2) * j2.clone() * j2.clone()
        - k(4) * h1_2 * j2.clone()
        + k(4) * h1.clone() * j3.clone()
        - k(4) * j4.clone();
    (h3, h4)
}

/// Composition identities at the eigenvalue level (the Newton identities
/// relating power sums to elementary symmetric polynomials).
pub fn composition_identity_check<R: Real>(rapidities: &RapiditySet<R>) -> CompositionReport<R> {
    let ev = |n| charge_eigenvalue(n, rapidities).value;
    let (h3_composed, h4_composed) = compose(
        &ev(ChargeName::H1),
        &ev(ChargeName::J2),
        &ev(ChargeName::J3),
        &ev(ChargeName::J4),
    );
    CompositionReport {
        h3: ev(ChargeName::H3),
        h3_composed,
        h4: ev(ChargeName::H4),
        h4_composed,
    }
}

/// Composition identities as operators on the interior: the free part of
/// `H3` (resp. `H4`) minus the composed free parts, applied to `p`. Both
/// results are empty for every plane-wave sum.
pub fn composition_operator_residual<R: Real>(p: &ExpPoly<R>) -> (ExpPoly<R>, ExpPoly<R>) {
    let op = |n| FreeChargeSpec::new(n);
    let r3 = p.apply_symbol(|d| {
        let (h3, _) = compose(
            &op(ChargeName::H1).symbol(d),
            &op(ChargeName::J2).symbol(d),
            &op(ChargeName::J3).symbol(d),
            &op(ChargeName::J4).symbol(d),
        );
        op(ChargeName::H3).symbol(d) - h3
    });
    let r4 = p.apply_symbol(|d| {
        let (_, h4) = compose(
            &op(ChargeName::H1).symbol(d),
            &op(ChargeName::J2).symbol(d),
            &op(ChargeName::J3).symbol(d),
            &op(ChargeName::J4).symbol(d),
        );
        op(ChargeName::H4).symbol(d) - h4
    });
    (r3, r4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq, q, Rational};
    use crate::symwave::{build_bethe, Coupling};

    fn raps(v: &[i64]) -> RapiditySet<Rational> {
        RapiditySet::new(v.iter().map(|&x| q(x, 1)).collect()).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(charge_eigenvalue(ChargeName::H2, &raps(&[1, 2])).value, cq(q(5, 1), q(0, 1)));
        assert_eq!(charge_eigenvalue(ChargeName::J2, &raps(&[1, 2])).value, cq(q(-2, 1), q(0, 1)));
        assert_eq!(charge_eigenvalue(ChargeName::H4, &raps(&[1, 2, 3])).value, cq(q(98, 1), q(0, 1)));
        assert_eq!(charge_eigenvalue(ChargeName::H1, &raps(&[1, 2])).value, cq(q(0, 1), q(3, 1)));
    }

    #[test]
    fn free_parts_are_diagonal_on_bethe_states() {
        let w = build_bethe(raps(&[1, 2, 3]), Coupling::new(q(1, 1)).unwrap()).unwrap();
        for name in ChargeName::ALL {
            assert!(interior_residual(name, &w).is_empty(), "{name}");
        }
        let j3 = apply_free_part(FreeChargeSpec::new(ChargeName::J3), &w);
        assert_eq!(j3, w.canonical().scale(&cq(q(0, 1), q(-6, 1))));
    }

    #[test]
    fn composition_examples() {
        assert!(composition_identity_check(&raps(&[1, 2])).holds());
        let r = composition_identity_check(&raps(&[1, 2, 3]));
        assert_eq!(r.h4, cq(q(98, 1), q(0, 1)));
        assert!(r.holds());
        assert!(composition_identity_check(&raps(&[7])).holds());
    }

    #[test]
    fn composition_is_an_operator_identity() {
        let w = build_bethe(raps(&[-2, 1, 4, 5]), Coupling::new(q(3, 2)).unwrap()).unwrap();
        let (r3, r4) = composition_operator_residual(w.canonical());
        assert!(r3.is_empty() && r4.is_empty());
    }

    #[test]
    fn names_parse() {
        assert_eq!("j3".parse::<ChargeName>().unwrap(), ChargeName::J3);
        assert!("H5".parse::<ChargeName>().is_err());
    }
}
