use num_complex::Complex;

use crate::scalar::{real, Real};
use crate::symwave::ExpPoly;

/// `c p + (d_j - d_{j+1}) p` on the region where it is defined (0-based `j`).
pub fn bracket<R: Real>(p: &ExpPoly<R>, c: &R, j: usize) -> ExpPoly<R> {
    let cc = real(c.clone());
    p.apply_symbol(|d| cc.clone() + d[j].clone() - d[j + 1].clone())
}

/// The Hamiltonian's boundary condition at `x_{j+1} = x_j + 0` (0-based `j`):
/// the restriction of `c p + (d_j - d_{j+1}) p`. Empty for Bethe states.
pub fn boundary_residual_h2<R: Real>(p: &ExpPoly<R>, c: &R, j: usize) -> ExpPoly<R> {
    bracket(p, c, j).restrict_to_boundary(j)
}

/// The `J3` boundary condition: the bracket differentiated along every
/// coordinate other than `x_j, x_{j+1}`, then restricted.
pub fn boundary_residual_j3<R: Real>(p: &ExpPoly<R>, c: &R, j: usize) -> ExpPoly<R> {
    let cc = real(c.clone());
    p.apply_symbol(|d| {
        let orth = d
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != j && l != j + 1)
            .fold(Complex::new(R::zero(), R::zero()), |acc, (_, v)| acc + v.clone());
        orth * (cc.clone() + d[j].clone() - d[j + 1].clone())
    })
    .restrict_to_boundary(j)
}

/// The `J4` boundary condition, split into its smooth part and its
/// delta-supported layers.
#[derive(Debug, Clone, PartialEq)]
pub struct J4Residual<R: Real> {
    /// `sum_{l<m} d_l d_m` over the coordinates other than `x_j, x_{j+1}`,
    /// applied to the restricted bracket.
    pub smooth: ExpPoly<R>,
    /// `c` times the restricted bracket on each hyperplane where two of the
    /// remaining coordinates meet, keyed by the 0-based coordinate pair.
    pub delta_layers: Vec<((usize, usize), ExpPoly<R>)>,
}

impl<R: Real> J4Residual<R> {
    pub fn is_empty(&self) -> bool {
        self.smooth.is_empty() && self.delta_layers.iter().all(|(_, p)| p.is_empty())
    }
}

/// `sum_{l>m} (d_l d_m + c delta(x_l - x_m)) [c p + (d_j - d_{j+1}) p]` at
/// `x_{j+1} = x_j + 0`, with `l, m` ranging over the other coordinates.
///
/// Inside the ordered region two coordinates can only meet generically when
/// they are neighbours, so there is one delta layer per adjacent pair of the
/// remaining coordinates; each is evaluated by a second restriction.
pub fn boundary_residual_j4<R: Real>(p: &ExpPoly<R>, c: &R, j: usize) -> J4Residual<R> {
    let b = bracket(p, c, j).restrict_to_boundary(j);
    let n = p.num_vars();
    // Positions of the remaining coordinates after the merge.
    let others: Vec<usize> = (0..n)
        .filter(|&l| l != j && l != j + 1)
        .map(|l| if l > j + 1 { l - 1 } else { l })
        .collect();
    let smooth = b.apply_symbol(|d| {
        let vals: Vec<Complex<R>> = others.iter().map(|&q| d[q].clone()).collect();
        crate::symmetric::elementary(&vals, 2)
    });
    let cc = real(c.clone());
    let mut delta_layers = Vec::new();
    for w in 0..others.len().saturating_sub(1) {
        let (a, bq) = (others[w], others[w + 1]);
        if bq != a + 1 {
            // The merged pair sits between them; they are not neighbours.
            continue;
        }
        let orig = |q: usize| if q > j { q + 1 } else { q };
        delta_layers.push(((orig(a), orig(bq)), b.restrict_pair(a, bq).scale(&cc)));
    }
    J4Residual {
        smooth,
        delta_layers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};
    use crate::symwave::{build_bethe, Coupling, RapiditySet, Term};

    fn chi(v: &[i64], c: i64) -> ExpPoly<Rational> {
        let r = RapiditySet::new(v.iter().map(|&x| q(x, 1)).collect()).unwrap();
        build_bethe(r, Coupling::new(q(c, 1)).unwrap()).unwrap().canonical().clone()
    }

    fn plane_wave(v: &[i64]) -> ExpPoly<Rational> {
        ExpPoly::from_terms(
            v.len(),
            vec![Term::real(real(q(1, 1)), v.iter().map(|&x| q(x, 1)).collect())],
        )
    }

    #[test]
    fn hamiltonian_condition() {
        assert!(boundary_residual_h2(&chi(&[1, 2], 3), &q(3, 1), 0).is_empty());
        let p = chi(&[1, 2, 4], 1);
        for j in 0..2 {
            assert!(boundary_residual_h2(&p, &q(1, 1), j).is_empty());
        }
        for c in [1, 2, 7, 100] {
            assert!(boundary_residual_h2(&chi(&[-3, 5], c), &q(c, 1), 0).is_empty());
        }
    }

    #[test]
    fn j3_condition_and_control() {
        assert!(boundary_residual_j3(&chi(&[1, 2, 3], 1), &q(1, 1), 0).is_empty());
        assert!(boundary_residual_j3(&chi(&[1, 2, 3, 5], 2), &q(2, 1), 1).is_empty());
        assert!(!boundary_residual_j3(&plane_wave(&[1, 2, 3]), &q(1, 1), 0).is_empty());
        assert!(!boundary_residual_h2(&plane_wave(&[1, 2, 3]), &q(1, 1), 1).is_empty());
    }

    #[test]
    fn j4_condition_and_control() {
        for (v, c) in [([1, 2, 3, 4], 1), ([-1, 0, 2, 5], 3)] {
            let p = chi(&v, c);
            for j in 0..3 {
                assert!(boundary_residual_j4(&p, &q(c, 1), j).is_empty());
            }
        }
        let r = boundary_residual_j4(&plane_wave(&[1, 2, 3, 4]), &q(1, 1), 0);
        assert!(!r.smooth.is_empty());
        assert_eq!(r.delta_layers.len(), 1);
        assert_eq!(r.delta_layers[0].0, (2, 3));
        assert!(!r.is_empty());
    }
}
