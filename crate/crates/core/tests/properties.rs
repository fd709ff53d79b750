use num_complex::Complex;
use num_traits::Zero;
use proptest::prelude::*;

use qnls::aop::{eigenvalue_check, SpectralParameter};
use qnls::charges::boundary_residual_h2;
use qnls::lattice::{rtt_residual, LatticeSpec};
use qnls::scalar::{q, Rational};
use qnls::series::LaurentSeries;
use qnls::solver::{ground_state_quantum_numbers, solve, BoxSpec};
use qnls::symmetric::{elementary_all, power_sum};
use qnls::symwave::{build_bethe, Coupling, RapiditySet};
use qnls::transfer::asymptotic_product_series;

fn distinct(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(-12i64..=12, 1..=max_len).prop_map(|s| s.into_iter().collect())
}

fn rationals(xs: &[i64], den: i64) -> Vec<Rational> {
    xs.iter().map(|&x| q(x, den)).collect()
}

fn cq(re: i64, im: i64) -> Complex<Rational> {
    Complex::new(q(re, 1), q(im, 1))
}

fn series(coeffs: &[(i64, i64)]) -> LaurentSeries<Rational> {
    LaurentSeries::new(coeffs.iter().map(|&(a, b)| cq(a, b)).collect()).unwrap()
}

fn coeff_vec(order: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-5i64..=5, -5i64..=5), order + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_of_log_is_identity(k in distinct(4), c in 1i64..=6) {
        let s = asymptotic_product_series(&rationals(&k, 2), &q(c, 3), 6);
        prop_assert_eq!(s.log().unwrap().exp().unwrap(), s);
    }

    #[test]
    fn product_series_ignores_order(k in distinct(4), c in 1i64..=6, rot in 0usize..4) {
        let k = rationals(&k, 3);
        let mut shuffled = k.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        let c = q(c, 2);
        prop_assert_eq!(asymptotic_product_series(&k, &c, 6), asymptotic_product_series(&shuffled, &c, 6));
    }

    #[test]
    fn low_log_coefficients_see_only_three_power_sums(a in 1i64..=4, b in -6i64..=6, c in 1i64..=5) {
        // Both sets share p1, p2, p3 and differ in p4; affine maps keep that.
        let map = |xs: [i64; 4]| xs.iter().map(|&x| q(a * x + b, 1)).collect::<Vec<_>>();
        let c = q(c, 2);
        let u = asymptotic_product_series(&map([0, 4, 7, 11]), &c, 5).log().unwrap();
        let v = asymptotic_product_series(&map([1, 2, 9, 10]), &c, 5).log().unwrap();
        for m in 0..=4 {
            prop_assert_eq!(u.coeff(m), v.coeff(m));
        }
        prop_assert_ne!(u.coeff(5), v.coeff(5));
    }

    #[test]
    fn newton_identities(xs in prop::collection::vec(-9i64..=9, 1..=6)) {
        let n = xs.len();
        let x: Vec<i128> = xs.iter().map(|&v| v as i128).collect();
        let e = elementary_all(&x, n);
        for k in 1..=n {
            let rhs: i128 = (1..=k)
                .map(|i| if i % 2 == 1 { 1 } else { -1 } * e[k - i] * power_sum(&x, i as u32))
                .sum();
            prop_assert_eq!(k as i128 * e[k], rhs);
        }
    }

    #[test]
    fn series_product_is_commutative_and_associative(
        a in coeff_vec(5), b in coeff_vec(5), c in coeff_vec(5)
    ) {
        let (a, b, c) = (series(&a), series(&b), series(&c));
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn region_forms_agree_with_the_bethe_sum(k in distinct(3), c in 1i64..=8, perm in 0usize..6) {
        let n = k.len();
        let w = build_bethe(RapiditySet::new(rationals(&k, 2)).unwrap(), Coupling::new(q(c, 3)).unwrap()).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left(perm % n);
        if perm >= 3 {
            order.reverse();
        }
        prop_assert!(w.region_form(&order).sub(&w.formula_form(&order)).is_empty());
    }

    #[test]
    fn bethe_states_meet_the_boundary_condition(k in distinct(3), c in 1i64..=8) {
        let c = q(c, 4);
        let w = build_bethe(RapiditySet::new(rationals(&k, 3)).unwrap(), Coupling::new(c.clone()).unwrap()).unwrap();
        for j in 0..k.len().saturating_sub(1) {
            prop_assert!(boundary_residual_h2(w.canonical(), &c, j).is_empty());
        }
    }

    #[test]
    fn a_operator_eigen_relation(k in distinct(2), c in 1i64..=5, re in -4i64..=4, im in 1i64..=4) {
        let w = build_bethe(RapiditySet::new(rationals(&k, 2)).unwrap(), Coupling::new(q(c, 2)).unwrap()).unwrap();
        let lambda = SpectralParameter::new(Complex::new(q(re, 3), -q(im, 2))).unwrap();
        prop_assert!(eigenvalue_check(&lambda, &w).unwrap().exact_zero());
    }

    #[test]
    fn solver_residual_is_small(n in 1usize..=4, c in 0.05f64..50.0, length in 0.5f64..20.0, shift in -2i64..=2) {
        let spec = BoxSpec::new(length, c, n).unwrap();
        let sol = solve(&spec, &ground_state_quantum_numbers(n).shifted(shift)).unwrap();
        prop_assert!(sol.residual_product < 1e-10, "{}", sol.residual_product);
        prop_assert!(sol.k().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn symmetric_labels_give_balanced_rapidities(n in 1usize..=5, c in 0.1f64..20.0, length in 0.5f64..10.0) {
        let sol = solve(&BoxSpec::new(length, c, n).unwrap(), &ground_state_quantum_numbers(n)).unwrap();
        let exact: Vec<Rational> = sol.k().iter().map(|&x| Rational::from_float(x).unwrap()).collect();
        prop_assert!(power_sum(&exact, 1).is_zero());
    }

    #[test]
    fn rtt_relation_holds(lambda in -3.0f64..3.0, gap in 0.1f64..3.0, c in 0.2f64..4.0) {
        let spec = LatticeSpec::new(1, 4, 0.3, c).unwrap();
        let r = rtt_residual(lambda, lambda + gap, &spec).unwrap();
        prop_assert!(r.r_left < 1e-12, "{}", r.r_left);
    }
}
