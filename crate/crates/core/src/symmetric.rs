//! Power sums and elementary symmetric polynomials over any commutative ring.

use num_traits::Num;

/// `p_n = sum_j x_j^n` (`p_0` is the number of variables).
pub fn power_sum<T: Clone + Num>(xs: &[T], n: u32) -> T {
    xs.iter().fold(T::zero(), |acc, x| {
        let mut term = T::one();
        for _ in 0..n {
            term = term * x.clone();
        }
        acc + term
    })
}

/// `e_0 ..= e_n` of the given values, by the product expansion of
/// `prod_j (1 + x_j t)`.
pub fn elementary_all<T: Clone + Num>(xs: &[T], n: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n + 1];
    e[0] = T::one();
    for x in xs {
        for k in (1..=n).rev() {
            e[k] = e[k].clone() + e[k - 1].clone() * x.clone();
        }
    }
    e
}

pub fn elementary<T: Clone + Num>(xs: &[T], n: usize) -> T {
    elementary_all(xs, n).pop().expect("non-empty")
}
