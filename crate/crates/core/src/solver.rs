//! Finite-box Bethe equations for the repulsive gas.
//!
//! The solver works on the logarithmic form
//! `F_l = k_l L + sum_{j != l} 2 atan((k_l - k_j) / c) - 2 pi I_l = 0`
//! and reports the product form `e^{i k_l L} = prod_{j != l} (k_l - k_j + ic) / (k_l - k_j - ic)`
//! as an independent residual.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::symwave::{Coupling, RapiditySet};

pub const MAX_ITERATIONS: usize = 200;
pub const MAX_HALVINGS: u32 = 8;
/// Acceptance threshold for the product-form residual.
pub const PRODUCT_RESIDUAL_TOL: f64 = 1e-10;

/// Box length, coupling and particle number.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub length: f64,
    pub coupling: Coupling<f64>,
    pub particles: usize,
}

impl BoxSpec {
    pub fn new(length: f64, c: f64, particles: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::DomainError(format!("box length must be positive, got {length}")));
        }
        Ok(Self {
            length,
            coupling: Coupling::new(c)?,
            particles,
        })
    }

    pub fn c(&self) -> f64 {
        *self.coupling.value()
    }
}

/// Branch labels of the logarithmic Bethe equations, stored doubled so that
/// half-odd values are exact: integers for odd `N`, half-odd integers for
/// even `N`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantumNumbers {
    doubled: Vec<i64>,
}

impl QuantumNumbers {
    pub fn from_doubled(doubled: Vec<i64>) -> Result<Self> {
        let n = doubled.len();
        let parity = if n % 2 == 1 { 0 } else { 1 };
        if let Some(bad) = doubled.iter().find(|&&d| d.rem_euclid(2) != parity) {
            return Err(Error::InvalidQuantumNumbers(format!(
                "{} is not {} (N = {n})",
                *bad as f64 / 2.0,
                if parity == 0 { "an integer" } else { "a half-odd integer" }
            )));
        }
        if doubled.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidQuantumNumbers(
                "quantum numbers must be strictly increasing".into(),
            ));
        }
        Ok(Self { doubled })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        let doubled = values
            .iter()
            .map(|&v| {
                let d = (2.0 * v).round();
                if (2.0 * v - d).abs() > 1e-9 {
                    Err(Error::InvalidQuantumNumbers(format!("{v} is not a multiple of 1/2")))
                } else {
                    Ok(d as i64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_doubled(doubled)
    }

    pub fn len(&self) -> usize {
        self.doubled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doubled.is_empty()
    }

    pub fn doubled(&self) -> &[i64] {
        &self.doubled
    }

    pub fn values(&self) -> Vec<f64> {
        self.doubled.iter().map(|&d| d as f64 / 2.0).collect()
    }

    /// `I -> -I` (reversed to stay increasing).
    pub fn negated(&self) -> Self {
        Self {
            doubled: self.doubled.iter().rev().map(|d| -d).collect(),
        }
    }

    /// `I -> I + m`.
    pub fn shifted(&self, m: i64) -> Self {
        Self {
            doubled: self.doubled.iter().map(|d| d + 2 * m).collect(),
        }
    }
}

impl fmt::Display for QuantumNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .doubled
            .iter()
            .map(|&d| if d % 2 == 0 { format!("{}", d / 2) } else { format!("{d}/2") })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for QuantumNumbers {
    type Err = Error;

    /// Accepts comma- or whitespace-separated values such as `-1/2,1/2` or
    /// `-1 0 1`.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let bad = || Error::InvalidQuantumNumbers(format!("cannot parse '{t}'"));
                match t.split_once('/') {
                    Some((num, den)) => {
                        let num: f64 = num.trim().parse().map_err(|_| bad())?;
                        let den: f64 = den.trim().parse().map_err(|_| bad())?;
                        if den == 0.0 {
                            return Err(bad());
                        }
                        Ok(num / den)
                    }
                    None => t.parse::<f64>().map_err(|_| bad()),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(&values)
    }
}

/// `I = (-(N-1)/2, ..., (N-1)/2)`.
pub fn ground_state_quantum_numbers(n: usize) -> QuantumNumbers {
    let n = n as i64;
    QuantumNumbers {
        doubled: (0..n).map(|l| 2 * l - (n - 1)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RapiditySolution {
    pub rapidities: RapiditySet<f64>,
    pub quantum_numbers: QuantumNumbers,
    pub residual_log: f64,
    pub residual_product: f64,
    pub iterations: usize,
    /// Smallest eigenvalue of the (symmetric) Jacobian at the solution.
    pub jacobian_min_eigenvalue: f64,
}

impl RapiditySolution {
    pub fn k(&self) -> &[f64] {
        self.rapidities.values()
    }

    pub fn to_json(&self, spec: &BoxSpec) -> Value {
        json!({
            "n": spec.particles,
            "box": spec.length,
            "c": spec.c(),
            "quantum_numbers": self.quantum_numbers.to_string(),
            "quantum_number_convention": "integers for odd N, half-odd integers for even N",
            "rapidities": self.k(),
            "residual_log": self.residual_log,
            "residual_product": self.residual_product,
            "iterations": self.iterations,
            "jacobian_min_eigenvalue": self.jacobian_min_eigenvalue,
        })
    }
}

fn log_form(k: &[f64], spec: &BoxSpec, targets: &[f64]) -> DVector<f64> {
    let c = spec.c();
    DVector::from_fn(k.len(), |l, _| {
        let phase: f64 = k
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != l)
            .map(|(_, kj)| 2.0 * ((k[l] - kj) / c).atan())
            .sum();
        k[l] * spec.length + phase - targets[l]
    })
}

fn jacobian(k: &[f64], spec: &BoxSpec) -> DMatrix<f64> {
    let c = spec.c();
    let n = k.len();
    let mut m = DMatrix::zeros(n, n);
    for l in 0..n {
        m[(l, l)] = spec.length;
        for j in 0..n {
            if j == l {
                continue;
            }
            let d = k[l] - k[j];
            let g = 2.0 * c / (c * c + d * d);
            m[(l, l)] += g;
            m[(l, j)] = -g;
        }
    }
    m
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max_l |e^{i k_l L} - prod_{j != l} (k_l - k_j + ic) / (k_l - k_j - ic)|`.
pub fn residual_product_form(k: &[f64], spec: &BoxSpec) -> f64 {
    let c = spec.c();
    (0..k.len())
        .map(|l| {
            let lhs = Complex64::new(0.0, k[l] * spec.length).exp();
            let rhs: Complex64 = (0..k.len())
                .filter(|&j| j != l)
                .map(|j| {
                    let d = k[l] - k[j];
                    Complex64::new(d, c) / Complex64::new(d, -c)
                })
                .product();
            (lhs - rhs).norm()
        })
        .fold(0.0, f64::max)
}

/// Damped Newton iteration on the logarithmic equations, started from the
/// free-fermion momenta `2 pi I / L`.
pub fn solve(spec: &BoxSpec, qn: &QuantumNumbers) -> Result<RapiditySolution> {
    if qn.len() != spec.particles {
        return Err(Error::InvalidQuantumNumbers(format!(
            "{} quantum numbers for N = {}",
            qn.len(),
            spec.particles
        )));
    }
    let targets: Vec<f64> = qn.doubled().iter().map(|&d| PI * d as f64).collect();
    let mut k: Vec<f64> = targets.iter().map(|t| t / spec.length).collect();
    let scale = targets.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    let tol = 4.0 * f64::EPSILON * scale * (spec.particles.max(1) as f64);
    let mut f = log_form(&k, spec, &targets);
    let mut iterations = 0;
    while max_abs(&f) > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::SolverDiverged {
                iterations,
                residual: max_abs(&f),
            });
        }
        iterations += 1;
        let step = jacobian(&k, spec)
            .lu()
            .solve(&f)
            .ok_or(Error::SolverDiverged {
                iterations,
                residual: max_abs(&f),
            })?;
        let current = max_abs(&f);
        let mut t = 1.0;
        let mut trial: Vec<f64>;
        let mut f_trial;
        let mut halvings = 0;
        loop {
            trial = k.iter().zip(step.iter()).map(|(x, s)| x - t * s).collect();
            f_trial = log_form(&trial, spec, &targets);
            if max_abs(&f_trial) < current || halvings == MAX_HALVINGS {
                break;
            }
            t *= 0.5;
            halvings += 1;
        }
        if max_abs(&f_trial) >= current {
            // No descent even after damping: the residual sits at rounding
            // level and the product-form check below decides.
            break;
        }
        k = trial;
        f = f_trial;
    }
    if *qn == qn.negated() {
        // Symmetric labels give k_l = -k_{N-1-l}; impose it exactly so that
        // odd power sums vanish in exact arithmetic.
        let n = k.len();
        k = (0..n).map(|l| 0.5 * (k[l] - k[n - 1 - l])).collect();
        f = log_form(&k, spec, &targets);
    }
    let residual_log = max_abs(&f);
    let residual_product = residual_product_form(&k, spec);
    if residual_product >= PRODUCT_RESIDUAL_TOL {
        return Err(Error::SolverDiverged {
            iterations,
            residual: residual_product,
        });
    }
    let jac = jacobian(&k, spec);
    let jacobian_min_eigenvalue = if k.is_empty() {
        f64::INFINITY
    } else {
        jac.clone().symmetric_eigenvalues().min()
    };
    if jac.cholesky().is_none() && !k.is_empty() {
        return Err(Error::DomainError("Jacobian is not positive definite".into()));
    }
    Ok(RapiditySolution {
        rapidities: RapiditySet::new(k)?,
        quantum_numbers: qn.clone(),
        residual_log,
        residual_product,
        iterations,
        jacobian_min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_particle_is_free() {
        let spec = BoxSpec::new(3.0, 1.0, 1).unwrap();
        let sol = solve(&spec, &QuantumNumbers::from_doubled(vec![4]).unwrap()).unwrap();
        assert!((sol.k()[0] - 2.0 * PI * 2.0 / 3.0).abs() < 1e-15);
        assert!(sol.residual_product < 1e-14);
    }

    #[test]
    fn ground_states() {
        assert_eq!(ground_state_quantum_numbers(3).values(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(ground_state_quantum_numbers(2).values(), vec![-0.5, 0.5]);
        assert_eq!(ground_state_quantum_numbers(4).values(), vec![-1.5, -0.5, 0.5, 1.5]);
    }

    #[test]
    fn tonks_limit() {
        let spec = BoxSpec::new(2.0 * PI, 1e6, 2).unwrap();
        let sol = solve(&spec, &ground_state_quantum_numbers(2)).unwrap();
        assert!((sol.k()[0] + 0.5).abs() < 1e-5 && (sol.k()[1] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn weak_coupling_converges() {
        for c in [1e-3, 1e-2, 0.1] {
            let spec = BoxSpec::new(2.0 * PI, c, 2).unwrap();
            let sol = solve(&spec, &ground_state_quantum_numbers(2)).unwrap();
            assert!(sol.residual_product < 1e-10, "c = {c}");
            // Small-c asymptotics: k = +-sqrt(c / 2 pi).
            let expected = 2.0 * (c / (2.0 * PI)).sqrt();
            assert!(((sol.k()[1] - sol.k()[0]) / expected - 1.0).abs() < 0.2, "c = {c}");
        }
    }

    #[test]
    fn perturbed_root_is_detected() {
        let spec = BoxSpec::new(1.0, 1.0, 3).unwrap();
        let sol = solve(&spec, &ground_state_quantum_numbers(3)).unwrap();
        let mut k = sol.k().to_vec();
        k[0] += 1e-3;
        assert!(residual_product_form(&k, &spec) > 1e-4);
    }

    #[test]
    fn quantum_number_validation() {
        assert!(QuantumNumbers::from_values(&[0.0, 1.0]).is_err());
        assert!(QuantumNumbers::from_values(&[0.5, -0.5]).is_err());
        assert!(QuantumNumbers::from_values(&[0.3]).is_err());
        let q: QuantumNumbers = "-3/2, 1/2".parse().unwrap();
        assert_eq!(q.doubled(), &[-3, 1]);
        assert_eq!(q.to_string(), "-3/2,1/2");
        assert!(BoxSpec::new(1.0, -1.0, 2).is_err());
        assert!(BoxSpec::new(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn shift_and_reflection() {
        let spec = BoxSpec::new(1.7, 2.3, 3).unwrap();
        let qn: QuantumNumbers = "-2 0 3".parse().unwrap();
        let a = solve(&spec, &qn).unwrap();
        let b = solve(&spec, &qn.shifted(2)).unwrap();
        let r = solve(&spec, &qn.negated()).unwrap();
        for l in 0..3 {
            assert!((b.k()[l] - a.k()[l] - 4.0 * PI / 1.7).abs() < 1e-12);
            assert!((r.k()[2 - l] + a.k()[l]).abs() < 1e-12);
        }
        assert!(a.jacobian_min_eigenvalue > 0.0);
    }
}
