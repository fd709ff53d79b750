use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_with_breaks, QuadOptions};
use crate::symwave::BetheWavefunction;

/// Gaussian tails beyond this many widths are below `e^{-72}`.
const GAUSS_CUTOFF: f64 = 6.0;

/// Width grid `2^{-m}`, `m = 2..=12`.
pub fn default_widths() -> Vec<f64> {
    (2..=12).map(|m| 2f64.powi(-m)).collect()
}

/// Quadrature setup for the regularized `G4 - H4` expectation value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G4ScanConfig {
    /// Length of the box `[0, L]` covered by each coordinate along the
    /// coincidence planes; relative coordinates run over the real line.
    pub box_length: f64,
    pub rel_tol: f64,
}

impl Default for G4ScanConfig {
    fn default() -> Self {
        Self {
            box_length: 1.0,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct G4ScanPoint {
    pub epsilon: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct G4Scan {
    pub points: Vec<G4ScanPoint>,
    /// Least-squares slope of `log defect` against `log epsilon`.
    pub slope: f64,
    /// Least-squares fit `defect ~ a / epsilon + b + d epsilon`.
    pub a: f64,
    pub b: f64,
    pub d: f64,
    /// `defect - a / epsilon` at every width.
    pub remainder: Vec<f64>,
}

impl G4Scan {
    pub fn max_remainder(&self) -> f64 {
        self.remainder.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// The remainder does not grow as the width shrinks: its largest
    /// magnitude is at most twice the largest magnitude seen on the three
    /// widest Gaussians.
    pub fn remainder_bounded(&self) -> bool {
        let mut by_width: Vec<(f64, f64)> =
            self.points.iter().map(|p| p.epsilon).zip(self.remainder.iter().map(|r| r.abs())).collect();
        by_width.sort_by(|x, y| y.0.total_cmp(&x.0));
        let wide = by_width.iter().take(3).fold(0.0f64, |m, &(_, r)| m.max(r));
        self.max_remainder().is_finite() && self.max_remainder() <= 2.0 * wide
    }
}

fn sq_norm(z: Complex64) -> f64 {
    z.norm_sqr()
}

/// `(1 / eps pi) int_0^L dX int dv e^{-2 v^2} |chi(X, X + eps v)|^2`, the
/// expectation of `delta_eps(x_1 - x_2)^2` for two particles.
fn pair_term_2(w: &BetheWavefunction<f64>, eps: f64, cfg: &G4ScanConfig) -> Result<f64> {
    let inner = QuadOptions::with_rel_tol(cfg.rel_tol * 1e-2);
    let outer = QuadOptions::with_rel_tol(cfg.rel_tol);
    let v = integrate(
        |x| {
            integrate_with_breaks(
                |v| Ok(Complex64::new((-2.0 * v * v).exp() * sq_norm(w.evaluate(&[x, x + eps * v])), 0.0)),
                -GAUSS_CUTOFF,
                GAUSS_CUTOFF,
                &[0.0],
                inner,
            )
        },
        0.0,
        cfg.box_length,
        outer,
    )?;
    Ok(v.re / (eps * PI))
}

/// Three-particle analogue of [`pair_term_2`] for the pair `(x_1, x_2)`;
/// the third coordinate runs over the box.
fn pair_term_3(w: &BetheWavefunction<f64>, eps: f64, cfg: &G4ScanConfig) -> Result<f64> {
    let l = cfg.box_length;
    let tight = QuadOptions::with_rel_tol(cfg.rel_tol * 1e-3);
    let mid = QuadOptions::with_rel_tol(cfg.rel_tol * 1e-2);
    let outer = QuadOptions::with_rel_tol(cfg.rel_tol);
    let v = integrate(
        |x| {
            integrate_with_breaks(
                |v| {
                    let x2 = x + eps * v;
                    let weight = (-2.0 * v * v).exp();
                    integrate_with_breaks(
                        |y| Ok(Complex64::new(weight * sq_norm(w.evaluate(&[x, x2, y])), 0.0)),
                        0.0,
                        l,
                        &[x, x2],
                        tight,
                    )
                },
                -GAUSS_CUTOFF,
                GAUSS_CUTOFF,
                &[0.0],
                mid,
            )
        },
        0.0,
        l,
        outer,
    )?;
    Ok(v.re / (eps * PI))
}

/// Expectation of `delta_eps(x_3 - x_2) delta_eps(x_2 - x_1)`; finite as
/// `eps -> 0`.
fn triple_term_3(w: &BetheWavefunction<f64>, eps: f64, cfg: &G4ScanConfig) -> Result<f64> {
    let tight = QuadOptions::with_rel_tol(cfg.rel_tol * 1e-3);
    let mid = QuadOptions::with_rel_tol(cfg.rel_tol * 1e-2);
    let outer = QuadOptions::with_rel_tol(cfg.rel_tol);
    let v = integrate(
        |x| {
            integrate_with_breaks(
                |u| {
                    integrate_with_breaks(
                        |v| {
                            let weight = (-u * u - v * v).exp() / PI;
                            let p = [x - eps * v, x, x + eps * u];
                            Ok(Complex64::new(weight * sq_norm(w.evaluate(&p)), 0.0))
                        },
                        -GAUSS_CUTOFF,
                        GAUSS_CUTOFF,
                        &[0.0],
                        tight,
                    )
                },
                -GAUSS_CUTOFF,
                GAUSS_CUTOFF,
                &[0.0],
                mid,
            )
        },
        0.0,
        cfg.box_length,
        outer,
    )?;
    Ok(v.re)
}

/// `|<w| G4 - H4 |w>|` with every delta function replaced by the Gaussian
/// `delta_eps(u) = exp(-u^2 / eps^2) / (eps sqrt(pi))`.
///
/// For two particles the difference is `-2 c^2 delta^2(x_1 - x_2)`; for three
/// it is `-2 c^2 sum_{pairs} delta^2 + 6 c^2 delta(x_3 - x_2) delta(x_2 - x_1)`.
pub fn g4_defect(w: &BetheWavefunction<f64>, eps: f64, cfg: &G4ScanConfig) -> Result<f64> {
    let c = *w.coupling().value();
    let c2 = c * c;
    match w.particles() {
        2 => Ok((2.0 * c2 * pair_term_2(w, eps, cfg)?).abs()),
        3 => {
            // |chi|^2 is symmetric and the domain treats every pair alike,
            // so the three pair terms coincide.
            let pairs = 3.0 * pair_term_3(w, eps, cfg)?;
            let triple = triple_term_3(w, eps, cfg)?;
            Ok((-2.0 * c2 * pairs + 6.0 * c2 * triple).abs())
        }
        n => Err(Error::SizeLimit {
            what: "particle number for the G4 scan (supported: 2, 3)",
            value: n,
            max: 3,
        }),
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Scans the regularized defect over the given widths and fits its
/// divergence.
pub fn g4_defect_scan(
    w: &BetheWavefunction<f64>,
    epsilons: &[f64],
    cfg: &G4ScanConfig,
) -> Result<G4Scan> {
    if epsilons.len() < 3 {
        return Err(Error::DomainError("the scan needs at least three widths".into()));
    }
    let points = epsilons
        .iter()
        .map(|&epsilon| {
            if !(epsilon > 0.0) {
                return Err(Error::DomainError(format!("width must be positive, got {epsilon}")));
            }
            Ok(G4ScanPoint {
                epsilon,
                defect: g4_defect(w, epsilon, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<f64> = points.iter().map(|p| p.epsilon.ln()).collect();
    let logd: Vec<f64> = points.iter().map(|p| p.defect.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, _) = least_squares(&logs, &logd);
    let design = DMatrix::from_fn(points.len(), 3, |r, k| {
        let e = points[r].epsilon;
        [1.0 / e, 1.0, e][k]
    });
    let rhs = DVector::from_iterator(points.len(), points.iter().map(|p| p.defect));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::DomainError(format!("defect fit failed: {e}")))?;
    let (a, b, d) = (coef[0], coef[1], coef[2]);
    let remainder = points.iter().map(|p| p.defect - a / p.epsilon).collect();
    Ok(G4Scan {
        points,
        slope,
        a,
        b,
        d,
        remainder,
    })
}

fn check_box(l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(format!("box length must be positive, got {l}")))
    }
}

/// `int_{[0,L]^N} conj(f) sum_{j<k} delta(x_j - x_k) g`, computed by
/// restricting to each coincidence plane and integrating over the box.
pub fn pair_delta_overlap(
    f: &BetheWavefunction<f64>,
    g: &BetheWavefunction<f64>,
    box_length: f64,
) -> Result<Complex64> {
    check_box(box_length)?;
    let n = f.particles();
    if g.particles() != n {
        return Err(Error::DomainError(format!(
            "states live in different sectors ({n} and {})",
            g.particles()
        )));
    }
    let opts = QuadOptions::with_rel_tol(1e-10);
    let inner = QuadOptions::with_rel_tol(1e-12);
    let l = box_length;
    let prod = |p: &[f64]| f.evaluate(p).conj() * g.evaluate(p);
    match n {
        0 | 1 => Ok(Complex64::new(0.0, 0.0)),
        2 => integrate(|x| Ok(prod(&[x, x])), 0.0, l, opts),
        3 => {
            let mut total = Complex64::new(0.0, 0.0);
            for (j, k) in [(0, 1), (0, 2), (1, 2)] {
                let m = 3 - j - k;
                total += integrate(
                    |x| {
                        integrate_with_breaks(
                            |y| {
                                let mut p = [0.0; 3];
                                p[j] = x;
                                p[k] = x;
                                p[m] = y;
                                Ok(prod(&p))
                            },
                            0.0,
                            l,
                            &[x],
                            inner,
                        )
                    },
                    0.0,
                    l,
                    opts,
                )?;
            }
            Ok(total)
        }
        n => Err(Error::SizeLimit {
            what: "particle number for the overlap quadrature",
            value: n,
            max: 3,
        }),
    }
}

/// `int_{[0,L]^N} |f|^2`.
pub fn box_norm_sq(f: &BetheWavefunction<f64>, box_length: f64) -> Result<f64> {
    check_box(box_length)?;
    let l = box_length;
    let opts = QuadOptions::with_rel_tol(1e-10);
    let mid = QuadOptions::with_rel_tol(1e-11);
    let inner = QuadOptions::with_rel_tol(1e-12);
    let sq = |p: &[f64]| Ok(Complex64::new(sq_norm(f.evaluate(p)), 0.0));
    let v = match f.particles() {
        0 => Complex64::new(1.0, 0.0),
        1 => integrate(|x| sq(&[x]), 0.0, l, opts)?,
        2 => integrate(
            |x| integrate_with_breaks(|y| sq(&[x, y]), 0.0, l, &[x], inner),
            0.0,
            l,
            opts,
        )?,
        3 => integrate(
            |x| {
                integrate_with_breaks(
                    |y| integrate_with_breaks(|z| sq(&[x, y, z]), 0.0, l, &[x, y], inner),
                    0.0,
                    l,
                    &[x],
                    mid,
                )
            },
            0.0,
            l,
            opts,
        )?,
        n => {
            return Err(Error::SizeLimit {
                what: "particle number for the norm quadrature",
                value: n,
                max: 3,
            })
        }
    };
    Ok(v.re)
}

/// [`pair_delta_overlap`] divided by the box norms of both states.
pub fn pair_delta_overlap_normalized(
    f: &BetheWavefunction<f64>,
    g: &BetheWavefunction<f64>,
    box_length: f64,
) -> Result<Complex64> {
    let raw = pair_delta_overlap(f, g, box_length)?;
    let norm = (box_norm_sq(f, box_length)? * box_norm_sq(g, box_length)?).sqrt();
    Ok(raw / norm)
}
