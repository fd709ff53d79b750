//! Lattice NLS on a truncated Fock space: L-operators, monodromy, R-matrix,
//! and the integrability checks built from them.
//!
//! States are sparse maps from occupation configurations (site 1 first) to
//! amplitudes. The monodromy `T = L(M) ... L(1)` is applied by propagating a
//! two-component auxiliary vector through the sites, so no operator on the
//! full `d^M` space is ever formed.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::symwave::Coupling;

/// Largest sector (or restricted input space) handled densely.
pub const MAX_SECTOR_DIM: usize = 10_000;
/// Largest per-site cutoff.
pub const MAX_CUTOFF: usize = 64;

pub type Config = Vec<u8>;
pub type State = BTreeMap<Config, Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub sites: usize,
    /// Occupations `0 ..= cutoff - 1` are kept at every site.
    pub cutoff: usize,
    pub step: f64,
    pub coupling: Coupling<f64>,
}

impl LatticeSpec {
    pub fn new(sites: usize, cutoff: usize, step: f64, c: f64) -> Result<Self> {
        if sites == 0 {
            return Err(Error::DomainError("a lattice needs at least one site".into()));
        }
        if cutoff == 0 {
            return Err(Error::DomainError("the cutoff must keep the vacuum".into()));
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::SizeLimit {
                what: "per-site cutoff",
                value: cutoff,
                max: MAX_CUTOFF,
            });
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::DomainError(format!("lattice step must be positive, got {step}")));
        }
        Ok(Self {
            sites,
            cutoff,
            step,
            coupling: Coupling::new(c)?,
        })
    }

    pub fn c(&self) -> f64 {
        *self.coupling.value()
    }

    pub fn length(&self) -> f64 {
        self.sites as f64 * self.step
    }

    pub fn to_json(&self) -> Value {
        json!({"sites": self.sites, "cutoff": self.cutoff, "step": self.step, "c": self.c()})
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteRole {
    Psi,
    PsiDag,
    Rho,
    Number,
    Identity,
}

/// A `d x d` operator on one site, in the occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteOperator {
    pub role: SiteRole,
    pub matrix: DMatrix<Complex64>,
}

impl SiteOperator {
    /// `psi |n> = sqrt(n / step) |n - 1>`, `rho = sqrt(1 + (c step^2 / 4) psi^dag psi)`.
    pub fn new(role: SiteRole, spec: &LatticeSpec) -> Self {
        let d = spec.cutoff;
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for n in 0..d {
            match role {
                SiteRole::Psi if n >= 1 => m[(n - 1, n)] = (n as f64 / spec.step).sqrt().into(),
                SiteRole::PsiDag if n + 1 < d => {
                    m[(n + 1, n)] = ((n + 1) as f64 / spec.step).sqrt().into()
                }
                SiteRole::Rho => m[(n, n)] = rho(n, spec, RhoKind::Exact).into(),
                SiteRole::Number => m[(n, n)] = (n as f64).into(),
                SiteRole::Identity => m[(n, n)] = 1.0.into(),
                _ => {}
            }
        }
        Self { role, matrix: m }
    }
}

/// How `rho` is realised on `|n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoKind {
    /// `sqrt(1 + c step n / 4)`.
    Exact,
    /// The classical series of `sqrt(1 + (c step^2/4) |psi|^2)` with each
    /// `|psi|^{2k}` replaced by `psi^dag^k psi^k`, which gives falling
    /// factorials of `n`.
    NormalOrdered,
}

fn rho(n: usize, spec: &LatticeSpec, kind: RhoKind) -> f64 {
    let x = spec.c() * spec.step / 4.0;
    match kind {
        RhoKind::Exact => (1.0 + x * n as f64).sqrt(),
        RhoKind::NormalOrdered => {
            // sum_k binom(1/2, k) x^k n (n-1) ... (n-k+1); the sum stops at k = n.
            let mut total = 0.0;
            let mut binom = 1.0;
            let mut falling = 1.0;
            let mut xk = 1.0;
            for k in 0..=n {
                total += binom * xk * falling;
                binom *= (0.5 - k as f64) / (k as f64 + 1.0);
                falling *= (n - k) as f64;
                xk *= x;
            }
            total
        }
    }
}

/// The L-operator of one site as a 2x2 array of `d x d` matrices.
pub fn build_l(lambda: Complex64, spec: &LatticeSpec) -> [[DMatrix<Complex64>; 2]; 2] {
    let psi = SiteOperator::new(SiteRole::Psi, spec).matrix;
    build_l_from_psi(lambda, spec.step, spec.c(), &psi)
}

/// L-operator built from a given `psi` matrix, with `rho` computed from
/// `psi^dag psi` by an entrywise square root of its diagonal.
pub fn build_l_from_psi(
    lambda: Complex64,
    step: f64,
    c: f64,
    psi: &DMatrix<Complex64>,
) -> [[DMatrix<Complex64>; 2]; 2] {
    let d = psi.nrows();
    let id = DMatrix::<Complex64>::identity(d, d);
    let psi_dag = psi.adjoint();
    let number = &psi_dag * psi;
    let rho = DMatrix::from_fn(d, d, |r, s| {
        if r == s {
            (Complex64::from(1.0) + number[(r, r)] * (c * step * step / 4.0)).sqrt()
        } else {
            Complex64::from(0.0)
        }
    });
    let i = Complex64::i();
    let diag = &number * Complex64::from(c * step * step / 2.0);
    let l11 = &id * (1.0 - i * lambda * step / 2.0) + &diag;
    let l22 = &id * (1.0 + i * lambda * step / 2.0) + &diag;
    let l12 = &psi_dag * &rho * (-i * step * c.sqrt());
    let l21 = &rho * psi * (i * step * c.sqrt());
    [[l11, l12], [l21, l22]]
}

fn add_to(state: &mut State, config: Config, amp: Complex64) {
    if amp == Complex64::from(0.0) {
        return;
    }
    *state.entry(config).or_insert(Complex64::from(0.0)) += amp;
}

/// Action of the monodromy `T(lambda)` on sparse states.
#[derive(Debug, Clone)]
pub struct Monodromy<'a> {
    pub lambda: Complex64,
    pub spec: &'a LatticeSpec,
    pub rho: RhoKind,
}

impl<'a> Monodromy<'a> {
    pub fn new(lambda: Complex64, spec: &'a LatticeSpec) -> Self {
        Self {
            lambda,
            spec,
            rho: RhoKind::Exact,
        }
    }

    pub fn with_rho(mut self, rho: RhoKind) -> Self {
        self.rho = rho;
        self
    }

    /// `L(site)_{ab}` applied to `state`.
    fn apply_site(&self, site: usize, a: usize, b: usize, state: &State) -> State {
        let spec = self.spec;
        let (step, c) = (spec.step, spec.c());
        let i = Complex64::i();
        let mut out = State::new();
        for (config, &amp) in state {
            let n = config[site] as usize;
            match (a, b) {
                (0, 0) | (1, 1) => {
                    let sign = if a == 0 { -1.0 } else { 1.0 };
                    let v = 1.0 + sign * i * self.lambda * step / 2.0 + c * step * n as f64 / 2.0;
                    add_to(&mut out, config.clone(), amp * v);
                }
                (0, 1) => {
                    if n + 1 < spec.cutoff {
                        let v = -i * step * c.sqrt()
                            * ((n + 1) as f64 / step).sqrt()
                            * rho(n, spec, self.rho);
                        let mut next = config.clone();
                        next[site] += 1;
                        add_to(&mut out, next, amp * v);
                    }
                }
                _ => {
                    if n >= 1 {
                        let v = i * step * c.sqrt() * (n as f64 / step).sqrt() * rho(n - 1, spec, self.rho);
                        let mut next = config.clone();
                        next[site] -= 1;
                        add_to(&mut out, next, amp * v);
                    }
                }
            }
        }
        out
    }

    /// `(T_{0b} |v>, T_{1b} |v>)`.
    pub fn apply_column(&self, b: usize, state: &State) -> [State; 2] {
        let mut w: [State; 2] = [State::new(), State::new()];
        w[b] = state.clone();
        for site in 0..self.spec.sites {
            let mut next: [State; 2] = [State::new(), State::new()];
            for (a, slot) in next.iter_mut().enumerate() {
                for (cidx, src) in w.iter().enumerate() {
                    if src.is_empty() {
                        continue;
                    }
                    for (k, v) in self.apply_site(site, a, cidx, src) {
                        add_to(slot, k, v);
                    }
                }
            }
            w = next;
        }
        w
    }

    pub fn apply(&self, a: usize, b: usize, state: &State) -> State {
        let [t0, t1] = self.apply_column(b, state);
        if a == 0 {
            t0
        } else {
            t1
        }
    }

    /// `tau = T_00 + T_11`.
    pub fn apply_trace(&self, state: &State) -> State {
        let mut out = self.apply(0, 0, state);
        for (k, v) in self.apply(1, 1, state) {
            add_to(&mut out, k, v);
        }
        out
    }
}

fn count_configs(sites: usize, total: usize, max_occ: usize) -> usize {
    // ways[t] = number of configurations of the sites so far with sum t
    let mut ways = vec![0usize; total + 1];
    ways[0] = 1;
    for _ in 0..sites {
        let mut next = vec![0usize; total + 1];
        for (t, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for n in 0..=max_occ.min(total - t) {
                next[t + n] = next[t + n].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[total]
}

/// Occupation configurations with `sum n_i = total` and every `n_i <= max_occ`,
/// in lexicographic order.
pub fn sector_basis(sites: usize, total: usize, max_occ: usize) -> Result<Vec<Config>> {
    let count = count_configs(sites, total, max_occ);
    if count > MAX_SECTOR_DIM {
        return Err(Error::SizeLimit {
            what: "sector dimension",
            value: count,
            max: MAX_SECTOR_DIM,
        });
    }
    let mut out = Vec::with_capacity(count);
    let mut current = vec![0u8; sites];
    fn rec(pos: usize, left: usize, max_occ: usize, cur: &mut Config, out: &mut Vec<Config>) {
        if pos == cur.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for n in 0..=max_occ.min(left) {
            cur[pos] = n as u8;
            rec(pos + 1, left - n, max_occ, cur, out);
        }
    }
    rec(0, total, max_occ, &mut current, &mut out);
    Ok(out)
}

fn basis_state(config: &Config) -> State {
    State::from([(config.clone(), Complex64::from(1.0))])
}

/// An operator restricted to one particle-number sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorOperatorMatrix {
    pub n_total: usize,
    pub basis: Vec<Config>,
    pub matrix: DMatrix<Complex64>,
    /// Norm of the part of the image that left the sector.
    pub off_sector_norm: f64,
}

/// Matrix of `op` on the `n_total` sector (all occupations `<= d - 1`).
pub fn sector_matrix(
    spec: &LatticeSpec,
    n_total: usize,
    op: impl Fn(&State) -> State,
) -> Result<SectorOperatorMatrix> {
    let basis = sector_basis(spec.sites, n_total, spec.cutoff - 1)?;
    let index: BTreeMap<&Config, usize> = basis.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let dim = basis.len();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    let mut off = 0.0;
    for (col, config) in basis.iter().enumerate() {
        for (k, v) in op(&basis_state(config)) {
            match index.get(&k) {
                Some(&row) => matrix[(row, col)] += v,
                None => off += v.norm_sqr(),
            }
        }
    }
    Ok(SectorOperatorMatrix {
        n_total,
        basis,
        matrix,
        off_sector_norm: off.sqrt(),
    })
}

/// `tau(lambda)` on the `n_total` sector.
pub fn transfer_sector(lambda: Complex64, spec: &LatticeSpec, n_total: usize) -> Result<SectorOperatorMatrix> {
    let t = Monodromy::new(lambda, spec);
    sector_matrix(spec, n_total, |s| t.apply_trace(s))
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// `R(lambda, mu)` with `f(mu, lambda) = (mu - lambda + ic)/(mu - lambda)` on the
/// diagonal corners and `g(mu, lambda) = ic/(mu - lambda)` in the middle block.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrixValue {
    pub matrix: Matrix4<Complex64>,
}

pub fn r_matrix(lambda: Complex64, mu: Complex64, c: f64) -> Result<RMatrixValue> {
    let diff = mu - lambda;
    if diff.norm() <= f64::EPSILON * (lambda.norm() + mu.norm()).max(1.0) {
        return Err(Error::RMatrixPole);
    }
    let ic = Complex64::new(0.0, c);
    let f = (diff + ic) / diff;
    let g = ic / diff;
    let (z, o) = (Complex64::from(0.0), Complex64::from(1.0));
    Ok(RMatrixValue {
        matrix: Matrix4::new(f, z, z, z, z, g, o, z, z, o, g, z, z, z, z, f),
    })
}

/// Tensor-leg conventions for the RTT relation. With
/// `X(a, b)_{(pq),(rs)} = T_pr(a) T_qs(b)` (the right factor acts first):
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RttOrdering {
    /// `R(lambda, mu) X(lambda, mu) = X(mu, lambda) R(lambda, mu)`.
    RLeft,
    /// `X(lambda, mu) R(lambda, mu) = R(lambda, mu) X(mu, lambda)`.
    RRight,
}

impl RttOrdering {
    pub fn id(self) -> &'static str {
        match self {
            RttOrdering::RLeft => "R(l,m) T(l)xT(m) = T(m)xT(l) R(l,m)",
            RttOrdering::RRight => "T(l)xT(m) R(l,m) = R(l,m) T(m)xT(l)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RttReport {
    pub r_left: f64,
    pub r_right: f64,
    pub input_dim: usize,
}

impl RttReport {
    pub fn best(&self) -> (RttOrdering, f64) {
        if self.r_left <= self.r_right {
            (RttOrdering::RLeft, self.r_left)
        } else {
            (RttOrdering::RRight, self.r_right)
        }
    }

    pub fn to_json(&self) -> Value {
        let (ord, res) = self.best();
        json!({
            "residual": res,
            "convention": ord.id(),
            "residual_r_left": self.r_left,
            "residual_r_right": self.r_right,
            "input_dim": self.input_dim,
        })
    }
}

/// Configurations with every occupation `<= d - 2`: the inputs on which both
/// sides of the RTT relation are computed without truncation loss.
fn safe_inputs(spec: &LatticeSpec) -> Result<Vec<Config>> {
    if spec.cutoff < 2 {
        return Ok(Vec::new());
    }
    let max_occ = spec.cutoff - 2;
    let mut out = Vec::new();
    for total in 0..=max_occ * spec.sites {
        out.extend(sector_basis(spec.sites, total, max_occ)?);
        if out.len() > MAX_SECTOR_DIM {
            return Err(Error::SizeLimit {
                what: "RTT input dimension",
                value: out.len(),
                max: MAX_SECTOR_DIM,
            });
        }
    }
    Ok(out)
}

/// Operator norm of both RTT residuals on the safe inputs. With `d = 1` there
/// are none and both residuals are 0.
pub fn rtt_residual(lambda: f64, mu: f64, spec: &LatticeSpec) -> Result<RttReport> {
    let (l, m) = (Complex64::from(lambda), Complex64::from(mu));
    let r = r_matrix(l, m, spec.c())?.matrix;
    let tl = Monodromy::new(l, spec);
    let tm = Monodromy::new(m, spec);
    let inputs = safe_inputs(spec)?;

    // x(first, second)[(p,q)][(r,s)] |v> = T_pr(first) T_qs(second) |v>
    let product = |first: &Monodromy, second: &Monodromy, v: &State| -> Vec<Vec<State>> {
        let mut out = vec![vec![State::new(); 4]; 4];
        for s in 0..2 {
            let inner = second.apply_column(s, v);
            for (q, iv) in inner.iter().enumerate() {
                for rr in 0..2 {
                    let outer = first.apply_column(rr, iv);
                    for (p, ov) in outer.into_iter().enumerate() {
                        out[2 * p + q][2 * rr + s] = ov;
                    }
                }
            }
        }
        out
    };

    let mut rows: BTreeMap<(usize, Config), usize> = BTreeMap::new();
    let mut cols_left: Vec<BTreeMap<(usize, Config), Complex64>> = Vec::new();
    let mut cols_right: Vec<BTreeMap<(usize, Config), Complex64>> = Vec::new();
    for config in &inputs {
        let v = basis_state(config);
        let x_lm = product(&tl, &tm, &v);
        let x_ml = product(&tm, &tl, &v);
        for col in 0..4 {
            let mut left = BTreeMap::new();
            let mut right = BTreeMap::new();
            for row in 0..4 {
                for e in 0..4 {
                    // RLeft: (R X(l,m))_{row,col} - (X(m,l) R)_{row,col}
                    for (k, val) in &x_lm[e][col] {
                        *left.entry((row, k.clone())).or_insert(Complex64::from(0.0)) += r[(row, e)] * val;
                    }
                    for (k, val) in &x_ml[row][e] {
                        *left.entry((row, k.clone())).or_insert(Complex64::from(0.0)) -= val * r[(e, col)];
                    }
                    // RRight: (X(l,m) R)_{row,col} - (R X(m,l))_{row,col}
                    for (k, val) in &x_lm[row][e] {
                        *right.entry((row, k.clone())).or_insert(Complex64::from(0.0)) += val * r[(e, col)];
                    }
                    for (k, val) in &x_ml[e][col] {
                        *right.entry((row, k.clone())).or_insert(Complex64::from(0.0)) -= r[(row, e)] * val;
                    }
                }
            }
            for key in left.keys().chain(right.keys()) {
                let next = rows.len();
                rows.entry(key.clone()).or_insert(next);
            }
            cols_left.push(left);
            cols_right.push(right);
        }
    }
    let dense = |cols: &[BTreeMap<(usize, Config), Complex64>]| {
        let mut m = DMatrix::<Complex64>::zeros(rows.len().max(1), cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (k, v) in col {
                m[(rows[k], j)] += v;
            }
        }
        operator_norm(&m)
    };
    Ok(RttReport {
        r_left: dense(&cols_left),
        r_right: dense(&cols_right),
        input_dim: inputs.len() * 4,
    })
}

/// `||[tau(lambda), tau(mu)]||` on the `n_sector` block. Requires
/// `d >= n_sector + 2` so that no intermediate occupation is truncated.
pub fn tau_commutator_norm(lambda: f64, mu: f64, spec: &LatticeSpec, n_sector: usize) -> Result<f64> {
    if spec.cutoff < n_sector + 2 {
        return Err(Error::CutoffTooSmall {
            cutoff: spec.cutoff,
            sector: n_sector,
        });
    }
    tau_commutator_norm_unchecked(lambda, mu, spec, n_sector)
}

/// As [`tau_commutator_norm`] without the cutoff check, for truncation
/// leakage controls.
pub fn tau_commutator_norm_unchecked(lambda: f64, mu: f64, spec: &LatticeSpec, n_sector: usize) -> Result<f64> {
    let a = transfer_sector(lambda.into(), spec, n_sector)?.matrix;
    let b = transfer_sector(mu.into(), spec, n_sector)?.matrix;
    Ok(operator_norm(&(&a * &b - &b * &a)))
}

/// Which sector the continuum comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuumSector {
    Vacuum,
    /// One particle with momentum `2 pi mode / L`.
    OneParticle { mode: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumRate {
    pub sector: ContinuumSector,
    /// `(M, step, |lattice - continuum|)`.
    pub points: Vec<(usize, f64, f64)>,
    pub order: f64,
}

impl ContinuumRate {
    pub fn monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].2 < w[0].2)
    }

    pub fn to_json(&self) -> Value {
        let sector = match self.sector {
            ContinuumSector::Vacuum => json!("vacuum"),
            ContinuumSector::OneParticle { mode } => json!({"one_particle_mode": mode}),
        };
        json!({
            "sector": sector,
            "order": self.order,
            "points": self.points.iter().map(|&(m, s, e)| json!({"sites": m, "step": s, "error": e})).collect::<Vec<_>>(),
        })
    }
}

/// Eigenvalue of `tau(lambda)` on the chosen sector at fixed `L = M step`,
/// divided by `(1 + lambda^2 step^2 / 4)^{M/2}`.
pub fn normalized_lattice_eigenvalue(
    lambda: f64,
    spec: &LatticeSpec,
    sector: ContinuumSector,
) -> Result<Complex64> {
    let m = spec.sites;
    let t = Monodromy::new(lambda.into(), spec);
    let raw = match sector {
        ContinuumSector::Vacuum => {
            let out = t.apply_trace(&basis_state(&vec![0; m]));
            out.get(&vec![0; m]).copied().unwrap_or_default()
        }
        ContinuumSector::OneParticle { mode } => {
            if spec.cutoff < 3 {
                return Err(Error::CutoffTooSmall {
                    cutoff: spec.cutoff,
                    sector: 1,
                });
            }
            let q = 2.0 * std::f64::consts::PI * mode as f64 / m as f64;
            let mut v = State::new();
            for site in 0..m {
                let mut config = vec![0u8; m];
                config[site] = 1;
                v.insert(config, Complex64::from_polar(1.0, q * (site + 1) as f64));
            }
            let tv = t.apply_trace(&v);
            let num: Complex64 = v.iter().map(|(k, a)| a.conj() * tv.get(k).copied().unwrap_or_default()).sum();
            num / m as f64
        }
    };
    let norm = (1.0 + lambda * lambda * spec.step * spec.step / 4.0).powf(m as f64 / 2.0);
    Ok(raw / norm)
}

/// The continuum eigenvalue `theta(lambda)` for the same sector.
pub fn continuum_eigenvalue(lambda: f64, length: f64, c: f64, sector: ContinuumSector) -> Result<Complex64> {
    let k = match sector {
        ContinuumSector::Vacuum => vec![],
        ContinuumSector::OneParticle { mode } => vec![2.0 * std::f64::consts::PI * mode as f64 / length],
    };
    crate::transfer::theta(lambda.into(), &k, length, c)
}

/// Slope of `log y` against `log x` by least squares.
pub fn log_log_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let (sx, sy) = xy.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = xy.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

/// Error of the lattice eigenvalue against the continuum one at fixed
/// length, for each `M` in `sites`, with the fitted order in the step.
pub fn continuum_limit_rate(
    lambda: f64,
    length: f64,
    c: f64,
    sites: &[usize],
    sector: ContinuumSector,
) -> Result<ContinuumRate> {
    let target = continuum_eigenvalue(lambda, length, c, sector)?;
    let cutoff = match sector {
        ContinuumSector::Vacuum => 2,
        ContinuumSector::OneParticle { .. } => 3,
    };
    let mut points = Vec::new();
    for &m in sites {
        let spec = LatticeSpec::new(m, cutoff, length / m as f64, c)?;
        let v = normalized_lattice_eigenvalue(lambda, &spec, sector)?;
        points.push((m, spec.step, (v - target).norm()));
    }
    let order = log_log_slope(&points.iter().map(|&(_, s, e)| (s, e)).collect::<Vec<_>>());
    Ok(ContinuumRate { sector, points, order })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalOrderingReport {
    pub sites: usize,
    pub cutoff: usize,
    pub step: f64,
    /// `||A(lambda) - :A^cl(lambda):||` on all configurations.
    pub difference: f64,
}

/// Compares the `A = T_00` entry with the entry obtained by normal ordering
/// the classical monodromy monomial by monomial (which amounts to replacing
/// `rho` by its normal-ordered series).
pub fn normal_ordering_breakdown_demo(lambda: f64, spec: &LatticeSpec) -> Result<NormalOrderingReport> {
    if spec.cutoff < 3 {
        return Err(Error::CutoffTooSmall {
            cutoff: spec.cutoff,
            sector: 1,
        });
    }
    let exact = Monodromy::new(lambda.into(), spec);
    let ordered = Monodromy::new(lambda.into(), spec).with_rho(RhoKind::NormalOrdered);
    let mut total = 0.0f64;
    for n in 0..=(spec.cutoff - 1) * spec.sites {
        let a = sector_matrix(spec, n, |s| exact.apply(0, 0, s))?;
        let b = sector_matrix(spec, n, |s| ordered.apply(0, 0, s))?;
        total = total.max(operator_norm(&(&a.matrix - &b.matrix)));
    }
    Ok(NormalOrderingReport {
        sites: spec.sites,
        cutoff: spec.cutoff,
        step: spec.step,
        difference: total,
    })
}
