use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::MAX_CUTOFF;
use crate::solver::QuantumNumbers;

/// Arithmetic used by the symbolic checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn id(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Config(format!("mode must be 'exact' or 'float', got '{other}'"))),
        }
    }
}

/// Grid suites run by `run all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Charges,
    Bethe,
    Transfer,
    Lattice,
    Aop,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Charges, Suite::Bethe, Suite::Transfer, Suite::Lattice, Suite::Aop];

    pub fn id(self) -> &'static str {
        match self {
            Suite::Charges => "charges",
            Suite::Bethe => "bethe",
            Suite::Transfer => "transfer",
            Suite::Lattice => "lattice",
            Suite::Aop => "aop",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.id() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown suite '{}'", s.trim())))
    }
}

/// One unit of work. The grid suites cover the default parameter ranges; the
/// single tasks back the individual CLI verbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Suite(Suite),
    BetheSolve,
    TransferExpand,
    LatticeRtt,
    LatticeCommute,
    LatticeContinuum,
    AopCheck,
}

impl Task {
    pub fn id(self) -> &'static str {
        match self {
            Task::Suite(s) => s.id(),
            Task::BetheSolve => "bethe-solve",
            Task::TransferExpand => "expand-transfer",
            Task::LatticeRtt => "lattice-rtt",
            Task::LatticeCommute => "lattice-commute",
            Task::LatticeContinuum => "lattice-continuum",
            Task::AopCheck => "aop-check",
        }
    }
}

/// Everything a run depends on. Built from defaults, then a flat
/// `key = value` file, then command-line overrides (later sources win).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tasks: Vec<Task>,
    pub mode: Mode,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Particle number (largest one for the charge grid).
    pub n: Option<usize>,
    /// Random rapidity sets per particle number in the charge grid.
    pub samples: usize,
    /// Random sets for the composition identities.
    pub composition_samples: usize,
    pub box_length: f64,
    pub coupling: f64,
    pub order: usize,
    pub sites: Option<usize>,
    pub cutoff: Option<usize>,
    pub step: f64,
    /// Spectral parameter for the integral operator (needs `Im < 0`).
    pub lambda: Complex64,
    /// Spectral parameters for the lattice checks.
    pub lattice_lambda: f64,
    pub lattice_mu: f64,
    pub quantum_numbers: Option<QuantumNumbers>,
    pub rapidities: Option<Vec<f64>>,
    /// Include the regularized `G4` scan in the charge grid.
    pub g4: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tasks: Suite::ALL.into_iter().map(Task::Suite).collect(),
            mode: Mode::Exact,
            seed: 20240101,
            out_dir: PathBuf::from("out"),
            n: None,
            samples: 20,
            composition_samples: 100,
            box_length: 2.0 * PI,
            coupling: 1.0,
            order: 6,
            sites: None,
            cutoff: None,
            step: 0.25,
            lambda: Complex64::new(0.5, -1.5),
            lattice_lambda: 0.3,
            lattice_mu: -1.4,
            quantum_numbers: None,
            rapidities: None,
            g4: true,
        }
    }
}

/// Keys accepted in config files and by [`RunConfig::set`].
pub const KEYS: [&str; 19] = [
    "suites",
    "mode",
    "seed",
    "out",
    "n",
    "samples",
    "composition_samples",
    "box",
    "coupling",
    "order",
    "sites",
    "cutoff",
    "step",
    "lambda",
    "lattice_lambda",
    "lattice_mu",
    "quantum_numbers",
    "rapidities",
    "g4",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = '{value}'")))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|t| !t.is_empty())
}

/// `re,im` or `re+im i`-free forms: two comma-separated numbers.
pub fn parse_complex(value: &str) -> Result<Complex64> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse("lambda", re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse("lambda", re)?, parse("lambda", im)?)),
        _ => Err(Error::Config(format!("expected 're,im', got '{value}'"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "suites" => {
                let mut suites = list(value).map(Suite::from_str).collect::<Result<Vec<_>>>()?;
                if suites.is_empty() {
                    return Err(Error::Config("suites must name at least one suite".into()));
                }
                suites.sort();
                suites.dedup();
                self.tasks = suites.into_iter().map(Task::Suite).collect();
            }
            "mode" => self.mode = value.parse()?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out_dir = PathBuf::from(value.trim()),
            "n" => self.n = Some(parse(key, value)?),
            "samples" => self.samples = parse(key, value)?,
            "composition_samples" => self.composition_samples = parse(key, value)?,
            "box" => self.box_length = parse(key, value)?,
            "coupling" => self.coupling = parse(key, value)?,
            "order" => self.order = parse(key, value)?,
            "sites" => self.sites = Some(parse(key, value)?),
            "cutoff" => self.cutoff = Some(parse(key, value)?),
            "step" => self.step = parse(key, value)?,
            "lambda" => self.lambda = parse_complex(value)?,
            "lattice_lambda" => self.lattice_lambda = parse(key, value)?,
            "lattice_mu" => self.lattice_mu = parse(key, value)?,
            "quantum_numbers" => {
                self.quantum_numbers =
                    Some(value.parse().map_err(|e: Error| Error::Config(e.to_string()))?)
            }
            "rapidities" => {
                self.rapidities = Some(list(value).map(|t| parse(key, t)).collect::<Result<Vec<f64>>>()?)
            }
            "g4" => self.g4 = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` document. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Particle number for a task, with per-task defaults.
    pub fn n_for(&self, task: Task) -> usize {
        self.n.unwrap_or(match task {
            Task::Suite(Suite::Charges) => 4,
            Task::BetheSolve | Task::TransferExpand => 3,
            Task::LatticeCommute | Task::AopCheck => 2,
            _ => 0,
        })
    }

    pub fn sites_for(&self, task: Task) -> usize {
        self.sites.unwrap_or(match task {
            Task::LatticeContinuum => 64,
            Task::LatticeRtt => 1,
            _ => 3,
        })
    }

    pub fn cutoff_for(&self, task: Task) -> usize {
        self.cutoff.unwrap_or(match task {
            Task::LatticeRtt => 4,
            _ => self.n_for(task) + 2,
        })
    }

    /// Checks every precondition the selected tasks rely on.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.tasks.is_empty() {
            return bad("nothing to run".into());
        }
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return bad(format!("box must be positive, got {}", self.box_length));
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return bad(format!("coupling must be positive, got {}", self.coupling));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if self.samples == 0 || self.composition_samples == 0 {
            return bad("sample counts must be positive".into());
        }
        if self.lattice_lambda == self.lattice_mu {
            return bad("lattice_lambda and lattice_mu must differ".into());
        }
        for &task in &self.tasks {
            let n = self.n_for(task);
            match task {
                Task::Suite(Suite::Charges) if !(1..=6).contains(&n) => {
                    return bad(format!("charge checks need 1 <= n <= 6, got {n}"))
                }
                Task::BetheSolve | Task::TransferExpand => {
                    if !(1..=8).contains(&n) {
                        return bad(format!("n must be in 1..=8, got {n}"));
                    }
                    if let Some(qn) = &self.quantum_numbers {
                        if qn.len() != n {
                            return bad(format!("{} quantum numbers for n = {n}", qn.len()));
                        }
                    }
                    if task == Task::TransferExpand && !(4..=12).contains(&self.order) {
                        return bad(format!("order must be in 4..=12, got {}", self.order));
                    }
                }
                Task::LatticeRtt | Task::LatticeCommute | Task::LatticeContinuum => {
                    let (m, d) = (self.sites_for(task), self.cutoff_for(task));
                    if m == 0 || d == 0 || d > MAX_CUTOFF {
                        return bad(format!("need sites >= 1 and 1 <= cutoff <= {MAX_CUTOFF}"));
                    }
                    if task == Task::LatticeCommute && d < n + 2 {
                        return bad(format!("cutoff {d} is too small for n = {n} (need n + 2)"));
                    }
                    if task == Task::LatticeContinuum && m < 32 {
                        return bad(format!("the continuum scan needs sites >= 32, got {m}"));
                    }
                }
                Task::AopCheck => {
                    if !(1..=3).contains(&n) {
                        return bad(format!("the integral operator handles 1 <= n <= 3, got {n}"));
                    }
                    if self.lambda.im >= 0.0 {
                        return bad(format!("lambda needs a negative imaginary part, got {}", self.lambda));
                    }
                    if let Some(r) = &self.rapidities {
                        if r.len() != n {
                            return bad(format!("{} rapidities for n = {n}", r.len()));
                        }
                        let mut s = r.clone();
                        s.sort_by(f64::total_cmp);
                        if s.windows(2).any(|w| w[0] == w[1]) {
                            return bad("rapidities must be distinct".into());
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tasks": self.tasks.iter().map(|t| t.id()).collect::<Vec<_>>(),
            "mode": self.mode.id(),
            "seed": self.seed,
            "n": self.n,
            "samples": self.samples,
            "composition_samples": self.composition_samples,
            "box": self.box_length,
            "coupling": self.coupling,
            "order": self.order,
            "sites": self.sites,
            "cutoff": self.cutoff,
            "step": self.step,
            "lambda": {"re": self.lambda.re, "im": self.lambda.im},
            "lattice_lambda": self.lattice_lambda,
            "lattice_mu": self.lattice_mu,
            "quantum_numbers": self.quantum_numbers.as_ref().map(|q| q.to_string()),
            "rapidities": self.rapidities,
            "g4": self.g4,
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}
