use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qnls::harness::{persist, render_markdown, run_suite, RunConfig, Suite, Task};

/// Verification toolkit for the quantum nonlinear Schrodinger model.
///
/// Exit status: 0 when every check passes, 1 when any check fails, 2 on a
/// usage or configuration error (no report is written).
#[derive(Parser, Debug)]
#[command(name = "qnls", version)]
struct Cli {
    /// Flat `key = value` configuration file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Arithmetic for the symbolic checks: exact or float.
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reports go to OUT/<timestamp>/ and OUT/latest/.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of Markdown.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing; rely on the exit status and the written report.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalue, boundary-condition and composition checks of the charges.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Finite-box Bethe equations.
    Bethe {
        #[command(subcommand)]
        what: BetheWhat,
    },
    /// Large-lambda expansion of the transfer-matrix eigenvalue.
    Expand {
        #[command(subcommand)]
        what: ExpandWhat,
    },
    /// Truncated lattice model.
    Lattice {
        #[command(subcommand)]
        what: LatticeWhat,
    },
    /// The integral operator A(lambda).
    Aop {
        #[command(subcommand)]
        what: AopWhat,
    },
    /// Every suite selected by the configuration (all of them by default).
    Run {
        #[command(subcommand)]
        what: RunWhat,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyWhat {
    Charges {
        /// Largest particle number.
        #[arg(long)]
        n: Option<usize>,
        /// Random rapidity sets per particle number.
        #[arg(long)]
        samples: Option<usize>,
        /// Skip the regularized G4 scan.
        #[arg(long)]
        no_g4: bool,
    },
}

#[derive(Args, Debug)]
struct StateArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Box length.
    #[arg(long = "box")]
    box_length: Option<f64>,
    #[arg(long)]
    coupling: Option<f64>,
    /// Comma-separated, e.g. `-1,0,2` or `-1/2,3/2` (ground state by default).
    #[arg(long, allow_hyphen_values = true)]
    quantum_numbers: Option<String>,
}

#[derive(Subcommand, Debug)]
enum BetheWhat {
    Solve(StateArgs),
}

#[derive(Subcommand, Debug)]
enum ExpandWhat {
    Transfer {
        #[command(flatten)]
        state: StateArgs,
        /// Truncation order of the series in 1/lambda.
        #[arg(long)]
        order: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[arg(long)]
    sites: Option<usize>,
    /// Largest occupation per site plus one.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum LatticeWhat {
    Rtt(LatticeArgs),
    Commute {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Particle-number sector.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Lattice spacing L/M for M = 8, 16, ... up to --sites.
    Continuum {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long = "box")]
        box_length: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum AopWhat {
    Check {
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated rapidities.
        #[arg(long, allow_hyphen_values = true)]
        rapidities: Option<String>,
        #[arg(long)]
        coupling: Option<f64>,
        /// `re,im` with im < 0.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum RunWhat {
    All,
}

/// Collects the command-line overrides as config key/value pairs.
fn overrides(cli: &Cli) -> (Option<Vec<Task>>, Vec<(&'static str, String)>) {
    let mut kv: Vec<(&'static str, String)> = Vec::new();
    let mut push = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            kv.push((k, v));
        }
    };
    let s = |x: Option<f64>| x.map(|v| v.to_string());
    let u = |x: Option<usize>| x.map(|v| v.to_string());
    push("mode", cli.mode.clone());
    push("seed", cli.seed.map(|v| v.to_string()));
    push("out", cli.out.as_ref().map(|p| p.display().to_string()));
    let state = |st: &StateArgs, push: &mut dyn FnMut(&'static str, Option<String>)| {
        push("n", u(st.n));
        push("box", s(st.box_length));
        push("coupling", s(st.coupling));
        push("quantum_numbers", st.quantum_numbers.clone());
    };
    let lattice = |l: &LatticeArgs, push: &mut dyn FnMut(&'static str, Option<String>)| {
        push("sites", u(l.sites));
        push("cutoff", u(l.cutoff));
        push("step", s(l.step));
        push("coupling", s(l.coupling));
        push("lattice_lambda", s(l.lambda));
        push("lattice_mu", s(l.mu));
    };
    let tasks = match &cli.command {
        Command::Verify { what: VerifyWhat::Charges { n, samples, no_g4 } } => {
            push("n", u(*n));
            push("samples", u(*samples));
            push("g4", no_g4.then(|| "false".to_string()));
            Some(vec![Task::Suite(Suite::Charges)])
        }
        Command::Bethe { what: BetheWhat::Solve(st) } => {
            state(st, &mut push);
            Some(vec![Task::BetheSolve])
        }
        Command::Expand { what: ExpandWhat::Transfer { state: st, order } } => {
            state(st, &mut push);
            push("order", u(*order));
            Some(vec![Task::TransferExpand])
        }
        Command::Lattice { what } => match what {
            LatticeWhat::Rtt(l) => {
                lattice(l, &mut push);
                Some(vec![Task::LatticeRtt])
            }
            LatticeWhat::Commute { lattice: l, n } => {
                lattice(l, &mut push);
                push("n", u(*n));
                Some(vec![Task::LatticeCommute])
            }
            LatticeWhat::Continuum { lattice: l, box_length } => {
                lattice(l, &mut push);
                push("box", s(*box_length));
                Some(vec![Task::LatticeContinuum])
            }
        },
        Command::Aop { what: AopWhat::Check { n, rapidities, coupling, lambda } } => {
            push("n", u(*n));
            push("rapidities", rapidities.clone());
            push("coupling", s(*coupling));
            push("lambda", lambda.clone());
            Some(vec![Task::AopCheck])
        }
        Command::Run { what: RunWhat::All } => None,
    };
    (tasks, kv)
}

fn build_config(cli: &Cli) -> qnls::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| qnls::Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    let (tasks, kv) = overrides(cli);
    for (k, v) in kv {
        cfg.set(k, &v)?;
    }
    if let Some(tasks) = tasks {
        cfg.tasks = tasks;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qnls: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("qnls: {e}");
            return ExitCode::from(2);
        }
    };
    let written = persist(&report, &cfg.out_dir);
    if !cli.quiet {
        if cli.json {
            print!("{}", report.to_json_string());
        } else {
            print!("{}", render_markdown(&report));
        }
    }
    match written {
        Ok(dir) if !cli.quiet => eprintln!("report written to {}", dir.display()),
        Ok(_) => {}
        Err(e) => {
            eprintln!("qnls: {e}");
            return ExitCode::from(2);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
