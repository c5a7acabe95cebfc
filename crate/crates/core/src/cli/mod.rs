//! Command-line front end.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::exec::Exec;
use config::{Layer, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "bosonband",
    version,
    about = "Bound states and bands of two and three lattice bosons with zero-range coupling"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-body bound state e_μ(k) and its continuum.
    Twobody(Flags),
    /// Three-body bound state E_μ(K) from the Birman-Schwinger operator.
    Threebody(Flags),
    /// Essential spectrum of the three-body fiber at K.
    Ess(Flags),
    /// Band over a quasimomentum grid (three-body unless --particles 2).
    Band(Flags),
    /// Finite-volume exact diagonalization over the --L sequence.
    Oracle(Flags),
    /// Invariant suite with a pass/fail table.
    Selftest(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// key = value file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice dimension (1 or 2).
    #[arg(long)]
    d: Option<String>,
    /// Coupling μ.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Quasimomentum components in radians, comma separated; accepts pi forms such as -pi/2.
    #[arg(long = "k", alias = "K", allow_hyphen_values = true)]
    k: Option<String>,
    /// Nyström points per axis.
    #[arg(long)]
    n: Option<String>,
    /// Quasimomentum grid points per axis for band scans.
    #[arg(long)]
    nk: Option<String>,
    /// Box sizes for the oracle, comma separated.
    #[arg(long = "L", alias = "l")]
    ls: Option<String>,
    /// Energy tolerance of the three-body root search.
    #[arg(long)]
    tol: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(long)]
    jobs: Option<String>,
    /// Oracle comparison for threebody, e.g. L=32,64,128.
    #[arg(long)]
    oracle: Option<String>,
    /// 2 or 3 particles for band.
    #[arg(long)]
    particles: Option<String>,
    /// Reduced selftest.
    #[arg(long)]
    quick: bool,
}

impl Flags {
    fn layer(&self) -> Layer {
        let mut l = Layer::new();
        let fields = [
            ("d", &self.d),
            ("mu", &self.mu),
            ("k", &self.k),
            ("n", &self.n),
            ("nk", &self.nk),
            ("L", &self.ls),
            ("tol", &self.tol),
            ("format", &self.format),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("oracle", &self.oracle),
            ("particles", &self.particles),
        ];
        for (key, value) in fields {
            if let Some(v) = value {
                l.insert(key.into(), v.clone());
            }
        }
        if self.quick {
            l.insert("quick".into(), "true".into());
        }
        l
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, flags) = match &cli.command {
        Command::Twobody(f) => ("twobody", f),
        Command::Threebody(f) => ("threebody", f),
        Command::Ess(f) => ("ess", f),
        Command::Band(f) => ("band", f),
        Command::Oracle(f) => ("oracle", f),
        Command::Selftest(f) => ("selftest", f),
    };
    let file = match &flags.config {
        Some(p) => match config::read_config_file(p) {
            Ok(l) => l,
            Err(e) => return fail(&e),
        },
        None => Layer::new(),
    };
    let cfg = match RunConfig::resolve(name, &file, &flags.layer()) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let exec = if cfg.jobs == 1 {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let go = || commands::dispatch(&cfg, exec);
    #[cfg(feature = "parallel")]
    let outcome = if cfg.jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
            Ok(pool) => pool.install(go),
            Err(e) => return fail(&Error::InvalidArgument(format!("thread pool: {e}"))),
        }
    } else {
        go()
    };
    #[cfg(not(feature = "parallel"))]
    let outcome = go();
    match outcome {
        Ok((report, status)) => {
            let text = output::render(&cfg, &report);
            if let Err(e) = output::emit(&cfg, &text) {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            for (k, v) in &report.summary {
                if cfg.out.is_some() {
                    eprintln!("{k}: {v}");
                }
            }
            status
        }
        Err(e) => fail(&e),
    }
}
