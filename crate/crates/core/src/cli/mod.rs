//! Command-line experiment runner.
//!
//! Every command evaluates the library over a parameter sweep, optionally
//! adds seeded Monte Carlo counts, and writes one table as CSV or JSON.

mod commands;
mod sweep;
mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::linalg::Complex;
use crate::states::PureState;

pub use commands::{run, trial_rng, MAX_TRIALS};
pub use sweep::parse_sweep;
pub use table::{format_float, Table, Value, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Parsed sweep values; see [`parse_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep(pub Vec<f64>);

fn sweep_arg(s: &str) -> Result<Sweep, String> {
    parse_sweep(s).map(Sweep)
}

#[derive(Debug, Parser)]
#[command(name = "telepovm", version, about = "Teleportation as a generalized measurement")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,

    /// Monte Carlo seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Monte Carlo trials per sweep point.
    #[arg(long, global = true, default_value_t = 1000,
          value_parser = clap::value_parser!(u64).range(1..=MAX_TRIALS))]
    trials: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output file, `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    out: String,
}

/// Amplitudes of the input qubit. Unset components are 0, and if none is
/// given the input is `(|0⟩ + |1⟩)/√2`. The vector is normalized.
#[derive(Debug, Clone, Args)]
struct QubitArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta_im: Option<f64>,
}

impl QubitArgs {
    fn state(&self) -> crate::Result<PureState> {
        let parts = [self.alpha_re, self.alpha_im, self.beta_re, self.beta_im];
        if parts.iter().all(Option::is_none) {
            return PureState::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2]);
        }
        let [ar, ai, br, bi] = parts.map(|x| x.unwrap_or(0.0));
        PureState::normalized(vec![Complex::new(ar, ai), Complex::new(br, bi)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResourceArg {
    #[value(name = "psi-")]
    PsiMinus,
    #[value(name = "psi+")]
    PsiPlus,
    #[value(name = "phi-")]
    PhiMinus,
    #[value(name = "phi+")]
    PhiPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SteerPovm {
    Rectilinear,
    Diagonal,
    Telepovm,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Standard teleportation over a Bell state, one row per outcome.
    Teleport {
        #[command(flatten)]
        qubit: QubitArgs,
        #[arg(long, value_enum, default_value_t = ResourceArg::PsiMinus)]
        resource: ResourceArg,
    },
    /// Standard protocol over a|00⟩ + b|11⟩ with the Φ⁺ corrections.
    Naive {
        #[command(flatten)]
        qubit: QubitArgs,
        /// a² values.
        #[arg(long, value_parser = sweep_arg)]
        a2: Option<Sweep>,
    },
    /// Conclusive teleportation over a|00⟩ + b|11⟩.
    Conclusive {
        #[command(flatten)]
        qubit: QubitArgs,
        /// a² values in [0.5, 1].
        #[arg(long, value_parser = sweep_arg)]
        a2: Option<Sweep>,
    },
    /// Bilocal filtering of the singlet/|00⟩ mixture, then teleportation.
    Quasi {
        #[command(flatten)]
        qubit: QubitArgs,
        /// Singlet weights in (0, 1).
        #[arg(long, value_parser = sweep_arg)]
        p: Option<Sweep>,
        /// Filter indices n ≥ 1.
        #[arg(long, value_parser = sweep_arg, conflicts_with = "epsilon")]
        n: Option<Sweep>,
        /// Target fidelity gaps in (0, 1); the smallest sufficient n is used.
        #[arg(long, value_parser = sweep_arg)]
        epsilon: Option<Sweep>,
    },
    /// Bob's ensembles steered from a|00⟩ + b|11⟩.
    Steer {
        #[command(flatten)]
        qubit: QubitArgs,
        #[arg(long, value_parser = sweep_arg)]
        a2: Option<Sweep>,
        #[arg(long, value_enum, value_delimiter = ',')]
        povm: Vec<SteerPovm>,
    },
    /// Positivity and completeness of every measurement builder.
    PovmCheck {
        #[command(flatten)]
        qubit: QubitArgs,
        /// a² values for the discrimination POVM.
        #[arg(long, value_parser = sweep_arg)]
        a2: Option<Sweep>,
    },
}

/// Which experiment to run, with its parameters resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Teleport {
        phi: PureState,
        resource: ResourceArg,
    },
    Naive {
        phi: PureState,
        a2: Vec<f64>,
    },
    Conclusive {
        phi: PureState,
        a2: Vec<f64>,
    },
    Quasi {
        phi: PureState,
        p: Vec<f64>,
        filter: QuasiSweep,
    },
    Steer {
        phi: PureState,
        a2: Vec<f64>,
        povms: Vec<SteerPovm>,
    },
    PovmCheck {
        phi: PureState,
        a2: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuasiSweep {
    N(Vec<f64>),
    Epsilon(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub trials: u64,
    pub format: Format,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl RunConfig {
    /// Parses command-line arguments (program name first).
    pub fn from_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        cli.into_config().map_err(|e| {
            clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n"))
        })
    }
}

impl Cli {
    fn into_config(self) -> crate::Result<RunConfig> {
        let sweep = |s: Option<Sweep>, default: f64| s.map_or(vec![default], |s| s.0);
        let command = match self.command {
            CommandArgs::Teleport { qubit, resource } => Command::Teleport {
                phi: qubit.state()?,
                resource,
            },
            CommandArgs::Naive { qubit, a2 } => Command::Naive {
                phi: qubit.state()?,
                a2: sweep(a2, 0.8),
            },
            CommandArgs::Conclusive { qubit, a2 } => Command::Conclusive {
                phi: qubit.state()?,
                a2: sweep(a2, 0.8),
            },
            CommandArgs::Quasi {
                qubit,
                p,
                n,
                epsilon,
            } => Command::Quasi {
                phi: qubit.state()?,
                p: sweep(p, 0.5),
                filter: match n {
                    Some(n) => QuasiSweep::N(n.0),
                    None => QuasiSweep::Epsilon(sweep(epsilon, 0.01)),
                },
            },
            CommandArgs::Steer { qubit, a2, povm } => Command::Steer {
                phi: qubit.state()?,
                a2: sweep(a2, 0.8),
                povms: if povm.is_empty() {
                    vec![SteerPovm::Rectilinear, SteerPovm::Diagonal, SteerPovm::Telepovm]
                } else {
                    povm
                },
            },
            CommandArgs::PovmCheck { qubit, a2 } => Command::PovmCheck {
                phi: qubit.state()?,
                a2: sweep(a2, 0.8),
            },
        };
        Ok(RunConfig {
            command,
            seed: self.seed,
            trials: self.trials,
            format: self.format,
            out: (self.out != "-").then(|| PathBuf::from(self.out)),
        })
    }
}

/// Runs `config` and writes the table to its destination (`stdout` when no
/// path is set).
pub fn execute(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = run(config)?.render(config.format);
    match &config.out {
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "-".into(),
            source,
        }),
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
    }
}

/// Full binary behavior; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&config, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
