use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod report;

use report::{Failure, Report};

#[derive(Parser, Debug)]
#[command(name = "finob", version, about = "Chain-level finiteness obstruction engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusRing {
    Integers,
    C2,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Input document.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Where to write the produced document (constructions) or the report.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Name of the object to operate on.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the invariants of a named complex, map, domination, equivalence, module or witness.
    Verify(Common),
    /// Homology of the underlying lattices of a complex.
    Homology(Common),
    /// Build the instant finite reduction of a domination.
    Instant(Common),
    /// Euler characteristic and reduced class of a domination.
    Obstruction {
        #[command(flatten)]
        common: Common,
        /// Norm bound for the class oracle (default: Minkowski bound).
        #[arg(long)]
        class_bound: Option<u64>,
        /// Stable-freeness witness for the one non-free module of A.
        #[arg(long)]
        witness: Option<String>,
    },
    /// Remove the acyclic bottom degrees `<= degree` of a complex.
    Trim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        degree: i64,
    },
    /// Replace the one non-free module of a complex by a free one.
    FreeReplace {
        #[command(flatten)]
        common: Common,
        /// Stable-freeness witness for the non-free module.
        #[arg(long)]
        witness: Option<String>,
    },
    /// Two-term Laurent resolution of a module, with a window check.
    LaurentResolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        window: usize,
    },
    /// Finite prefix of the periodic resolution of a module.
    Swindle {
        #[command(flatten)]
        common: Common,
        /// Top degree N of the prefix.
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
    /// Algebraic mapping torus of an endomorphism; with --against and
    /// --witness, check an equivalence between two tori.
    Torus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        against: Option<String>,
        #[arg(long)]
        witness: Option<String>,
    },
    /// A domination of a module placed in one degree.
    Realize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        degree: i64,
    },
    /// Generate a seeded corpus of dominations.
    Corpus {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value = "integers")]
        ring: CorpusRing,
    },
}

fn run(cmd: Command) -> (Format, Result<Report, Failure>) {
    match cmd {
        Command::Verify(c) => (c.format, commands::verify(&c)),
        Command::Homology(c) => (c.format, commands::homology(&c)),
        Command::Instant(c) => (c.format, commands::instant(&c)),
        Command::Obstruction { common, class_bound, witness } => {
            (common.format, commands::obstruction(&common, class_bound, witness.as_deref()))
        }
        Command::Trim { common, degree } => (common.format, commands::trim(&common, degree)),
        Command::FreeReplace { common, witness } => {
            (common.format, commands::free_replace(&common, witness.as_deref()))
        }
        Command::LaurentResolve { common, window } => (common.format, commands::laurent_resolve(&common, window)),
        Command::Swindle { common, degree } => (common.format, commands::swindle(&common, degree)),
        Command::Torus { common, against, witness } => {
            (common.format, commands::torus(&common, against.as_deref(), witness.as_deref()))
        }
        Command::Realize { common, degree } => (common.format, commands::realize(&common, degree)),
        Command::Corpus { output, format, seed, count, ring } => {
            let common = Common { input: None, output, format, name: None };
            (format, commands::corpus(&common, seed, count, ring))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors count as malformed input; help and version are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (format, result) = run(cli.command);
    match result {
        Ok(report) => {
            print!("{}", report.render(format));
            ExitCode::from(if report.is_ok() { 0 } else { 2 })
        }
        Err(f) => {
            eprintln!("error: {}: {}", f.code, f.message);
            if format == Format::Structured {
                print!("{}", f.render());
            }
            ExitCode::from(1)
        }
    }
}
