mod commands;
mod suites;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperdisc::padic::{PadicContext, PRECISION_CAP};
use hyperdisc::Error;

#[derive(Parser, Debug)]
#[command(
    name = "hyperdisc",
    version,
    about = "Exact computations on p-adic hyperbolic discs"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// The prime p.
    #[arg(short = 'p', long = "prime", global = true)]
    pub p: Option<u64>,
    /// Class label of the disc: 1, eps, p, eps*p (odd p) or 1, -1, 2, ... (p = 2).
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Working precision in p-adic digits for square roots.
    #[arg(long, global = true, default_value_t = 32)]
    pub precision: u32,
    /// Sampling depth for the oracle.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Plain,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Square class of a rational number.
    Classify {
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Hilbert symbol (a, b)_p, or the Legendre symbol (a/p) when b is omitted.
    Symbol {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// List the admissible classes, or test a vector for membership in the disc.
    Disc {
        #[arg(allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Hilbert distance of two disc points given as x,y,z.
    Distance {
        #[arg(allow_hyphen_values = true)]
        v: String,
        #[arg(allow_hyphen_values = true)]
        w: String,
        /// Use the sampled dual instead of the closed form.
        #[arg(long)]
        oracle: bool,
    },
    #[command(subcommand)]
    Tree(TreeCommand),
    #[command(subcommand)]
    Triangle(TriangleCommand),
    /// Run a seeded verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Random cases per property.
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// Negative control: perturb the closed-form constant in the disc suite.
        #[arg(long)]
        inject_wrong_constant: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum TreeCommand {
    /// Graphviz DOT of the ball around a vertex.
    ExportDot {
        /// `n,c` for the lattice basis [[p^n, c], [0, 1]], or a label such as [[3,1],[0,1]].
        #[arg(long, default_value = "0,0")]
        center: String,
        #[arg(long, default_value_t = 2)]
        radius: u32,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Project disc points to tree vertices. Flags must precede the points.
    Project {
        #[arg(required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Distance between two vertices.
    Distance {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        w: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum TriangleCommand {
    /// Hilbert distance of two points of the triangle given as x,y,z.
    Distance {
        #[arg(allow_hyphen_values = true)]
        v: String,
        #[arg(allow_hyphen_values = true)]
        w: String,
    },
    /// The hexagonal-lattice image of a ball.
    Hexmap {
        #[arg(long, default_value = "1,1,1")]
        center: String,
        #[arg(long, default_value = "2")]
        radius: String,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Padic,
    Classgroups,
    Geometry,
    Disc,
    Oracle,
    Tree,
    Triangle,
    All,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(Error),
    #[error("{0}")]
    Other(String),
    #[error("{failures} verification failure(s)")]
    Failures { failures: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::NotPrime(_) | Error::PrecisionTooLow(_) => {
                CliError::Usage(e.to_string())
            }
            e => CliError::Domain(e),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(Error::PrecisionExhausted { .. }) => 3,
            _ => 1,
        }
    }
}

impl Common {
    pub fn ctx(&self) -> Result<PadicContext, CliError> {
        let p = self
            .p
            .ok_or_else(|| CliError::Usage("missing -p <prime>".into()))?;
        if self.precision > PRECISION_CAP {
            return Err(CliError::Usage(format!(
                "precision above the cap {PRECISION_CAP}"
            )));
        }
        Ok(PadicContext::new(p, self.precision)?)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::Failures { failures }) => {
            eprintln!("hyperdisc: {failures} verification failure(s)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("hyperdisc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(CliError::from(Error::NotInDisc).exit_code(), 1);
        assert_eq!(CliError::from(Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::NotPrime(4)).exit_code(), 2);
        assert_eq!(
            CliError::from(Error::PrecisionExhausted { digits: 4096 }).exit_code(),
            3
        );
    }
}
