//! `toric-ech`: ECH capacities, embedding functions, staircases, ATF base
//! diagrams and the number theory around them, as CSV or JSON.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use output::{Format, RunConfig, TOOL};
use serde::Serialize;
use std::path::PathBuf;
use toric_ech::Error;

#[derive(Parser, Debug)]
#[command(name = "toric-ech", version, about = "Exact ECH capacities and infinite staircases of convex toric domains")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// A named staircase case or an arbitrary negative weight expansion.
#[derive(Args, Debug, Serialize, Clone)]
pub struct Domain {
    /// One of (3), (4;2,2), (3;1,1,1), (3;1,1,1,1), (3;1), (3;1,1).
    #[arg(long)]
    pub case: Option<String>,
    /// Negative weight expansion "b;b1,b2,...", rationals allowed.
    #[arg(long)]
    pub expansion: Option<String>,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct CaseArg {
    #[arg(long)]
    pub case: String,
}

#[derive(Subcommand, Debug, Serialize, Clone)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// ECH capacities c_0, ..., c_{count-1}.
    Capacities {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Weight expansion of a rational a >= 1.
    Weights {
        #[arg(long)]
        a: String,
    },
    /// Lower bounds for the ellipsoid embedding function on a grid.
    Embedfn {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
        #[arg(long, default_value = "1")]
        amin: String,
        #[arg(long)]
        amax: String,
        #[arg(long, default_value = "1/100")]
        astep: String,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        /// Also report slope changes above this tolerance as corners.
        #[arg(long)]
        corner_tol: Option<String>,
    },
    /// Accumulation point a0.
    Accpoint {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
    },
    /// Staircase obstruction at a0, or the class bound at a single point.
    Obstruction {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value = "1/10")]
        radius: String,
        /// Evaluate max(volume, mu) at this point instead.
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = 20)]
        dmax: u64,
    },
    /// Inner and outer staircase corners.
    Corners {
        #[command(flatten)]
        #[serde(flatten)]
        case: CaseArg,
        /// A single index.
        #[arg(long, conflicts_with = "nmax")]
        n: Option<usize>,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
    },
    /// Segments of the staircase graph up to amax.
    Graph {
        #[command(flatten)]
        #[serde(flatten)]
        case: CaseArg,
        #[arg(long)]
        amax: String,
    },
    /// Recurrence identities and constant-table consistency.
    Identities {
        /// All six cases when omitted.
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 200)]
        nmax: usize,
    },
    /// The lattice path of a staircase family.
    Latticepath {
        #[command(flatten)]
        #[serde(flatten)]
        case: CaseArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Base diagrams: seed scripts and the mutation recursion.
    Atf {
        #[command(subcommand)]
        action: AtfAction,
    },
    /// Partial sums C_theta(n) of ({k theta} - 1/2).
    Ctheta {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
        /// Use the root > 1 of x^2 - trace x + 1 as theta.
        #[arg(long)]
        trace: Option<String>,
        #[arg(long, default_value_t = 100)]
        nmax: u64,
        /// Report C_theta + C_{1/theta} instead.
        #[arg(long)]
        pair: bool,
    },
    /// Lattice point counts of the irrational triangle and their defect.
    Ehrhart {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
        #[arg(long, default_value_t = 100)]
        tmax: u64,
    },
    /// Capacity counting function and its quasipolynomial.
    Capfn {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
        #[arg(long, default_value_t = 60)]
        tmax: u64,
    },
    /// Reflexive polygons and the scaled reflexivity test.
    Reflexive {
        #[command(flatten)]
        #[serde(flatten)]
        domain: Domain,
    },
    /// Regenerates an output file from the config in its header.
    Rerun { file: PathBuf },
}

#[derive(Subcommand, Debug, Serialize, Clone)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum AtfAction {
    /// Replays the seed script of a case move by move.
    Replay {
        #[command(flatten)]
        #[serde(flatten)]
        case: CaseArg,
        /// Write one SVG per step into this directory.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Runs the checked mutation recursion.
    Recurse {
        #[command(flatten)]
        #[serde(flatten)]
        case: CaseArg,
        #[arg(long, default_value_t = 30)]
        steps: usize,
    },
}

/// Failure with its exit code: 2 configuration, 3 certification shortfall,
/// 4 internal check failure.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::FieldMismatch { .. } | Error::UnsupportedShape(_) | Error::Parse(_) | Error::Io(_) => 2,
            Error::CertificationShortfall { .. } | Error::InsufficientLength { .. } | Error::SearchBound(_) => 3,
            Error::CheckFailed(_) | Error::Overflow(_) => 4,
        };
        CliError { code, message: e.to_string() }
    }
}

fn kind(code: i32) -> &'static str {
    match code {
        2 => "config",
        3 => "certification",
        _ => "check",
    }
}

fn report(e: &CliError) -> i32 {
    let doc = serde_json::json!({ "error": { "kind": kind(e.code), "message": e.message }, "exit_code": e.code });
    eprintln!("{doc}");
    e.code
}

/// The arguments with any output location removed.
fn recorded_argv(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if std::mem::take(&mut skip) {
            continue;
        }
        if a == "-o" || a == "--output" {
            skip = true;
        } else if !(a.starts_with("--output=") || (a.starts_with("-o") && a.len() > 2 && !a.starts_with("--"))) {
            out.push(a.clone());
        }
    }
    out
}

fn subcommand_name(c: &Command) -> String {
    match serde_json::to_value(c).ok().and_then(|v| v.get("subcommand").cloned()) {
        Some(serde_json::Value::String(s)) => s,
        _ => "unknown".into(),
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    if let Command::Rerun { file } = &cli.command {
        let text = std::fs::read_to_string(file).map_err(|e| CliError::config(format!("{}: {e}", file.display())))?;
        let config = RunConfig::from_output(&text).map_err(CliError::config)?;
        let inner = Cli::try_parse_from(std::iter::once("toric-ech".to_string()).chain(config.argv.iter().cloned()))
            .map_err(|e| CliError::config(e.to_string()))?;
        if matches!(inner.command, Command::Rerun { .. }) {
            return Err(CliError::config("recorded command is itself a rerun"));
        }
        let inner = Cli { output: cli.output, ..inner };
        return execute(inner, config.argv);
    }
    let config = RunConfig {
        tool: TOOL.to_string(),
        command: subcommand_name(&cli.command),
        argv: recorded_argv(&argv),
        parameters: serde_json::to_value(&cli.command).expect("serializable arguments"),
    };
    let outcome = commands::run(&cli.command)?;
    let text = outcome.table.render(&config, cli.format);
    match &cli.output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    for (path, contents) in &outcome.artifacts {
        std::fs::write(path, contents).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    }
    match outcome.failure {
        Some(msg) => Err(CliError { code: 4, message: msg }),
        None => Ok(()),
    }
}

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::iter::once("toric-ech".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return;
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(report(&CliError::config(e.kind().to_string())));
        }
    };
    if let Err(e) = execute(cli, argv) {
        std::process::exit(report(&e));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn output_location_is_not_recorded() {
        let argv = strings(&["corners", "-o", "a.csv", "--case", "(3)", "--output=b.csv", "-oc.csv", "--n", "2"]);
        assert_eq!(recorded_argv(&argv), strings(&["corners", "--case", "(3)", "--n", "2"]));
    }

    #[test]
    fn exit_codes_by_error() {
        assert_eq!(CliError::from(Error::Parse("x".into())).code, 2);
        assert_eq!(CliError::from(Error::CertificationShortfall { requested: 3, achieved: 1 }).code, 3);
        assert_eq!(CliError::from(Error::CheckFailed("item 4".into())).code, 4);
    }

    #[test]
    fn config_round_trip() {
        let cli = Cli::try_parse_from(["toric-ech", "corners", "--case", "(3)", "--n", "2"]).unwrap();
        let config = RunConfig {
            tool: TOOL.into(),
            command: subcommand_name(&cli.command),
            argv: strings(&["corners", "--case", "(3)", "--n", "2"]),
            parameters: serde_json::to_value(&cli.command).unwrap(),
        };
        assert_eq!(config.command, "corners");
        let table = commands::run(&cli.command).unwrap().table;
        for format in [Format::Csv, Format::Json] {
            assert_eq!(RunConfig::from_output(&table.render(&config, format)).unwrap(), config);
        }
    }
}
