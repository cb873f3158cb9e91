use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use abext_cli::report::{error_report, inputs_digest};
use abext_cli::{execute, fixtures, CliError, Overrides, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

/// Runs one task from a problem document: cohomology, extensions, and the
/// period-lattice integrability test for matrix groups.
///
/// Exit status: 0 success, 2 input error, 3 computation rejected,
/// 4 indeterminate verdict.
#[derive(Debug, Parser)]
#[command(name = "abext", version)]
struct Cli {
    /// Document path, `-` for stdin (the default), or `fixture:NAME`.
    input: Option<String>,

    /// Overrides the task named in the document.
    #[arg(long)]
    task: Option<Task>,

    /// Gauss-Legendre points per axis for surface integrals.
    #[arg(long)]
    quad_order: Option<usize>,

    /// Replaces the tolerance that decides the task's outcome.
    #[arg(long)]
    tol: Option<f64>,

    /// Finite-difference step for D2.
    #[arg(long)]
    fd_step: Option<f64>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,

    /// Lists the shipped example documents and exits.
    #[arg(long)]
    fixtures: bool,
}

fn read_input(input: Option<&str>) -> Result<String, CliError> {
    match input {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
        Some(source) => match source.strip_prefix("fixture:") {
            Some(name) => fixtures::find(name)
                .map(|f| f.text.to_string())
                .ok_or_else(|| CliError::Unresolved(format!("no fixture named '{name}' (see --fixtures)"))),
            None => {
                let path = PathBuf::from(source);
                std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.fixtures {
        print!("{}", fixtures::listing());
        return ExitCode::SUCCESS;
    }
    let ov = Overrides { task: cli.task, quad_order: cli.quad_order, tol: cli.tol, fd_step: cli.fd_step };
    let report = match read_input(cli.input.as_deref()) {
        Ok(text) => execute(&text, &ov),
        Err(e) => error_report(cli.task.map(|t| t.name().to_string()), inputs_digest("", &ov), &e, 0.0),
    };
    match cli.output {
        OutputFormat::Machine => println!("{}", report.to_machine()),
        OutputFormat::Text => {
            print!("{}", report.to_text());
            if let Some(e) = &report.error {
                eprintln!("abext: {}", e.message);
            }
        }
    }
    ExitCode::from(report.exit_code as u8)
}
