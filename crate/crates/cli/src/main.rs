use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lql_cli::{run, Command, Format, Mode, RunConfig, EXIT_INPUT};

/// Compile propositional axiom systems to polynomial equations and analyse them.
#[derive(Debug, Parser)]
#[command(name = "lql", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Program file
    file: PathBuf,
    #[arg(long, value_enum, default_value = "modular")]
    mode: Mode,
    /// Prime modulus in modular mode
    #[arg(long, default_value_t = 2)]
    field: u64,
    #[arg(long, default_value_t = lql_core::solve::DEFAULT_MAX_ENUM)]
    max_enum: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Objective expression
    #[arg(long)]
    query: Option<String>,
    /// Orbit start, one comma-separated value per parameter
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
    #[arg(long, default_value_t = 10)]
    steps: usize,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let cfg = RunConfig {
        command: args.command,
        mode: args.mode,
        field: args.field,
        max_enum: args.max_enum,
        format: args.format,
        query: args.query,
        initial: args.initial,
        steps: args.steps,
    };
    let out = run(&cfg, &text);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
