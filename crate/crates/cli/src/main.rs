//! `mifht <command> --problem <file> [options]`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mifht_cli::{bundle_exit_code, configure_threads, parse_problem_file, run_command, selftest, CliError, Command, Overrides};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "mifht", version, about = "Multi-interval finite Hilbert transforms")]
struct Args {
    command: Command,
    /// Problem file (TOML); optional for `selftest`.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Directory for diagnostics.json and the table files.
    #[arg(long, default_value = "mifht-out")]
    output: PathBuf,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    nystrom: Option<usize>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Range tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Spectral parameter as `RE,IM`.
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
    lambda: Option<Complex64>,
}

fn parse_lambda(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or("expected RE,IM")?;
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Complex64::new(f(re)?, f(im)?))
}

fn run(args: Args) -> Result<i32, CliError> {
    configure_threads(std::env::var("MIFHT_THREADS").ok().as_deref())?;
    let bundle = match (&args.problem, args.command) {
        (None, Command::Selftest) => selftest::selftest(None),
        (None, _) => return Err(CliError::schema("--problem", "required for this command")),
        (Some(path), command) => {
            let mut spec = parse_problem_file(path)?;
            spec.apply(&Overrides {
                command: Some(command),
                modes: args.modes,
                nystrom: args.nystrom,
                tmax: args.tmax,
                tol: args.tol,
                lambda: args.lambda,
            })?;
            run_command(&spec)?
        }
    };
    bundle.write(&args.output)?;
    for c in &bundle.checks {
        println!("{} {} = {:.3e} ({} {:.1e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.relation, c.tol);
    }
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {}", args.output.display());
    Ok(bundle_exit_code(&bundle))
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("mifht: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
