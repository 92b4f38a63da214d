//! Batch driver for the mifht library: problem files in, diagnostics and
//! function tables out.

pub mod bundle;
pub mod commands;
pub mod error;
pub mod problem;
pub mod selftest;
pub mod table;

pub use bundle::{Check, ResultBundle};
pub use commands::{bundle_exit_code, run_command};
pub use error::{CliError, CliResult};
pub use problem::{parse_problem, parse_problem_file, Command, Overrides, ProblemSpec};
pub use table::Table;

/// Caps the global thread pool at the value of `MIFHT_THREADS`, if set.
pub fn configure_threads(var: Option<&str>) -> CliResult<Option<usize>> {
    let Some(v) = var else { return Ok(None) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::schema("MIFHT_THREADS", format!("expected a positive integer, got `{v}`")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}
