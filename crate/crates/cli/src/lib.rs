//! File formats, reports and command implementations behind the `manna`
//! binary.

pub mod args;
pub mod commands;
pub mod demo;
pub mod error;
pub mod format;
pub mod report;

use std::io::Write;
use std::path::Path;

pub use commands::{run, Outcome};
pub use error::CliError;

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: dir.join(name),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

/// Writes the report and every output file of `outcome` into `dir`.
pub fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<(), CliError> {
    for (name, contents) in &outcome.files {
        write_atomic(dir, name, contents)?;
    }
    write_atomic(dir, "report.json", &outcome.report.to_json())
}
