//! Command-line front end for `magbern-core`: configuration, file formats,
//! parallel sweeps and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod io;

pub use commands::{run, write_bundle, ReportBundle};
pub use config::{parse_config, RunConfig};
pub use error::{CliError, CliResult};

/// Parses, runs and writes outputs; returns the process exit status.
/// Standard output receives the primary table, standard error the notes
/// and, without `--out`, the manifest.
pub fn main_with_args<I, T>(argv: I, stdout: &mut impl std::io::Write, stderr: &mut impl std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_config(argv).and_then(|cfg| {
        let bundle = run(&cfg)?;
        if let Some(dir) = cfg.out_dir() {
            write_bundle(&bundle, &dir)?;
        }
        Ok((cfg, bundle))
    });
    match result {
        Ok((cfg, bundle)) => {
            let _ = stdout.write_all(bundle.stdout.as_bytes());
            for n in &bundle.notes {
                let _ = writeln!(stderr, "magbern: {n}");
            }
            if cfg.out_dir().is_none() {
                let _ = stderr.write_all(bundle.manifest.as_bytes());
            }
            bundle.status
        }
        Err(CliError::Help(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "magbern: {e}");
            e.exit_code()
        }
    }
}
