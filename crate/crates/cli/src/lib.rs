//! The `qgamma` command-line driver as a library, so tests can run it
//! in-process.

pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;

use clap::Parser;

pub use commands::Exit;
use config::{parse_config_file, resolve, Cli, Settings};

/// What a run produced. `stdout` is empty when `--out` was given.
#[derive(Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn error(exit: Exit, msg: impl std::fmt::Display) -> Self {
        Self {
            exit,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    exit: Exit::BadConfig,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    exit: Exit::Pass,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };

    let mut settings = Settings::new();
    if let Some(path) = &cli.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                return Outcome::error(
                    Exit::BadConfig,
                    format!("cannot read config {}: {e}", path.display()),
                )
            }
        };
        settings = match parse_config_file(&text) {
            Ok(s) => s,
            Err(e) => return Outcome::error(Exit::BadConfig, e),
        };
    }
    settings.extend(cli.settings());

    let cfg = match resolve(&settings) {
        Ok(c) => c,
        Err(e) => return Outcome::error(Exit::BadConfig, e),
    };

    let result = match cfg.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::dispatch(&cfg)),
            Err(e) => return Outcome::error(Exit::BadConfig, e),
        },
        None => commands::dispatch(&cfg),
    };
    let output = match result {
        Ok(o) => o,
        Err(e) => return Outcome::error(Exit::BadConfig, e),
    };

    let mut stderr: String = output.warnings.iter().map(|w| format!("{w}\n")).collect();
    let stdout = match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output.body) {
                stderr.push_str(&format!("error: cannot write {}: {e}\n", path.display()));
                return Outcome {
                    exit: Exit::Io,
                    stdout: String::new(),
                    stderr,
                };
            }
            String::new()
        }
        None => output.body,
    };
    Outcome {
        exit: output.exit,
        stdout,
        stderr,
    }
}
