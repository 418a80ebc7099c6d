//! The `forage` command line: `run`, `bench`, `validate` and `render`.
//!
//! Exit codes: 0 success, 1 invalid input (arguments, missing or invalid
//! config), 2 runtime failure (simulation error, I/O, malformed frame).

pub mod commands;
pub mod manifest;
pub mod render;

pub use commands::{main_with_args, Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Environment variable read for the default worker count.
pub const THREADS_ENV: &str = "FORAGE_THREADS";
