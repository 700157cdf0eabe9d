//! Command-line pipeline around the `masdag` library: dataset generation,
//! fitting, evaluation and seeded batch benchmarks.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod grid;
pub mod manifest;

use args::{Cli, Command};
use error::Result;

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => commands::cmd_gen(&a).map(drop),
        Command::Fit(a) => commands::cmd_fit(&a).map(drop),
        Command::Eval(a) => commands::cmd_eval(&a).map(drop),
        Command::Bench(a) => commands::cmd_bench(&a).map(drop),
        Command::Mas(a) => commands::cmd_mas(&a).map(drop),
        Command::Replay(a) => commands::cmd_replay(&a),
    }
}
