use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use procid::cli::{run, Cli};

fn main() -> ExitCode {
    let out = run(Cli::parse());
    std::io::stdout().write_all(out.stdout.as_bytes()).ok();
    std::io::stderr().write_all(out.stderr.as_bytes()).ok();
    ExitCode::from(out.status as u8)
}
