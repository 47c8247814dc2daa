use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qtrop::cli::{run, Command};

fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments
    let cmd = Command::parse();
    let out = run(&cmd);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.render().as_bytes());
    ExitCode::from(out.status as u8)
}
