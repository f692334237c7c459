use std::process::ExitCode;

use clap::Parser;
use time4_lab::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let code = time4_lab::execute(cli, &mut stdout.lock());
    ExitCode::from(code)
}
