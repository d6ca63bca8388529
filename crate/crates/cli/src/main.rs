use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = hasa_cli::Cli::parse();
    let code = hasa_cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
