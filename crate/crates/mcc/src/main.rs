use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match mcc::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the compile-error code; 2 means a diff failure.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    ExitCode::from(mcc::run(cli, &mut stdout.lock()))
}
