use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use deformctl::cli::{emit, Cli, Output};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.execute().and_then(|out| match out {
        Output::Text(t) => Ok((t, true)),
        Output::Report(r) => emit(&r, cli.report.as_deref()).map(|t| (t, r.passed)),
    });
    match result {
        Ok((text, passed)) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("deformctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
