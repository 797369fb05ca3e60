use std::process::ExitCode;

use clap::Parser;

use werner_cli::{execute, write_report, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, output) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let body = report.render(output.format);
    print!("{body}");
    if let Some(dir) = &output.out_dir {
        let name = match cli.command {
            Command::Verify(_) => "verify",
            Command::Classify(_) => "classify",
            Command::Apply(_) => "apply",
        };
        if let Err(e) = write_report(dir, name, output.format, &body) {
            eprintln!("error: cannot write report to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
