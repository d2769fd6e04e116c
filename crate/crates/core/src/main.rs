use std::process::ExitCode;

use clap::Parser;
use relsamp::cli_report::{config::resolve, emit_csv, emit_report, execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    let run = || -> relsamp::Result<bool> {
        let cfg = resolve(cli.command)?;
        let out = execute(&cfg)?;
        emit_report(&out.report, cfg.out.as_deref())?;
        if let (Some(path), Some(t)) = (cfg.csv.as_deref(), out.table.as_ref()) {
            emit_csv(t, path)?;
        }
        Ok(out.ok)
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
