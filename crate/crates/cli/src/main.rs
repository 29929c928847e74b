mod args;
mod commands;
mod output;

use clap::error::ErrorKind;
use clap::Parser;
use std::process::ExitCode;

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = serde_json::json!({ "error": kind, "message": message.trim(), "exit_code": code });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn code_for(e: &etadist::Error) -> u8 {
    match e {
        etadist::Error::Parameter(_) | etadist::Error::Domain(_) => 2,
        etadist::Error::Capacity(_) => 3,
        etadist::Error::Numeric(_) | etadist::Error::Internal(_) => 4,
    }
}

fn main() -> ExitCode {
    let argv = match args::expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => return fail("parameter", &msg, 2),
    };
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("parameter", &e.to_string(), 2),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail("parameter", "--threads must be positive", 2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            return fail("internal", &e.to_string(), 4);
        }
    }
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => return fail(e.kind(), &e.to_string(), code_for(&e)),
    };
    match output::emit(&cli, report) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail("io", &e.to_string(), 4),
    }
}
