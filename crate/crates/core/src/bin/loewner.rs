use std::io::Write;
use std::process::ExitCode;

use loewner::cli::{parse_args, run};

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = run(&config);
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(outcome.output.as_bytes()).is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(outcome.status)
}
