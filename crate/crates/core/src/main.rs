use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(swapsteer::cli::run(std::env::args_os()))
}
