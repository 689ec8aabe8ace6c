use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(phasefield_cli::run_main(std::env::args_os()) as u8)
}
