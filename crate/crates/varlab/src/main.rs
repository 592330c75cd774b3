use std::process::ExitCode;

fn main() -> ExitCode {
    varlab::cli::main_with(std::env::args_os())
}
