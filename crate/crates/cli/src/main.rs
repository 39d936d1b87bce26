use std::process::ExitCode;

fn main() -> ExitCode {
    hhgq_cli::main_with_args(std::env::args_os())
}
