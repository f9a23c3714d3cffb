use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cagm::cli::main_entry())
}
