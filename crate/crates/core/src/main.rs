use std::process::ExitCode;

fn main() -> ExitCode {
    xtalk::cli::run()
}
