use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(gds_thermo::cli::run(std::env::args_os()))
}
