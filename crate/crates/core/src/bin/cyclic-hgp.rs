use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    cyclic_hgp::cli::main_with_args(std::env::args_os())
}
