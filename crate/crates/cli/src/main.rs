fn main() -> std::process::ExitCode {
    modegate_cli::main_with_args(std::env::args_os())
}
