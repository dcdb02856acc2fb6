fn main() -> std::process::ExitCode {
    explain_cli::main_with_args(std::env::args_os())
}
