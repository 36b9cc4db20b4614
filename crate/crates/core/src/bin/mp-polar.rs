fn main() -> std::process::ExitCode {
    mp_polar::cli::main()
}
