fn main() -> std::process::ExitCode {
    aia::cli::main()
}
