fn main() -> std::process::ExitCode {
    ghzadc::cli::main()
}
