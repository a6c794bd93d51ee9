fn main() -> std::process::ExitCode {
    chern_lab::cli::main()
}
