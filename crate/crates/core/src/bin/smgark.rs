fn main() -> std::process::ExitCode {
    smgark::cli::main()
}
