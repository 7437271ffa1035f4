fn main() -> std::process::ExitCode {
    polarcascade_cli::main_entry()
}
