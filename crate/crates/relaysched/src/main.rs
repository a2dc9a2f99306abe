fn main() {
    std::process::exit(relaysched::cli::run_command(std::env::args_os()));
}
