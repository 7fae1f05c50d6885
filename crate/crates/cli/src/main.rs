fn main() {
    std::process::exit(guardnet_cli::run_command(std::env::args_os()));
}
