fn main() {
    std::process::exit(bridging_cli::run(std::env::args_os()));
}
