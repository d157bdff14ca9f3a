fn main() {
    std::process::exit(aspa::cli::run(std::env::args_os()));
}
