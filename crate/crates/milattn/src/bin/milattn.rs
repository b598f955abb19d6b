fn main() {
    std::process::exit(milattn::cli::run(std::env::args_os()));
}
