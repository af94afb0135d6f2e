fn main() {
    std::process::exit(elliott::cli::run(std::env::args_os()));
}
