fn main() {
    std::process::exit(trajext::cli::run(std::env::args_os()));
}
