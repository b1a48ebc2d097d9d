fn main() {
    std::process::exit(dirlab::cli::run(std::env::args_os()));
}
