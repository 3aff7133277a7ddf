fn main() {
    std::process::exit(rjsa::cli::run(std::env::args_os()));
}
