fn main() {
    std::process::exit(trim::cli::run(std::env::args_os()));
}
