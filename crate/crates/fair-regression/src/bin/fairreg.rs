fn main() {
    std::process::exit(fair_regression::cli::run(std::env::args_os()));
}
