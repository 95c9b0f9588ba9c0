fn main() {
    std::process::exit(polyseries::cli::main_with_args(std::env::args_os()));
}
