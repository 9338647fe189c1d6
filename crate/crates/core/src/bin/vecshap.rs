fn main() {
    std::process::exit(vecshap::cli::run(std::env::args_os()));
}
