fn main() {
    std::process::exit(sumsets::cli::run(std::env::args_os()));
}
