fn main() {
    std::process::exit(sicmub::cli::run_from(std::env::args_os()));
}
