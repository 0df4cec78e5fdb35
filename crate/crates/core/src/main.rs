fn main() {
    std::process::exit(indefinite::cli::main_with_args(std::env::args_os()));
}
