fn main() {
    std::process::exit(pepita::cli::main_with_args(std::env::args_os()));
}
