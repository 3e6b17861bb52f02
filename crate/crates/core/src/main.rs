fn main() {
    std::process::exit(scismm::cli::main_with_args(std::env::args_os()));
}
