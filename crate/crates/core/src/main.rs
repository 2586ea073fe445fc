fn main() {
    std::process::exit(blockforge::cli::main_with_args(std::env::args_os()));
}
