fn main() {
    std::process::exit(frameless::cli::main_with_args(std::env::args_os()));
}
