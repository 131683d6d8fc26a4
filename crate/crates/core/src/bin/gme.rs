fn main() {
    std::process::exit(gme::cli::main_with_args(std::env::args_os()));
}
