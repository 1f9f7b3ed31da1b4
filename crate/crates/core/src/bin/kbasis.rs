fn main() {
    std::process::exit(kbasis::cli::main_with_args(std::env::args_os()));
}
