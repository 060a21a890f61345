fn main() {
    std::process::exit(zslab::cli::main_with_args(std::env::args_os()));
}
