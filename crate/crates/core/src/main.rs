fn main() {
    std::process::exit(peglab::cli::main_with_args(std::env::args_os()));
}
