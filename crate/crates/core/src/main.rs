fn main() {
    std::process::exit(partsmooth::cli::main_with_args(std::env::args_os()));
}
