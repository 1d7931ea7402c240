fn main() {
    std::process::exit(fpmimo::cli::main_with_args(std::env::args_os()));
}
