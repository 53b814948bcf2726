fn main() {
    std::process::exit(corona_core::cli::main_with_args(std::env::args_os()));
}
