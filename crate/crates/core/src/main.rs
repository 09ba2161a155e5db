fn main() {
    std::process::exit(roughness::cli::main_with_args(std::env::args_os()));
}
