fn main() {
    std::process::exit(ope_meso::cli::main_with_args(std::env::args_os()));
}
