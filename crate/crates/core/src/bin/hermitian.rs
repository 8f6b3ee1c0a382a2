fn main() {
    std::process::exit(hermitian_core::cli::main_with_args(std::env::args()));
}
