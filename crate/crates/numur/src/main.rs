fn main() {
    std::process::exit(numur::cli::main_with(std::env::args_os()));
}
