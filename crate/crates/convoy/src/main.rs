fn main() {
    std::process::exit(convoy::cli::main_with(std::env::args_os()));
}
