fn main() {
    std::process::exit(uwarrant::cli::main_with_args(std::env::args_os()));
}
