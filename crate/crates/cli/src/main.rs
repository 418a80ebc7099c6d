fn main() {
    std::process::exit(forage_cli::main_with_args(std::env::args_os()));
}
