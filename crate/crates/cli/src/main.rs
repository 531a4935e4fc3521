fn main() {
    std::process::exit(pig_cli::main_with_args(std::env::args_os()));
}
