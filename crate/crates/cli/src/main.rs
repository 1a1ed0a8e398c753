fn main() {
    std::process::exit(lagfib::main_with_args(std::env::args_os()));
}
