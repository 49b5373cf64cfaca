fn main() {
    std::process::exit(tut_harness::cli::main_with_args(std::env::args_os()));
}
