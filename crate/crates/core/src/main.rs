fn main() {
    std::process::exit(bubblelab::runner::cli::main_with_args(std::env::args_os()));
}
