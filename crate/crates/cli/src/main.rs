fn main() {
    std::process::exit(decaylab_cli::dispatch(std::env::args_os()));
}
