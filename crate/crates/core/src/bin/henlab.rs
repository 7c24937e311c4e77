fn main() {
    std::process::exit(henlab::cli::dispatch(std::env::args_os()));
}
