fn main() {
    std::process::exit(fsn::cli::run(std::env::args_os()));
}
