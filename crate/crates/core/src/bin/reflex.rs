fn main() {
    std::process::exit(reflex::cli::run(std::env::args_os()));
}
