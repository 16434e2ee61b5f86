fn main() {
    std::process::exit(primgen::cli::run(std::env::args_os()));
}
