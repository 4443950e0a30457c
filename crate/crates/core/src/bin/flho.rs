fn main() {
    std::process::exit(flho::cli::run(std::env::args_os()));
}
