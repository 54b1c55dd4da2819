fn main() {
    std::process::exit(hypertrack::cli::run(std::env::args_os()));
}
