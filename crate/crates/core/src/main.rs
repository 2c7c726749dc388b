fn main() {
    std::process::exit(moser::cli::run(std::env::args_os()));
}
