fn main() {
    std::process::exit(adlm::cli::run(std::env::args_os()));
}
