fn main() {
    std::process::exit(multiscore::cli::run(std::env::args_os()));
}
