fn main() {
    std::process::exit(succinct_pit::cli::run(std::env::args_os()));
}
