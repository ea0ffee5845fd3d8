fn main() {
    std::process::exit(perron_lsa::cli::run(std::env::args()));
}
