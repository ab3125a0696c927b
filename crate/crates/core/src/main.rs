fn main() {
    std::process::exit(grant_novelty::cli::run(std::env::args()));
}
