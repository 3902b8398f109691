fn main() {
    std::process::exit(radtherm::cli::run(std::env::args()));
}
