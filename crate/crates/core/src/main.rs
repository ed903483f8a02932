fn main() {
    std::process::exit(curved_dirac::cli::run());
}
