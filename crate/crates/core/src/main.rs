fn main() {
    std::process::exit(tristoch::cli::run());
}
