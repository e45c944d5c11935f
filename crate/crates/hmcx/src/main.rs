fn main() {
    std::process::exit(hmcx::cli::run());
}
