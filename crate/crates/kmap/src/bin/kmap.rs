fn main() {
    std::process::exit(kmap::cli::run());
}
