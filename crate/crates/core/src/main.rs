fn main() {
    std::process::exit(arboreal::cli::run());
}
