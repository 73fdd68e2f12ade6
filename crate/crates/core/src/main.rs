fn main() {
    std::process::exit(lmpcb::cli::run());
}
