fn main() {
    std::process::exit(shadowlab::cli::main());
}
