fn main() {
    std::process::exit(hadithscope::cli::main());
}
