fn main() {
    std::process::exit(wfuse::cli::run());
}
