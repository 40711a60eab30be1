fn main() {
    std::process::exit(cslbp::cli::run(std::env::args_os()));
}
