fn main() {
    std::process::exit(nclp::cli::run(std::env::args_os()));
}
