fn main() {
    std::process::exit(aqnn::cli::run(std::env::args_os()));
}
