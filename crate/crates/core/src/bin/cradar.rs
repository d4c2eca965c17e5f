fn main() {
    env_logger::init();
    std::process::exit(cradar::cli::run(std::env::args_os()));
}
