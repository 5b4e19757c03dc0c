fn main() {
    env_logger::init();
    sgur::cli::configure_threads();
    std::process::exit(sgur::cli::run(std::env::args_os()));
}
