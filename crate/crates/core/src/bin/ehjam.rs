fn main() {
    std::process::exit(ehjam::cli::run(std::env::args_os()));
}
