fn main() {
    std::process::exit(suffup::cli::run(std::env::args_os()));
}
