fn main() {
    std::process::exit(smimc::cli::run(std::env::args_os()));
}
