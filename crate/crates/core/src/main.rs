fn main() {
    std::process::exit(finsler_ab::cli::run(std::env::args_os()));
}
