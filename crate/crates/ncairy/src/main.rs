fn main() {
    std::process::exit(ncairy::cli::run(std::env::args_os()));
}
