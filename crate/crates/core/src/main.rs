fn main() {
    std::process::exit(letterdyn::cli::run(std::env::args_os()));
}
