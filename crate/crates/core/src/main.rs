fn main() {
    std::process::exit(k3twist::cli::run(std::env::args_os()));
}
