fn main() {
    std::process::exit(fj_cli::run(std::env::args_os()));
}
