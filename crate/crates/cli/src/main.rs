fn main() {
    std::process::exit(satmetric_cli::run(std::env::args_os()));
}
