fn main() {
    std::process::exit(isorelabel_cli::run(std::env::args_os()));
}
