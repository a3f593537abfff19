fn main() {
    std::process::exit(exemplar_cli::run(std::env::args_os()));
}
